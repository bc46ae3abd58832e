#include "fieldcorr/cli/config.hpp"

#include <sstream>

#include "fieldcorr/error.hpp"

namespace fieldcorr::cli {

RunConfig::RunConfig(std::string command, json raw, fs::path out)
    : command_(std::move(command)), raw_(std::move(raw)), out_(std::move(out)) {
  if (!raw_.is_object()) throw ConfigError("config must be a JSON object");
}

bool RunConfig::has(const std::string& key) const { return raw_.contains(key) && !raw_.at(key).is_null(); }

const json& RunConfig::get(const std::string& key) {
  used_.insert(key);
  if (!has(key)) throw ConfigError(command_ + ": config is missing required key \"" + key + "\"");
  resolved_[key] = raw_.at(key);
  return raw_.at(key);
}

void RunConfig::set_resolved(const std::string& key, json value) {
  used_.insert(key);
  resolved_[key] = std::move(value);
}

std::uint64_t RunConfig::seed() {
  if (!has("seed")) {
    set_resolved("seed", 0);
    return 0;
  }
  const json& j = get("seed");
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ConfigError("seed must be a non-negative integer");
  return j.get<std::uint64_t>();
}

std::size_t RunConfig::replications(std::size_t fallback) {
  if (!has("replications")) {
    set_resolved("replications", fallback);
    return fallback;
  }
  const json& j = get("replications");
  if (!j.is_number_integer() || j.get<std::int64_t>() < 1) throw ConfigError("replications must be an integer >= 1");
  return j.get<std::size_t>();
}

Window RunConfig::window() { return io::window_from_json(get("window")); }

HurstSpec RunConfig::hurst() { return HurstSpec(io::matrix_from_json(get("H"), "H")); }

MixingMatrix RunConfig::mixing(Eigen::Index n) {
  if (!has("A")) {
    set_resolved("A", io::matrix_to_json(Matrix::Identity(n, n)));
    return MixingMatrix::identity(n);
  }
  return MixingMatrix(io::matrix_from_json(get("A"), "A", n, n));
}

ThetaTuple RunConfig::theta(std::string* ref) {
  if (has("theta") && has("theta_file")) throw ConfigError("give either \"theta\" or \"theta_file\", not both");
  if (has("theta_file")) {
    const std::string file = get("theta_file").get<std::string>();
    if (ref) *ref = file;
    return io::theta_from_json(io::read_json_file(path(file)));
  }
  if (ref) *ref = "config:theta";
  return io::theta_from_json(get("theta"));
}

TruncationPolicy RunConfig::truncation() {
  TruncationPolicy p;
  if (has("truncation")) {
    const json& t = get("truncation");
    if (!t.is_object()) throw ConfigError("truncation must be an object {\"eps\":..., \"depth\":[...]}");
    for (const auto& [k, v] : t.items())
      if (k != "eps" && k != "depth") throw ConfigError("truncation: unknown key \"" + k + "\"");
    if (t.contains("eps")) {
      if (!t["eps"].is_number() || !(t["eps"].get<double>() > 0.0))
        throw ConfigError("truncation.eps must be a positive number");
      p.eps = t["eps"].get<double>();
    }
    if (t.contains("depth")) {
      for (const auto& d : t["depth"]) {
        if (!d.is_number_integer() || d.get<std::int64_t>() < 0)
          throw ConfigError("truncation.depth entries must be non-negative integers");
        p.depth.push_back(d.get<std::int64_t>());
      }
    }
  }
  json r;
  r["eps"] = p.eps;
  if (!p.depth.empty()) r["depth"] = p.depth;
  set_resolved("truncation", r);
  return p;
}

Clock RunConfig::clock(Clock fallback) {
  if (!has("clock")) {
    set_resolved("clock", clock_name(fallback));
    return fallback;
  }
  return parse_clock(get("clock").get<std::string>());
}

std::size_t RunConfig::max_points() {
  if (!has("max_points")) {
    set_resolved("max_points", kDefaultMaxGridPoints);
    return kDefaultMaxGridPoints;
  }
  const json& j = get("max_points");
  if (!j.is_number_integer() || j.get<std::int64_t>() < 1) throw ConfigError("max_points must be an integer >= 1");
  return j.get<std::size_t>();
}

double RunConfig::number(const std::string& key, double fallback) {
  if (!has(key)) {
    set_resolved(key, fallback);
    return fallback;
  }
  const json& j = get(key);
  if (!j.is_number()) throw ConfigError(key + " must be a number");
  return j.get<double>();
}

bool RunConfig::flag(const std::string& key, bool fallback) {
  if (!has(key)) {
    set_resolved(key, fallback);
    return fallback;
  }
  const json& j = get(key);
  if (!j.is_boolean()) throw ConfigError(key + " must be true or false");
  return j.get<bool>();
}

std::string RunConfig::string(const std::string& key, const std::string& fallback) {
  if (!has(key)) {
    set_resolved(key, fallback);
    return fallback;
  }
  return required_string(key);
}

std::string RunConfig::required_string(const std::string& key) {
  const json& j = get(key);
  if (!j.is_string()) throw ConfigError(key + " must be a string");
  return j.get<std::string>();
}

fs::path RunConfig::path(const std::string& p) const {
  const fs::path q(p);
  return q.is_absolute() ? q : out_ / q;
}

void RunConfig::reject_unknown() const {
  std::vector<std::string> unknown;
  for (const auto& [k, v] : raw_.items())
    if (!used_.count(k)) unknown.push_back(k);
  if (unknown.empty()) return;
  std::ostringstream os;
  os << command_ << ": unknown config key" << (unknown.size() > 1 ? "s" : "");
  for (std::size_t i = 0; i < unknown.size(); ++i) os << (i ? ", " : " ") << '"' << unknown[i] << '"';
  throw ConfigError(os.str());
}

RunConfig load_config(const std::string& command, const Overrides& ov) {
  json raw = json::object();
  if (ov.config) raw = io::read_json_file(*ov.config);
  if (!raw.is_object()) throw ConfigError("config file must hold a JSON object");
  if (ov.seed) raw["seed"] = *ov.seed;
  if (ov.reps) raw["replications"] = *ov.reps;
  if (ov.kind) raw["kind"] = *ov.kind;
  if (ov.extract_noise) raw["extract_noise"] = true;
  return RunConfig(command, std::move(raw), ov.out);
}

}  // namespace fieldcorr::cli
