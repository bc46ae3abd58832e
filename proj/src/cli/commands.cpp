#include "fieldcorr/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "fieldcorr/ar1.hpp"
#include "fieldcorr/error.hpp"
#include "fieldcorr/fou.hpp"
#include "fieldcorr/parallel.hpp"

namespace fieldcorr::cli {

namespace {

constexpr std::size_t kMaxOffendingListed = 100;

void write_snapshot(const RunConfig& cfg) {
  json snap;
  snap["command"] = cfg.command();
  for (const auto& [k, v] : cfg.resolved().items()) snap[k] = v;
  io::write_json_file(cfg.out() / "resolved_config.json", snap);
}

json z_json(double z) {
  if (std::isfinite(z)) return z;
  return z > 0 ? "inf" : "-inf";
}

std::vector<MultiIndex> index_list(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of integer arrays");
  std::vector<MultiIndex> out;
  for (const auto& e : j) out.push_back(io::index_from_json(e, what));
  return out;
}

ThetaTuple check_theta(const json& check, const RunConfig& cfg, const json& manifest) {
  if (check.contains("theta")) return io::theta_from_json(check["theta"]);
  if (check.contains("theta_file"))
    return io::theta_from_json(io::read_json_file(cfg.path(check["theta_file"].get<std::string>())));
  if (check.contains("theta_from_H")) {
    if (!manifest.contains("H")) throw ConfigError("theta_from_H needs a batch manifest with \"H\"");
    const double f = check["theta_from_H"].get<double>();
    return ThetaTuple::diagonal(f * io::matrix_from_json(manifest["H"], "manifest.H"));
  }
  throw ConfigError("self_similarity check needs \"theta\", \"theta_file\" or \"theta_from_H\"");
}

std::vector<MultiIndex> default_sites(const Window& w, std::size_t cap) {
  std::vector<MultiIndex> out;
  for (std::size_t i = 0; i < w.volume() && out.size() < cap; ++i) out.push_back(w.site(i));
  return out;
}

}  // namespace

json report_to_json(const EnsembleReport& r) {
  json j;
  j["statistic"] = r.statistic;
  j["replications"] = r.replications;
  j["z_max"] = r.z_max;
  j["bonferroni"] = r.bonferroni;
  j["z_threshold"] = r.z_threshold;
  j["max_abs_z"] = z_json(r.max_abs_z());
  j["pass"] = r.pass;
  j["site_pairs"] = r.site_pairs;
  json items = json::array();
  for (const auto& c : r.items) {
    json e;
    e["label"] = c.label;
    e["empirical"] = c.empirical;
    e["reference"] = c.reference;
    e["se"] = c.se;
    e["z"] = z_json(c.z);
    e["degenerate"] = c.degenerate;
    items.push_back(std::move(e));
  }
  j["comparisons"] = std::move(items);
  return j;
}

int cmd_simulate(RunConfig& cfg) {
  const HurstSpec h = cfg.hurst();
  const MixingMatrix a = cfg.mixing(h.n());
  const Window w = cfg.window();
  const Clock clock = cfg.clock(Clock::integer);
  const std::uint64_t seed = cfg.seed();
  const std::size_t reps = cfg.replications(1);
  const std::size_t cap = cfg.max_points();
  cfg.reject_unknown();

  const SheetSampler sampler(a, h, w, clock, cap);
  const SampleBatch batch = sample_sheet_batch(sampler, seed, reps);
  json manifest;
  manifest["command"] = "simulate";
  manifest["H"] = io::matrix_to_json(h.matrix());
  manifest["A"] = io::matrix_to_json(a.matrix());
  manifest["notes"] = sampler.notes();
  io::write_batch(cfg.out(), batch, manifest);
  write_snapshot(cfg);
  return kOk;
}

int cmd_transform(RunConfig& cfg) {
  const std::string input = cfg.required_string("input");
  const Clock fallback = cfg.clock(Clock::integer);
  std::string ref;
  const ThetaTuple theta = cfg.theta(&ref);
  const json& chain = cfg.get("chain");
  if (!chain.is_array() || chain.empty()) throw ConfigError("chain must be a non-empty array of transform names");
  const TruncationPolicy policy = cfg.truncation();
  std::optional<Window> out_window;
  if (cfg.has("out_window")) out_window = io::window_from_json(cfg.get("out_window"));
  const std::string output = cfg.string("output", "transformed.csv");
  cfg.reject_unknown();

  FieldWindow f = io::read_field(cfg.path(input), fallback);
  for (const auto& step : chain) {
    const std::string op = step.get<std::string>();
    if (op == "L") {
      f = lamperti(f, theta, ref);
    } else if (op == "Linv") {
      f = lamperti_inv(f, theta, ref);
    } else if (op == "M") {
      f = m_forward(f, theta, ref);
    } else if (op == "Minv") {
      f = out_window ? m_inverse_truncated(f, theta, policy, *out_window, ref)
                     : m_inverse_truncated(f, theta, policy, ref);
    } else {
      throw ConfigError("unknown transform \"" + op + "\" (expected L, Linv, M or Minv)");
    }
  }
  io::write_field(cfg.path(output), f);
  write_snapshot(cfg);
  return kOk;
}

int cmd_ar1_verify(RunConfig& cfg) {
  const std::string xfile = cfg.required_string("x");
  const Clock fallback = cfg.clock(Clock::integer);
  const ThetaTuple theta = cfg.theta();
  const bool extract = cfg.flag("extract_noise", false);
  const double tol = cfg.number("tolerance", 1e-12);
  if (!(tol >= 0.0)) throw ConfigError("tolerance must be >= 0");
  std::string gfile;
  if (!extract) gfile = cfg.required_string("g");
  const std::string report_name = cfg.string("report", "ar1_report.json");
  cfg.reject_unknown();

  const FieldWindow x = io::read_field(cfg.path(xfile), fallback);
  FieldWindow g;
  if (extract) {
    g = noise_from_stationary(x, theta);
    io::write_field(cfg.out() / "noise.csv", g);
  } else {
    g = io::read_field(cfg.path(gfile), Clock::integer);
  }
  const FieldWindow res = ar1_residual(x, g, theta);
  const ResidualSummary s = summarize_residual(res, x, g, tol);
  const bool pass = s.relative() <= tol;

  json rep;
  rep["max_residual"] = s.max_residual;
  rep["relative_residual"] = s.relative();
  rep["scale"] = s.scale;
  rep["sites"] = s.sites;
  rep["tolerance"] = tol;
  rep["pass"] = pass;
  json off = json::array();
  for (std::size_t i = 0; i < s.offending.size() && i < kMaxOffendingListed; ++i)
    off.push_back(s.offending[i].vec());
  rep["offending_sites"] = std::move(off);
  rep["offending_count"] = s.offending.size();
  io::write_json_file(cfg.path(report_name), rep);
  write_snapshot(cfg);
  if (!pass) {
    std::cerr << "ar1-verify: max relative residual " << s.relative() << " exceeds tolerance " << tol << " at "
              << s.offending.size() << " site(s)";
    if (!s.offending.empty()) std::cerr << ", first " << s.offending.front().str();
    std::cerr << '\n';
    return kVerifyFailed;
  }
  return kOk;
}

int cmd_fou(RunConfig& cfg) {
  FouConfig fc;
  fc.kind = parse_fou_kind(cfg.required_string("kind"));
  fc.hurst = cfg.hurst();
  fc.mixing = cfg.mixing(fc.hurst.n());
  fc.window = cfg.window();
  std::string ref;
  if (cfg.has_theta()) fc.theta = cfg.theta(&ref);
  fc.policy = cfg.truncation();
  fc.seed = cfg.seed();
  fc.replications = cfg.replications(1);
  fc.max_points = cfg.max_points();
  cfg.reject_unknown();

  const FouGenerator gen(fc);
  const SampleBatch batch = gen.batch();
  json manifest;
  manifest["command"] = "fou";
  manifest["kind"] = fou_kind_name(fc.kind);
  manifest["H"] = io::matrix_to_json(fc.hurst.matrix());
  manifest["A"] = io::matrix_to_json(fc.mixing.matrix());
  manifest["theta"] = io::theta_to_json(gen.theta());
  manifest["depth"] = gen.depth();
  manifest["tail_bound"] = gen.tail_bound();
  manifest["notes"] = gen.notes();
  io::write_batch(cfg.out(), batch, manifest);
  write_snapshot(cfg);
  return kOk;
}

int cmd_stats(RunConfig& cfg) {
  const std::string batch_path = cfg.required_string("batch");
  CheckOptions opt;
  opt.z_max = cfg.number("z_max", 3.0);
  opt.bonferroni = cfg.flag("bonferroni", true);
  opt.groups = static_cast<std::size_t>(cfg.number("groups", static_cast<double>(kDefaultJackknifeGroups)));
  opt.max_sites = static_cast<std::size_t>(cfg.number("max_sites", 16));
  if (!(opt.z_max > 0.0) || opt.groups == 1 || opt.max_sites < 1)
    throw ConfigError("need z_max > 0, groups 0 (delete-one) or >= 2, and max_sites >= 1");
  json checks = json::array({json{{"type", "stationarity"}}});
  if (cfg.has("checks")) checks = cfg.get("checks");
  else cfg.set_resolved("checks", checks);
  if (!checks.is_array() || checks.empty()) throw ConfigError("checks must be a non-empty array");
  std::string zcsv;
  if (cfg.has("zscores_csv")) zcsv = cfg.required_string("zscores_csv");
  const std::string report_name = cfg.string("report", "stats_report.json");
  cfg.reject_unknown();

  json manifest;
  const SampleBatch batch = io::read_batch(cfg.path(batch_path), &manifest);
  if (batch.replications() < 2) throw ConfigError("stats needs a batch with at least 2 replications");
  const Window& w = batch.fields.front().window();

  std::vector<EnsembleReport> reports;
  for (const auto& c : checks) {
    if (!c.is_object() || !c.contains("type")) throw ConfigError("each check needs a \"type\"");
    const std::string type = c["type"].get<std::string>();
    auto shifts = [&] {
      return c.contains("shifts") ? index_list(c["shifts"], "shifts") : unit_shifts(w.N());
    };
    if (type == "stationarity") {
      reports.push_back(stationarity_check(batch, shifts(), opt));
    } else if (type == "increment_stationarity") {
      reports.push_back(increment_stationarity_check(batch, shifts(), opt));
    } else if (type == "self_similarity") {
      if (!c.contains("s")) throw ConfigError("self_similarity check needs \"s\"");
      reports.push_back(self_similarity_check(batch, io::index_from_json(c["s"], "s"), check_theta(c, cfg, manifest), opt));
    } else if (type == "covariance") {
      if (!manifest.contains("H") || !manifest.contains("A") || manifest.value("command", "") != "simulate")
        throw ConfigError("covariance check needs a batch written by simulate (manifest H and A)");
      const HurstSpec h(io::matrix_from_json(manifest["H"], "manifest.H"));
      const MixingMatrix a(io::matrix_from_json(manifest["A"], "manifest.A"));
      const auto sites = c.contains("sites") ? index_list(c["sites"], "sites") : default_sites(w, opt.max_sites);
      const Clock clock = batch.fields.front().clock();
      reports.push_back(covariance_check(batch, sites, sheet_covariance(a, h, sites, clock), opt));
    } else {
      throw ConfigError("unknown check type \"" + type +
                        "\" (expected stationarity, increment_stationarity, self_similarity or covariance)");
    }
  }

  json out;
  out["batch"] = batch_path;
  out["R"] = batch.replications();
  bool pass = true;
  json arr = json::array();
  for (const auto& r : reports) {
    pass = pass && r.pass;
    arr.push_back(report_to_json(r));
  }
  out["pass"] = pass;
  out["reports"] = std::move(arr);
  io::write_json_file(cfg.path(report_name), out);

  if (!zcsv.empty()) {
    std::ofstream os(cfg.path(zcsv), std::ios::binary);
    if (!os) throw ConfigError("cannot open " + cfg.path(zcsv).string());
    os << "statistic,label,empirical,reference,se,z\n";
    for (const auto& r : reports)
      for (const auto& it : r.items)
        os << r.statistic << ',' << it.label << ',' << io::format_double(it.empirical) << ','
           << io::format_double(it.reference) << ',' << io::format_double(it.se) << ','
           << io::format_double(it.z) << '\n';
  }
  write_snapshot(cfg);
  if (!pass) {
    for (const auto& r : reports)
      if (!r.pass)
        std::cerr << "stats: " << r.statistic << " failed, max |z| " << r.max_abs_z() << " > " << r.z_threshold
                  << '\n';
    return kVerifyFailed;
  }
  return kOk;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Transformations between stationary, self-similar and stationary-increment fields"};
  app.require_subcommand(1);
  Overrides ov;
  std::string config_path, out_dir = ".";
  int threads = 0;
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::string kind;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_dir, "output directory; relative config paths resolve against it");
    sub->add_option("--threads", threads, "worker threads (default: $FIELD_CORRESPOND_THREADS or 1)")
        ->check(CLI::PositiveNumber);
  };
  auto sim = app.add_subcommand("simulate", "sample fractional Brownian sheets G = A B");
  auto tr = app.add_subcommand("transform", "apply a chain of L, Linv, M, Minv to a field");
  auto ar = app.add_subcommand("ar1-verify", "check the AR(1) identity for X and G");
  auto fo = app.add_subcommand("fou", "fractional Ornstein-Uhlenbeck fields");
  auto st = app.add_subcommand("stats", "moment-based distributional checks on a batch");
  for (auto* s : {sim, tr, ar, fo, st}) common(s);
  for (auto* s : {sim, fo}) {
    s->add_option("--seed", seed, "master seed");
    s->add_option("--reps", reps, "replications")->check(CLI::PositiveNumber);
  }
  fo->add_option("--kind", kind, "first or second");
  ar->add_flag("--extract-noise", ov.extract_noise, "derive G = M(L(X)) instead of reading it");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    auto given = [sub](const char* name) {
      const CLI::Option* o = sub->get_option_no_throw(name);
      return o != nullptr && o->count() > 0;
    };
    if (given("--config")) ov.config = config_path;
    ov.out = out_dir;
    if (given("--seed")) ov.seed = seed;
    if (given("--reps")) ov.reps = reps;
    if (given("--kind")) ov.kind = kind;
    if (given("--threads")) ov.threads = threads;
    set_threads(resolve_threads(ov.threads));
    fs::create_directories(ov.out);
    RunConfig cfg = load_config(command, ov);
    if (command == "simulate") return cmd_simulate(cfg);
    if (command == "transform") return cmd_transform(cfg);
    if (command == "ar1-verify") return cmd_ar1_verify(cfg);
    if (command == "fou") return cmd_fou(cfg);
    return cmd_stats(cfg);
  } catch (const ConfigError& e) {
    std::cerr << command << ": config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << command << ": config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kConfigError;
  } catch (const WindowError& e) {
    std::cerr << command << ": window error: " << e.what() << '\n';
    return kNumericError;
  } catch (const NumericError& e) {
    std::cerr << command << ": numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << command << ": error: " << e.what() << '\n';
    return kNumericError;
  }
}

}  // namespace fieldcorr::cli
