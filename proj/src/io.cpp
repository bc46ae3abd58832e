#include "fieldcorr/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fieldcorr/error.hpp"

namespace fieldcorr::io {

namespace {

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing key \"" + key + "\"");
  return j.at(key);
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + ": expected a number, got " + j.dump());
  return j.get<double>();
}

std::int64_t integer(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ConfigError(what + ": expected an integer, got " + j.dump());
  return j.get<std::int64_t>();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const fs::path& path, std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\r')) --e;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e)
    throw ConfigError(path.string() + ":" + std::to_string(line) + ": cannot parse \"" + s + "\" as a number");
  return v;
}

std::string rep_name(std::size_t r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rep_%05zu.csv", r);
  return buf;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& what, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a non-empty array of rows");
  const auto r = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw ConfigError(what + ": rows must be non-empty arrays");
  const auto c = static_cast<Eigen::Index>(j[0].size());
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c)
      throw ConfigError(what + ": ragged rows");
    for (Eigen::Index k = 0; k < c; ++k)
      m(i, k) = number(row[static_cast<std::size_t>(k)], what + "[" + std::to_string(i) + "]");
  }
  if ((rows > 0 && r != rows) || (cols > 0 && c != cols))
    throw ConfigError(what + ": expected shape " + std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                      std::to_string(r) + "x" + std::to_string(c));
  return m;
}

MultiIndex index_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a non-empty integer array");
  std::vector<std::int64_t> c;
  for (const auto& v : j) c.push_back(integer(v, what));
  return MultiIndex(std::move(c));
}

json theta_to_json(const ThetaTuple& theta) {
  json mats = json::array();
  for (const auto& m : theta.mats()) {
    json flat = json::array();
    const Matrix& a = m.matrix();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index k = 0; k < a.cols(); ++k) flat.push_back(a(i, k));
    mats.push_back(std::move(flat));
  }
  json j;
  j["n"] = theta.n();
  j["N"] = theta.N();
  j["mats"] = std::move(mats);
  return j;
}

ThetaTuple theta_from_json(const json& j) {
  const std::string where = "theta";
  const auto n = integer(require(j, "n", where), "theta.n");
  const auto dim = integer(require(j, "N", where), "theta.N");
  if (n < 1 || dim < 1) throw ConfigError("theta: n and N must be >= 1");
  const json& mats = require(j, "mats", where);
  if (!mats.is_array() || static_cast<std::int64_t>(mats.size()) != dim)
    throw ConfigError("theta.mats must hold N = " + std::to_string(dim) + " matrices");
  std::vector<Matrix> out;
  for (std::size_t q = 0; q < mats.size(); ++q) {
    const json& m = mats[q];
    const std::string what = "theta.mats[" + std::to_string(q) + "]";
    if (m.is_array() && !m.empty() && m[0].is_array()) {
      out.push_back(matrix_from_json(m, what, n, n));
      continue;
    }
    if (!m.is_array() || static_cast<std::int64_t>(m.size()) != n * n)
      throw ConfigError(what + ": expected " + std::to_string(n * n) + " row-major entries");
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < n; ++k) a(i, k) = number(m[static_cast<std::size_t>(i * n + k)], what);
    out.push_back(std::move(a));
  }
  return ThetaTuple(out);
}

json window_to_json(const Window& w) {
  json j;
  j["lo"] = w.lo().vec();
  j["hi"] = w.hi().vec();
  return j;
}

Window window_from_json(const json& j) {
  const MultiIndex lo = index_from_json(require(j, "lo", "window"), "window.lo");
  const MultiIndex hi = index_from_json(require(j, "hi", "window"), "window.hi");
  return Window(lo, hi);
}

json field_sidecar(const FieldWindow& f) {
  json j;
  j["N"] = f.N();
  j["n"] = f.n();
  j["lo"] = f.window().lo().vec();
  j["hi"] = f.window().hi().vec();
  j["clock"] = clock_name(f.clock());
  j["seed"] = f.meta.seed ? json(*f.meta.seed) : json(nullptr);
  json hist = json::array();
  for (const auto& h : f.meta.history) {
    json e;
    e["transform"] = h.transform;
    e["theta_ref"] = h.theta_ref;
    e["depth"] = h.depth;
    e["tail_bound"] = h.tail_bound;
    hist.push_back(std::move(e));
  }
  j["history"] = std::move(hist);
  return j;
}

fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  return p.replace_extension(".json");
}

void write_field_csv(const fs::path& path, const FieldWindow& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  const std::size_t dim = f.N();
  for (std::size_t l = 0; l < dim; ++l) os << "t_" << (l + 1) << ',';
  for (Eigen::Index k = 0; k < f.n(); ++k) os << "x_" << (k + 1) << (k + 1 < f.n() ? "," : "\n");
  std::vector<std::int64_t> t(dim);
  std::string line;
  for (std::size_t i = 0; i < f.window().volume(); ++i) {
    f.window().site_into(i, t);
    line.clear();
    for (std::size_t l = 0; l < dim; ++l) {
      line += std::to_string(t[l]);
      line += ',';
    }
    const auto v = f.at_linear(i);
    for (Eigen::Index k = 0; k < f.n(); ++k) {
      line += format_double(v(k));
      line += k + 1 < f.n() ? ',' : '\n';
    }
    os << line;
  }
  if (!os) throw ConfigError("write to " + path.string() + " failed");
}

void write_field(const fs::path& path, const FieldWindow& f) {
  write_field_csv(path, f);
  write_json_file(sidecar_path(path), field_sidecar(f));
}

FieldWindow read_field(const fs::path& path, Clock fallback_clock) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open field file " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(path.string() + ": empty file");
  const auto header = split(line);
  std::size_t dim = 0, n = 0;
  for (const auto& h : header) {
    std::string c = h;
    if (!c.empty() && c.back() == '\r') c.pop_back();
    if (c.rfind("t_", 0) == 0) {
      if (n > 0) throw ConfigError(path.string() + ": t_ columns must precede x_ columns");
      ++dim;
    } else if (c.rfind("x_", 0) == 0) {
      ++n;
    } else {
      throw ConfigError(path.string() + ": unexpected header column \"" + c + "\"");
    }
  }
  if (dim == 0 || n == 0) throw ConfigError(path.string() + ": header needs t_ and x_ columns");

  std::map<std::vector<std::int64_t>, std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != dim + n)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(dim + n) + " columns");
    std::vector<std::int64_t> t(dim);
    for (std::size_t l = 0; l < dim; ++l) {
      const double c = parse_double(cells[l], path, lineno);
      if (c != std::floor(c)) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": non-integer site");
      t[l] = static_cast<std::int64_t>(c);
    }
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = parse_double(cells[dim + k], path, lineno);
    if (!rows.emplace(std::move(t), std::move(v)).second)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": duplicate site");
  }
  if (rows.empty()) throw ConfigError(path.string() + ": no data rows");

  Clock clock = fallback_clock;
  FieldMeta meta;
  std::optional<Window> w;
  const fs::path side = sidecar_path(path);
  if (fs::exists(side)) {
    const json j = read_json_file(side);
    if (integer(require(j, "N", side.string()), "N") != static_cast<std::int64_t>(dim) ||
        integer(require(j, "n", side.string()), "n") != static_cast<std::int64_t>(n))
      throw ConfigError(side.string() + ": N/n disagree with " + path.string());
    w = window_from_json(j);
    clock = parse_clock(require(j, "clock", side.string()).get<std::string>());
    if (j.contains("seed") && !j["seed"].is_null()) meta.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("history"))
      for (const auto& h : j["history"]) {
        TransformRecord r;
        r.transform = h.value("transform", "");
        r.theta_ref = h.value("theta_ref", "");
        if (h.contains("depth")) r.depth = h["depth"].get<std::vector<std::int64_t>>();
        r.tail_bound = h.value("tail_bound", 0.0);
        meta.history.push_back(std::move(r));
      }
  } else {
    MultiIndex lo(rows.begin()->first), hi(rows.begin()->first);
    for (const auto& [t, v] : rows)
      for (std::size_t l = 0; l < dim; ++l) {
        lo[l] = std::min(lo[l], t[l]);
        hi[l] = std::max(hi[l], t[l]);
      }
    w = Window(lo, hi);
  }
  if (rows.size() != w->volume())
    throw ConfigError(path.string() + ": " + std::to_string(rows.size()) + " rows do not cover window " +
                      w->str() + " (" + std::to_string(w->volume()) + " sites)");
  std::vector<double> values;
  values.reserve(w->volume() * n);
  for (const auto& [t, v] : rows) {
    if (!w->contains(MultiIndex(t))) throw ConfigError(path.string() + ": site outside window " + w->str());
    values.insert(values.end(), v.begin(), v.end());
  }
  FieldWindow f(*w, static_cast<Eigen::Index>(n), clock, std::move(values));
  f.meta = std::move(meta);
  return f;
}

void write_batch(const fs::path& dir, const SampleBatch& batch, json manifest) {
  if (batch.fields.empty()) throw ConfigError("cannot write an empty batch");
  fs::create_directories(dir);
  json files = json::array();
  for (std::size_t r = 0; r < batch.fields.size(); ++r) {
    const std::string name = rep_name(r);
    write_field_csv(dir / name, batch.fields[r]);
    files.push_back(name);
  }
  const FieldWindow& f0 = batch.fields.front();
  manifest["seed"] = batch.seed;
  manifest["R"] = batch.fields.size();
  manifest["N"] = f0.N();
  manifest["n"] = f0.n();
  manifest["window"] = window_to_json(f0.window());
  manifest["clock"] = clock_name(f0.clock());
  manifest["files"] = std::move(files);
  write_json_file(dir / "manifest.json", manifest);
}

SampleBatch read_batch(const fs::path& dir_or_manifest, json* manifest_out) {
  const fs::path manifest_path =
      fs::is_directory(dir_or_manifest) ? dir_or_manifest / "manifest.json" : dir_or_manifest;
  const fs::path dir = manifest_path.parent_path();
  const json m = read_json_file(manifest_path);
  const Window w = window_from_json(require(m, "window", manifest_path.string()));
  const Clock clock = parse_clock(require(m, "clock", manifest_path.string()).get<std::string>());
  const json& files = require(m, "files", manifest_path.string());
  SampleBatch b;
  b.seed = require(m, "seed", manifest_path.string()).get<std::uint64_t>();
  for (const auto& f : files) {
    FieldWindow fw = read_field(dir / f.get<std::string>(), clock);
    if (!(fw.window() == w))
      throw ConfigError(f.get<std::string>() + ": window " + fw.window().str() + " differs from manifest " + w.str());
    fw.meta.seed = b.seed;
    b.fields.push_back(std::move(fw));
  }
  if (manifest_out) *manifest_out = m;
  return b;
}

json read_json_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw ConfigError("write to " + path.string() + " failed");
}

}  // namespace fieldcorr::io
