#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "fieldcorr/algebra.hpp"
#include "fieldcorr/gaussian.hpp"
#include "fieldcorr/lattice.hpp"

namespace fieldcorr::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Shortest text of 17 significant digits, locale independent.
std::string format_double(double v);

json matrix_to_json(const Matrix& m);  // nested rows
/// Accepts nested rows; `rows`/`cols` check the shape when positive.
Matrix matrix_from_json(const json& j, const std::string& what, Eigen::Index rows = -1, Eigen::Index cols = -1);
MultiIndex index_from_json(const json& j, const std::string& what);

/// {"n":..,"N":..,"mats":[[row-major entries], ...]}. Reading also accepts
/// each matrix as nested rows.
json theta_to_json(const ThetaTuple& theta);
ThetaTuple theta_from_json(const json& j);

json window_to_json(const Window& w);
Window window_from_json(const json& j);

/// Sidecar: {"N","n","lo","hi","clock","seed","history":[...]}.
json field_sidecar(const FieldWindow& f);

/// Header t_1..t_N,x_1..x_n, one row per site in lexicographic order.
void write_field_csv(const fs::path& path, const FieldWindow& f);
/// Writes `path` and its sidecar (same stem, .json extension).
void write_field(const fs::path& path, const FieldWindow& f);

/// Reads a field CSV. The window, clock and metadata come from the sidecar
/// when present; otherwise the window is the bounding box of the rows (which
/// must cover it) and the clock is `fallback_clock`.
FieldWindow read_field(const fs::path& path, Clock fallback_clock = Clock::integer);

fs::path sidecar_path(const fs::path& csv);

/// rep_00000.csv, rep_00001.csv, ... plus manifest.json. `manifest` supplies
/// the configuration keys (seed, H, A, ...); R, window, clock and the file
/// list are filled in.
void write_batch(const fs::path& dir, const SampleBatch& batch, json manifest);
/// Loads a batch from its directory or manifest path.
SampleBatch read_batch(const fs::path& dir_or_manifest, json* manifest_out = nullptr);

json read_json_file(const fs::path& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const fs::path& path, const json& j);

}  // namespace fieldcorr::io
