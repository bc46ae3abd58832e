#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include "fieldcorr/fou.hpp"
#include "fieldcorr/gaussian.hpp"
#include "fieldcorr/io.hpp"
#include "fieldcorr/transforms.hpp"

namespace fieldcorr::cli {

using io::json;
namespace fs = std::filesystem;

/// Command-line overrides shared by all subcommands.
struct Overrides {
  std::optional<fs::path> config;
  fs::path out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<std::string> kind;
  std::optional<int> threads;
  bool extract_noise = false;
};

/// A config object being consumed: every key read is recorded so unknown
/// keys can be rejected, and resolved values are collected for the snapshot.
class RunConfig {
public:
  RunConfig(std::string command, json raw, fs::path out);

  const std::string& command() const noexcept { return command_; }
  const fs::path& out() const noexcept { return out_; }
  const json& raw() const noexcept { return raw_; }
  const json& resolved() const noexcept { return resolved_; }

  bool has(const std::string& key) const;
  const json& get(const std::string& key);
  /// Records a defaulted or derived value in the snapshot.
  void set_resolved(const std::string& key, json value);

  std::uint64_t seed();
  std::size_t replications(std::size_t fallback);
  Window window();
  HurstSpec hurst();
  MixingMatrix mixing(Eigen::Index n);
  /// Inline "theta" object or "theta_file" (relative to out). Returns the
  /// reference recorded in transform metadata.
  ThetaTuple theta(std::string* ref = nullptr);
  bool has_theta() const { return has("theta") || has("theta_file"); }
  TruncationPolicy truncation();
  Clock clock(Clock fallback);
  std::size_t max_points();
  double number(const std::string& key, double fallback);
  bool flag(const std::string& key, bool fallback);
  std::string string(const std::string& key, const std::string& fallback);
  std::string required_string(const std::string& key);

  /// Path given relative to the output directory.
  fs::path path(const std::string& p) const;

  /// Throws ConfigError naming any key that was never read.
  void reject_unknown() const;

private:
  std::string command_;
  json raw_;
  fs::path out_;
  json resolved_ = json::object();
  std::set<std::string> used_;
};

/// Reads --config (if any), applies flag overrides and returns the config.
RunConfig load_config(const std::string& command, const Overrides& ov);

}  // namespace fieldcorr::cli
