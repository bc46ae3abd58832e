#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fieldcorr/algebra.hpp"
#include "fieldcorr/gaussian.hpp"
#include "fieldcorr/lattice.hpp"

namespace fieldcorr {

/// 0 selects the delete-one jackknife, which does not depend on the order of
/// the replications.
inline constexpr std::size_t kDefaultJackknifeGroups = 0;

/// Grouped (delete-a-group) jackknife of a statistic of the sample mean and
/// covariance of the rows of `samples` (R x q). `groups` contiguous blocks of
/// rows are left out in turn; 0 means one row per group.
struct JackknifeResult {
  Vector estimate;
  Vector se;
};
using MomentStatistic = std::function<Vector(const Vector& mean, const Matrix& cov)>;
JackknifeResult jackknife_moments(const Matrix& samples, const MomentStatistic& stat,
                                  std::size_t groups = kDefaultJackknifeGroups);

/// Stacked values of `sites` (n components each) per replication: R x (k n).
Matrix gather(const SampleBatch& batch, const std::vector<MultiIndex>& sites);

struct MomentEstimate {
  std::vector<MultiIndex> sites;
  Eigen::Index n = 0;
  Vector mean;     // k n entries, site-major
  Matrix cov;      // (k n) x (k n)
  Vector se_mean;
  Matrix se_cov;
  bool degenerate = false;  // every standard error vanished
};

MomentEstimate empirical_moments(const SampleBatch& batch, const std::vector<MultiIndex>& sites,
                                 std::size_t groups = kDefaultJackknifeGroups);

struct Comparison {
  std::string label;
  double empirical = 0.0;  // moment on the shifted / tested side
  double reference = 0.0;  // moment on the base side
  double se = 0.0;         // jackknife standard error of the difference
  double z = 0.0;
  bool degenerate = false;
};

struct EnsembleReport {
  std::string statistic;
  std::vector<std::string> site_pairs;
  std::vector<Comparison> items;
  double z_max = 3.0;
  double z_threshold = 3.0;  // after Bonferroni correction
  bool bonferroni = true;
  std::size_t replications = 0;
  bool pass = true;

  double max_abs_z() const;
};

struct CheckOptions {
  double z_max = 3.0;
  bool bonferroni = true;
  std::size_t groups = kDefaultJackknifeGroups;
  /// Cap on the number of base sites compared per shift (lexicographic first).
  std::size_t max_sites = 16;
};

/// |z| threshold equivalent to z_max after splitting its two-sided level over
/// `comparisons` tests.
double bonferroni_threshold(double z_max, std::size_t comparisons);

/// Paired two-sample comparison of means and covariances of the columns of
/// `reference` and `tested` (both R x p, rows are replications).
std::vector<Comparison> compare_moments(const Matrix& reference, const Matrix& tested,
                                        const std::vector<std::string>& names, std::size_t groups);

/// Finalizes z_threshold and pass from the items.
void finalize_report(EnsembleReport& r, const CheckOptions& opt);

EnsembleReport stationarity_check(const SampleBatch& batch, const std::vector<MultiIndex>& shifts,
                                  const CheckOptions& opt = {});

EnsembleReport self_similarity_check(const SampleBatch& batch, const MultiIndex& s, const ThetaTuple& theta,
                                     const CheckOptions& opt = {});

EnsembleReport increment_stationarity_check(const SampleBatch& batch, const std::vector<MultiIndex>& shifts,
                                            const CheckOptions& opt = {});

/// Empirical mean and covariance at `sites` against a known law (zero mean,
/// covariance `reference_cov`, (k n) x (k n) site-major).
EnsembleReport covariance_check(const SampleBatch& batch, const std::vector<MultiIndex>& sites,
                                const Matrix& reference_cov, const CheckOptions& opt = {});

/// Unit vectors e_1 .. e_N.
std::vector<MultiIndex> unit_shifts(std::size_t dim);

}  // namespace fieldcorr
