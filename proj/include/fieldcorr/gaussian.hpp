#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fieldcorr/algebra.hpp"
#include "fieldcorr/lattice.hpp"

namespace fieldcorr {

inline constexpr std::size_t kDefaultMaxGridPoints = 4096;

/// Hurst multi-indices of n independent sheets: row k is H^{(k)} in (0,1]^N.
class HurstSpec {
public:
  HurstSpec() = default;
  explicit HurstSpec(Matrix h);

  Eigen::Index n() const noexcept { return h_.rows(); }
  std::size_t N() const noexcept { return static_cast<std::size_t>(h_.cols()); }
  const Matrix& matrix() const noexcept { return h_; }
  Vector component(Eigen::Index k) const { return h_.row(k).transpose(); }
  bool has_degenerate_entry() const;

private:
  Matrix h_;
};

/// n x n mixing matrix A of G = A B.
class MixingMatrix {
public:
  MixingMatrix() = default;
  explicit MixingMatrix(Matrix a);
  static MixingMatrix identity(Eigen::Index n) { return MixingMatrix(Matrix::Identity(n, n)); }

  const Matrix& matrix() const noexcept { return a_; }
  Eigen::Index n() const noexcept { return a_.rows(); }

  /// max_j ||A e^{Theta_j} - e^{Theta_j} A|| / (||A|| ||e^{Theta_j}||). Unit
  /// vectors suffice: exp(s*Theta) is a product of their powers.
  double exp_commutation_defect(const ThetaTuple& theta) const;

private:
  Matrix a_;
};

/// Counter-derived normal stream for (seed, replication, component). Streams
/// with different keys are statistically independent, and the values drawn do
/// not depend on the order in which streams are created or consumed.
class SubStream {
public:
  SubStream(std::uint64_t seed, std::uint64_t replication, std::uint64_t component);
  double normal() { return dist_(engine_); }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_;
};

/// 2^{-N} prod_j (|t_j|^{2H_j} + |s_j|^{2H_j} - |t_j - s_j|^{2H_j}).
double fbs_cov(std::span<const double> t, std::span<const double> s, std::span<const double> h);

/// Gram matrix of fbs_cov over the rows of `points` (P x N).
Matrix build_cov_matrix(const Matrix& points, const Vector& h);

/// Covariance of G = A B over `sites` (on `clock`), (k n) x (k n) site-major:
/// block (a, b) is A diag_k(fbs_cov(t_a, t_b, H^{(k)})) A^T.
Matrix sheet_covariance(const MixingMatrix& a, const HurstSpec& h, const std::vector<MultiIndex>& sites,
                        Clock clock);

/// Grid points of a window: t itself (integer clock) or (e^{t_1}, ..., e^{t_N}).
Matrix grid_points(const Window& window, Clock clock);

/// Square-root factor L (L L^T = cov after clipping negative eigenvalues)
/// restricted to the rows with positive variance; zero-variance rows sample
/// exactly zero.
class GaussianFactor {
public:
  explicit GaussianFactor(const Matrix& cov);

  Eigen::Index size() const noexcept { return size_; }
  /// Number of standard normals consumed per sample.
  Eigen::Index draws() const noexcept { return l_.cols(); }
  /// Eigenvalues clipped to zero (rank deficiency indicator).
  Eigen::Index clipped() const noexcept { return clipped_; }

  void sample(SubStream& rng, Eigen::Ref<Vector> out) const;

private:
  Eigen::Index size_ = 0;
  std::vector<Eigen::Index> active_;
  Matrix l_;
  Eigen::Index clipped_ = 0;
};

/// L z for one draw z ~ N(0, I).
Vector sample_gaussian_field(const Matrix& cov, SubStream& rng);

/// Replications of one configuration; fields[r] was drawn from sub-streams
/// keyed by (seed, r, .).
struct SampleBatch {
  std::uint64_t seed = 0;
  std::vector<FieldWindow> fields;
  std::size_t replications() const noexcept { return fields.size(); }
};

/// Factorizes the sheet covariances once and draws G_t = A B_t on a window.
class SheetSampler {
public:
  SheetSampler(const MixingMatrix& a, const HurstSpec& h, const Window& window, Clock clock,
               std::size_t max_points = kDefaultMaxGridPoints);

  const Window& window() const noexcept { return window_; }
  Clock clock() const noexcept { return clock_; }
  const std::vector<std::string>& notes() const noexcept { return notes_; }

  FieldWindow sample(std::uint64_t seed, std::uint64_t replication) const;

private:
  Matrix a_;
  Window window_;
  Clock clock_;
  std::vector<std::size_t> factor_of_;  // component -> index into factors_
  std::vector<GaussianFactor> factors_;
  std::vector<std::string> notes_;
};

FieldWindow sample_multivariate_sheet(const MixingMatrix& a, const HurstSpec& h, const Window& window,
                                      Clock clock, std::uint64_t seed, std::uint64_t replication,
                                      std::size_t max_points = kDefaultMaxGridPoints);

/// R replications in parallel; bit-identical for any thread count.
SampleBatch sample_sheet_batch(const SheetSampler& sampler, std::uint64_t seed, std::size_t replications);

}  // namespace fieldcorr
