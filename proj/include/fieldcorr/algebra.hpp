#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fieldcorr/multi_index.hpp"

namespace fieldcorr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kCommuteTol = 1e-10;

/// Induced l2 norm, sqrt(lambda_max(M^T M)).
double operator_norm(const Matrix& m);

/// An n x n real symmetric matrix. Construction rejects inputs whose
/// asymmetry exceeds kSymmetryTol relative to the operator norm, then stores
/// the exact symmetric part.
class SymMatrix {
public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix zero(Eigen::Index n) { return symmetrized(Matrix::Zero(n, n)); }
  static SymMatrix identity(Eigen::Index n) { return symmetrized(Matrix::Identity(n, n)); }
  /// (m + m^T) / 2 without the tolerance check; for results that are
  /// symmetric up to rounding by construction.
  static SymMatrix symmetrized(const Matrix& m);

  Eigen::Index n() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  operator const Matrix&() const noexcept { return m_; }

  /// Sorted ascending eigenvalues.
  Vector eigenvalues() const;
  double norm() const;

private:
  Matrix m_;
};

struct CommutationReport {
  bool commuting = true;
  double max_defect = 0.0;
};

/// The self-similarity index: N symmetric positive-definite n x n matrices.
/// Pairwise commutation is measured at construction but not required; the
/// transforms that need it call require_commuting().
class ThetaTuple {
public:
  ThetaTuple() = default;
  explicit ThetaTuple(const std::vector<Matrix>& mats);

  /// Theta_j = diag(h_{j}^{(1)}, ..., h_{j}^{(n)}) from an n x N array.
  static ThetaTuple diagonal(const Matrix& h_by_component);

  Eigen::Index n() const noexcept { return n_; }
  std::size_t N() const noexcept { return mats_.size(); }
  const SymMatrix& operator[](std::size_t j) const { return mats_[j]; }
  const std::vector<SymMatrix>& mats() const noexcept { return mats_; }

  bool commuting() const noexcept { return comm_.commuting; }
  const CommutationReport& commutation() const noexcept { return comm_; }

  /// Throws HypothesisError carrying the commutation defect.
  void require_commuting(const char* who) const;

private:
  Eigen::Index n_ = 0;
  std::vector<SymMatrix> mats_;
  CommutationReport comm_;
};

/// t*Theta = sum_j t_j Theta_j.
SymMatrix star_index(std::span<const std::int64_t> t, const ThetaTuple& theta);
inline SymMatrix star_index(const MultiIndex& t, const ThetaTuple& theta) {
  return star_index(t.coords(), theta);
}

/// Theta * X = sum_j C_j v_j.
Vector star_apply(std::span<const Matrix> coeffs, std::span<const Vector> vecs);

/// Q diag(exp(lambda)) Q^T from a symmetric eigendecomposition.
SymMatrix mat_exp_sym(const SymMatrix& a);

CommutationReport check_commuting(const ThetaTuple& theta);

/// Smallest eigenvalue over all Theta_j.
double min_eigenvalue(const ThetaTuple& theta);

}  // namespace fieldcorr
