#include "fieldcorr/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fieldcorr/error.hpp"

namespace fieldcorr {

namespace {

bool is_diagonal(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

}  // namespace

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.transpose() * m, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "symmetric matrix must be square, got " << m.rows() << "x" << m.cols();
    throw ConfigError(os.str());
  }
  if (!m.allFinite()) throw ConfigError("symmetric matrix has non-finite entries");
  const double asym = operator_norm(m - m.transpose());
  const double scale = operator_norm(m);
  if (asym > kSymmetryTol * scale) {
    std::ostringstream os;
    os << "matrix is not symmetric: ||A - A^T|| = " << asym << " exceeds " << kSymmetryTol
       << " * ||A|| = " << kSymmetryTol * scale;
    throw HypothesisError(os.str(), asym / (scale > 0 ? scale : 1.0));
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  SymMatrix s;
  s.m_ = 0.5 * (m + m.transpose());
  return s;
}

Vector SymMatrix::eigenvalues() const {
  if (is_diagonal(m_)) {
    Vector d = m_.diagonal();
    std::sort(d.begin(), d.end());
    return d;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double SymMatrix::norm() const {
  if (m_.size() == 0) return 0.0;
  return eigenvalues().cwiseAbs().maxCoeff();
}

ThetaTuple::ThetaTuple(const std::vector<Matrix>& mats) {
  if (mats.empty()) throw ConfigError("theta tuple needs at least one matrix (N >= 1)");
  n_ = mats.front().rows();
  if (n_ == 0) throw ConfigError("theta matrices must be at least 1x1");
  mats_.reserve(mats.size());
  for (std::size_t j = 0; j < mats.size(); ++j) {
    if (mats[j].rows() != n_ || mats[j].cols() != n_) {
      std::ostringstream os;
      os << "theta[" << j << "] is " << mats[j].rows() << "x" << mats[j].cols() << ", expected "
         << n_ << "x" << n_;
      throw ConfigError(os.str());
    }
    try {
      mats_.emplace_back(mats[j]);
    } catch (const HypothesisError& e) {
      std::ostringstream os;
      os << "theta[" << j << "]: " << e.what();
      throw HypothesisError(os.str(), e.defect());
    }
    const double lmin = mats_.back().eigenvalues()(0);
    if (!(lmin > 0.0)) {
      std::ostringstream os;
      os << "theta[" << j << "] is not positive definite (smallest eigenvalue " << lmin << ")";
      throw HypothesisError(os.str(), lmin);
    }
  }
  comm_ = check_commuting(*this);
}

ThetaTuple ThetaTuple::diagonal(const Matrix& h) {
  std::vector<Matrix> mats;
  for (Eigen::Index j = 0; j < h.cols(); ++j) mats.emplace_back(h.col(j).asDiagonal());
  return ThetaTuple(mats);
}

void ThetaTuple::require_commuting(const char* who) const {
  if (comm_.commuting) return;
  std::ostringstream os;
  os << who << " requires pairwise commuting Theta_j; relative commutator defect "
     << comm_.max_defect << " exceeds " << kCommuteTol;
  throw HypothesisError(os.str(), comm_.max_defect);
}

SymMatrix star_index(std::span<const std::int64_t> t, const ThetaTuple& theta) {
  if (t.size() != theta.N()) {
    std::ostringstream os;
    os << "star_index: multi-index has length " << t.size() << ", theta has N = " << theta.N();
    throw ConfigError(os.str());
  }
  Matrix acc = Matrix::Zero(theta.n(), theta.n());
  for (std::size_t j = 0; j < t.size(); ++j)
    if (t[j] != 0) acc += static_cast<double>(t[j]) * theta[j].matrix();
  return SymMatrix::symmetrized(acc);
}

Vector star_apply(std::span<const Matrix> coeffs, std::span<const Vector> vecs) {
  if (coeffs.size() != vecs.size()) {
    std::ostringstream os;
    os << "star_apply: " << coeffs.size() << " coefficients but " << vecs.size() << " vectors";
    throw ConfigError(os.str());
  }
  if (coeffs.empty()) throw ConfigError("star_apply: empty tuple");
  const Eigen::Index n = vecs.front().size();
  Vector acc = Vector::Zero(n);
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j].rows() != n || coeffs[j].cols() != n || vecs[j].size() != n)
      throw ConfigError("star_apply: inconsistent state dimension at position " +
                        std::to_string(j));
    acc.noalias() += coeffs[j] * vecs[j];
  }
  return acc;
}

SymMatrix mat_exp_sym(const SymMatrix& a) {
  const Matrix& m = a.matrix();
  if (is_diagonal(m)) {
    Matrix d = Matrix::Zero(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) d(i, i) = std::exp(m(i, i));
    if (!d.allFinite()) throw NumericError("mat_exp_sym: exponential overflows double range");
    return SymMatrix::symmetrized(d);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw NumericError("mat_exp_sym: eigendecomposition failed");
  const Vector ex = es.eigenvalues().array().exp();
  if (!ex.allFinite()) throw NumericError("mat_exp_sym: exponential overflows double range");
  const Matrix& q = es.eigenvectors();
  return SymMatrix::symmetrized(q * ex.asDiagonal() * q.transpose());
}

CommutationReport check_commuting(const ThetaTuple& theta) {
  CommutationReport r;
  const auto& ms = theta.mats();
  for (std::size_t j = 0; j < ms.size(); ++j) {
    for (std::size_t l = j + 1; l < ms.size(); ++l) {
      const Matrix& a = ms[j].matrix();
      const Matrix& b = ms[l].matrix();
      const double denom = ms[j].norm() * ms[l].norm();
      const double defect = operator_norm(a * b - b * a) / denom;
      r.max_defect = std::max(r.max_defect, defect);
    }
  }
  r.commuting = r.max_defect <= kCommuteTol;
  return r;
}

double min_eigenvalue(const ThetaTuple& theta) {
  double lmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < theta.N(); ++j) {
    const double l = theta[j].eigenvalues()(0);
    if (!(l > 0.0))
      throw HypothesisError("theta[" + std::to_string(j) + "] is not positive definite", l);
    lmin = std::min(lmin, l);
  }
  return lmin;
}

}  // namespace fieldcorr
