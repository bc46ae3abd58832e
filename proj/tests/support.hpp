#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/QR>

#include "fieldcorr/algebra.hpp"
#include "fieldcorr/lattice.hpp"

namespace fieldcorr::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
inline std::int64_t uniform_int(Rng& rng, std::int64_t a, std::int64_t b) {
  return std::uniform_int_distribution<std::int64_t>(a, b)(rng);
}

inline Matrix random_orthogonal(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> nd;
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = nd(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ();
}

/// Q diag(lambda_j) Q^T with one shared Q, eigenvalues in [lo, hi].
inline ThetaTuple random_commuting_theta(Rng& rng, Eigen::Index n, std::size_t dim, double lo, double hi) {
  const Matrix q = random_orthogonal(rng, n);
  std::vector<Matrix> mats;
  for (std::size_t j = 0; j < dim; ++j) {
    Vector lam(n);
    for (Eigen::Index k = 0; k < n; ++k) lam(k) = uniform(rng, lo, hi);
    Matrix m = q * lam.asDiagonal() * q.transpose();
    mats.push_back(0.5 * (m + m.transpose()));
  }
  return ThetaTuple(mats);
}

inline FieldWindow random_field(Rng& rng, const Window& w, Eigen::Index n, Clock clock) {
  FieldWindow f(w, n, clock);
  for (auto& v : f.values()) v = uniform(rng, -1.0, 1.0);
  return f;
}

/// Window with extents in [min_ext, max_ext]; when `with_zero`, 0 lies in
/// the window on every axis.
inline Window random_window(Rng& rng, std::size_t dim, std::int64_t min_ext, std::int64_t max_ext,
                            bool with_zero) {
  MultiIndex lo(dim), hi(dim);
  for (std::size_t l = 0; l < dim; ++l) {
    const auto e = uniform_int(rng, min_ext, max_ext);
    lo[l] = with_zero ? -uniform_int(rng, 0, e - 1) : uniform_int(rng, -4, 4);
    hi[l] = lo[l] + e - 1;
  }
  return Window(lo, hi);
}

inline double max_abs_diff(const FieldWindow& a, const FieldWindow& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

/// max |a - b| / max(max |b|, tiny).
inline double rel_diff(const FieldWindow& a, const FieldWindow& b) {
  const double s = b.max_abs();
  return max_abs_diff(a, b) / (s > 0.0 ? s : 1.0);
}

/// Copy of x with every site on a lower face of its window set to zero.
inline FieldWindow zero_lower_faces(FieldWindow x) {
  const Window& w = x.window();
  for (std::size_t i = 0; i < w.volume(); ++i) {
    const MultiIndex t = w.site(i);
    for (std::size_t l = 0; l < w.N(); ++l)
      if (t[l] == w.lo()[l]) {
        x.at_linear(i).setZero();
        break;
      }
  }
  return x;
}

}  // namespace fieldcorr::testing
