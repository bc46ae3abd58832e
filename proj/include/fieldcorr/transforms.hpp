#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fieldcorr/algebra.hpp"
#include "fieldcorr/lattice.hpp"

namespace fieldcorr {

/// Where the infinite backward sum of the inverse increment map is cut.
struct TruncationPolicy {
  double eps = 1e-8;
  /// Per-axis depth; empty means "derive from eps".
  std::vector<std::int64_t> depth;
};

/// Smallest M with 2^N exp(-lambda_min M) <= eps, the same on every axis.
std::vector<std::int64_t> truncation_depth(const ThetaTuple& theta, double eps, const Window& window);

/// 2^N exp(-lambda_min * min_l depth_l): operator-norm weight of the
/// discarded boundary terms relative to the retained scale.
double tail_bound(const ThetaTuple& theta, const std::vector<std::int64_t>& depth);

/// Depth from the policy, or derived from eps when none is given.
std::vector<std::int64_t> resolve_depth(const TruncationPolicy& policy, const ThetaTuple& theta,
                                        const Window& window);

/// Per-site table of exp(sign * t*Theta) over a window.
class ExpTable {
public:
  ExpTable(const ThetaTuple& theta, const Window& window, int sign);

  const Window& window() const noexcept { return window_; }
  Eigen::Index n() const noexcept { return n_; }
  Eigen::Map<const Matrix> at_linear(std::size_t i) const {
    return Eigen::Map<const Matrix>(data_.data() + i * static_cast<std::size_t>(n_ * n_), n_, n_);
  }
  Eigen::Map<const Matrix> at(const MultiIndex& t) const;

private:
  Window window_;
  Eigen::Index n_;
  std::vector<double> data_;
};

/// Y_{e^t} = exp(t*Theta) X_t. Integer clock in, exponential clock out.
FieldWindow lamperti(const FieldWindow& x, const ThetaTuple& theta, const std::string& theta_ref = {});

/// X_t = exp(-t*Theta) Y_{e^t}.
FieldWindow lamperti_inv(const FieldWindow& y, const ThetaTuple& theta,
                         const std::string& theta_ref = {});

/// Increment-reweighting map onto fields vanishing on the hyperplanes
/// {t_l = 0}. The input window must contain 0 on every axis; the output has
/// the same window.
FieldWindow m_forward(const FieldWindow& y, const ThetaTuple& theta, const std::string& theta_ref = {});

/// Truncated inverse: Y_{e^t} = sum_{j = lo - depth}^{t} exp(j*Theta) Delta_j G
/// on out = [G.lo + 1 + depth, G.hi].
FieldWindow m_inverse_truncated(const FieldWindow& g, const ThetaTuple& theta,
                                const TruncationPolicy& policy, const std::string& theta_ref = {});

/// Same with an explicit output window; G must cover [out.lo - depth - 1, out.hi].
FieldWindow m_inverse_truncated(const FieldWindow& g, const ThetaTuple& theta,
                                const TruncationPolicy& policy, const Window& out,
                                const std::string& theta_ref = {});

namespace kernels {

/// Site-wise table(t) * f_t; the table window must contain f's window.
FieldWindow apply_sitewise(const FieldWindow& f, const ExpTable& table, Clock out_clock);

/// m_forward with a precomputed exp(-j*Theta) table covering [lo+1, hi].
FieldWindow m_forward(const FieldWindow& y, const ExpTable& neg);

/// m_inverse with a precomputed exp(j*Theta) table covering
/// [out.lo - depth, out.hi].
FieldWindow m_inverse(const FieldWindow& g, const ExpTable& pos, const Window& out);

}  // namespace kernels

}  // namespace fieldcorr
