#pragma once

#include <vector>

#include "fieldcorr/algebra.hpp"
#include "fieldcorr/lattice.hpp"
#include "fieldcorr/transforms.hpp"

namespace fieldcorr {

/// The generalized AR(1) equation X_t = drift(X)_t + Delta_t G with noise G.
struct Ar1System {
  ThetaTuple theta;
  FieldWindow g;
  TruncationPolicy policy;
};

/// sum over i in {0,1}^N \ {0} of (-1)^{1+|i|} exp(-i*Theta) X_{t-i}.
Vector ar1_drift(const FieldWindow& x, const MultiIndex& t, const ThetaTuple& theta);

/// R_t = X_t - drift(X)_t - Delta_t G on the interior of the common window.
FieldWindow ar1_residual(const FieldWindow& x, const FieldWindow& g, const ThetaTuple& theta);

struct ResidualSummary {
  double max_residual = 0.0;  // max_t ||R_t||_inf
  double scale = 1.0;         // max(||X||_inf, ||Delta G||_inf), 1 if both vanish
  std::size_t sites = 0;
  std::vector<MultiIndex> offending;  // sites with ||R_t|| > tolerance * scale

  double relative() const { return max_residual / scale; }
};

ResidualSummary summarize_residual(const FieldWindow& residual, const FieldWindow& x,
                                   const FieldWindow& g, double tolerance);

/// X = lamperti_inv(m_inverse_truncated(G)) on out_window.
FieldWindow stationary_solution(const Ar1System& sys, const Window& out_window);

/// G = m_forward(lamperti(X)).
FieldWindow noise_from_stationary(const FieldWindow& x, const ThetaTuple& theta);

/// Reusable solver for many noise fields on one window: the exponential
/// tables are computed once.
class StationarySolver {
public:
  StationarySolver(const ThetaTuple& theta, const TruncationPolicy& policy, const Window& out);

  /// Window the noise must cover.
  const Window& noise_window() const noexcept { return need_; }
  const Window& out_window() const noexcept { return out_; }
  const std::vector<std::int64_t>& depth() const noexcept { return depth_; }
  double tail_bound() const noexcept { return tail_; }

  FieldWindow solve(const FieldWindow& g) const;

private:
  Window out_, need_;
  std::vector<std::int64_t> depth_;
  double tail_;
  ExpTable pos_, neg_;
};

/// Finite-window check of the decay hypothesis: along each axis j, the RMS
/// over lines of ||exp(m Theta_j) X_{.., m, ..}|| must decrease as m steps
/// down through the `steps` lowest coordinates of the window.
struct DecayCheck {
  std::vector<std::vector<double>> rms;  // [axis][step], m ascending
  std::vector<bool> monotone;
  bool pass = true;
};
DecayCheck decay_surrogate(const FieldWindow& x, const ThetaTuple& theta, int steps = 5);

}  // namespace fieldcorr
