#include "fieldcorr/ar1.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iostream>

#include "fieldcorr/error.hpp"
#include "line_ops.hpp"

namespace fieldcorr {

namespace {

constexpr std::int64_t kDepthWarning = 10000;

// exp(-i*Theta) with sign (-1)^{|i|} for every corner mask (mask 0 included).
std::vector<Matrix> signed_corner_weights(const ThetaTuple& theta) {
  const unsigned corners = 1u << theta.N();
  std::vector<Matrix> w(corners);
  for (unsigned m = 0; m < corners; ++m) {
    MultiIndex i(theta.N(), 0);
    for (std::size_t l = 0; l < theta.N(); ++l) i[l] = -static_cast<std::int64_t>((m >> l) & 1u);
    const double sign = (std::popcount(m) % 2) ? -1.0 : 1.0;
    w[m] = sign * mat_exp_sym(star_index(i, theta)).matrix();
  }
  return w;
}

void check_ar1_dims(const FieldWindow& x, const ThetaTuple& theta, const char* who) {
  if (x.N() != theta.N() || x.n() != theta.n())
    throw ConfigError(std::string(who) + ": field (N, n) does not match theta");
  theta.require_commuting(who);
}

}  // namespace

Vector ar1_drift(const FieldWindow& x, const MultiIndex& t, const ThetaTuple& theta) {
  check_ar1_dims(x, theta, "ar1_drift");
  const MultiIndex lo = t - MultiIndex::ones(t.size());
  if (!x.window().contains(lo) || !x.window().contains(t))
    throw WindowError("ar1_drift: cube [" + lo.str() + ", " + t.str() + "] is not inside " +
                      x.window().str());
  const auto w = signed_corner_weights(theta);
  Vector acc = Vector::Zero(x.n());
  for (unsigned m = 1; m < w.size(); ++m) {
    MultiIndex c = t;
    for (std::size_t l = 0; l < t.size(); ++l) c[l] -= (m >> l) & 1u;
    acc -= w[m] * x.at(c);
  }
  return acc;
}

FieldWindow ar1_residual(const FieldWindow& x, const FieldWindow& g, const ThetaTuple& theta) {
  check_ar1_dims(x, theta, "ar1_residual");
  if (g.N() != x.N() || g.n() != x.n())
    throw ConfigError("ar1_residual: X and G have different (N, n)");
  Window common;
  try {
    common = x.window().intersect(g.window());
  } catch (const ConfigError&) {
    throw WindowError("ar1_residual: windows " + x.window().str() + " and " + g.window().str() +
                      " do not overlap");
  }
  for (std::size_t l = 0; l < common.N(); ++l)
    if (common.extent(l) < 2)
      throw WindowError("ar1_residual: common window " + common.str() + " has no interior cube");
  const Window interior(common.lo() + MultiIndex::ones(common.N()), common.hi());
  const auto w = signed_corner_weights(theta);
  const FieldWindow dg = increment_field(g.window() == common ? g : g.restrict(common));
  FieldWindow r(interior, x.n(), Clock::integer);
  const auto vol = static_cast<std::int64_t>(interior.volume());
  const std::size_t dim = interior.N();
  const unsigned corners = static_cast<unsigned>(w.size());
#pragma omp parallel
  {
    std::vector<std::int64_t> t(dim);
    Vector acc(x.n());
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < vol; ++i) {
      const auto si = static_cast<std::size_t>(i);
      interior.site_into(si, t);
      const std::size_t base = detail::relocate(interior, x.window(), si);
      acc.setZero();
      for (unsigned m = 0; m < corners; ++m) {
        std::size_t off = 0;
        for (std::size_t l = 0; l < dim; ++l)
          if (m & (1u << l)) off += x.window().stride(l);
        acc.noalias() += w[m] * x.at_linear(base - off);
      }
      r.at_linear(si) = acc - dg.at_linear(si);
    }
  }
  return r;
}

ResidualSummary summarize_residual(const FieldWindow& residual, const FieldWindow& x,
                                   const FieldWindow& g, double tolerance) {
  ResidualSummary s;
  const Window& iw = residual.window();
  s.sites = iw.volume();
  double scale = x.max_abs();
  const Window cube_w(iw.lo() - MultiIndex::ones(iw.N()), iw.hi());
  const FieldWindow dg = increment_field(g.restrict(cube_w));
  scale = std::max(scale, dg.max_abs());
  s.scale = scale > 0.0 ? scale : 1.0;
  for (std::size_t i = 0; i < iw.volume(); ++i) {
    const double r = residual.at_linear(i).cwiseAbs().maxCoeff();
    s.max_residual = std::max(s.max_residual, r);
    if (r > tolerance * s.scale) s.offending.push_back(iw.site(i));
  }
  return s;
}

StationarySolver::StationarySolver(const ThetaTuple& theta, const TruncationPolicy& policy,
                                   const Window& out)
    : out_(out),
      depth_(resolve_depth(policy, theta, out)),
      tail_(fieldcorr::tail_bound(theta, depth_)),
      pos_(theta, Window(out.lo() - MultiIndex(depth_), out.hi()), +1),
      neg_(theta, out, -1) {
  theta.require_commuting("stationary_solution");
  need_ = Window(out.lo() - MultiIndex(depth_) - MultiIndex::ones(out.N()), out.hi());
  for (auto d : depth_)
    if (d > kDepthWarning) {
      std::cerr << "warning: truncation depth " << d
                << " per axis; Theta is close to singular, expect slow solves\n";
      break;
    }
}

FieldWindow StationarySolver::solve(const FieldWindow& g) const {
  if (g.clock() != Clock::integer) throw ConfigError("stationary_solution expects integer-clock noise");
  if (!g.window().contains(need_))
    throw WindowError("stationary_solution: noise must cover " + need_.str() + ", has " +
                      g.window().str());
  FieldWindow x = kernels::apply_sitewise(kernels::m_inverse(g, pos_, out_), neg_, Clock::integer);
  x.meta.history.push_back({"Minv", "", depth_, tail_});
  x.meta.history.push_back({"Linv", "", {}, 0.0});
  return x;
}

FieldWindow stationary_solution(const Ar1System& sys, const Window& out_window) {
  if (sys.g.N() != sys.theta.N() || sys.g.n() != sys.theta.n())
    throw ConfigError("stationary_solution: noise (N, n) does not match theta");
  return StationarySolver(sys.theta, sys.policy, out_window).solve(sys.g);
}

FieldWindow noise_from_stationary(const FieldWindow& x, const ThetaTuple& theta) {
  return m_forward(lamperti(x, theta), theta);
}

DecayCheck decay_surrogate(const FieldWindow& x, const ThetaTuple& theta, int steps) {
  check_ar1_dims(x, theta, "decay_surrogate");
  const Window& w = x.window();
  DecayCheck dc;
  for (std::size_t j = 0; j < w.N(); ++j) {
    if (w.extent(j) < steps)
      throw WindowError("decay_surrogate: window extent along axis " + std::to_string(j) +
                        " is below " + std::to_string(steps));
    std::vector<double> rms(static_cast<std::size_t>(steps), 0.0);
    std::vector<Matrix> e(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k)
      e[static_cast<std::size_t>(k)] =
          mat_exp_sym(SymMatrix::symmetrized(static_cast<double>(w.lo()[j] + k) * theta[j].matrix())).matrix();
    std::size_t lines = 0;
    for (std::size_t i = 0; i < w.volume(); ++i) {
      const MultiIndex t = w.site(i);
      const auto k = t[j] - w.lo()[j];
      if (k >= steps) continue;
      if (k == 0) ++lines;
      rms[static_cast<std::size_t>(k)] += (e[static_cast<std::size_t>(k)] * x.at_linear(i)).squaredNorm();
    }
    bool mono = true;
    for (auto& r : rms) r = std::sqrt(r / static_cast<double>(lines));
    for (int k = 1; k < steps; ++k) mono = mono && rms[static_cast<std::size_t>(k)] > rms[static_cast<std::size_t>(k - 1)];
    dc.rms.push_back(rms);
    dc.monotone.push_back(mono);
    dc.pass = dc.pass && mono;
  }
  return dc;
}

}  // namespace fieldcorr
