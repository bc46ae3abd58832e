#include "fieldcorr/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "fieldcorr/error.hpp"
#include "line_ops.hpp"

namespace fieldcorr {

namespace detail {

void prefix_sum_all_axes(std::span<double> buf, const Window& w, std::size_t n) {
  for (std::size_t l = 0; l < w.N(); ++l) {
    const auto ext = static_cast<std::size_t>(w.extent(l));
    for_each_line(w, l, [&](std::size_t base, std::size_t step) {
      for (std::size_t p = 1; p < ext; ++p) {
        double* cur = buf.data() + (base + p * step) * n;
        const double* prev = buf.data() + (base + (p - 1) * step) * n;
        for (std::size_t k = 0; k < n; ++k) cur[k] += prev[k];
      }
    });
  }
}

std::size_t relocate(const Window& inner, const Window& outer, std::size_t i) {
  std::size_t out = 0;
  for (std::size_t l = inner.N(); l-- > 0;) {
    const std::size_t c = i % static_cast<std::size_t>(inner.extent(l));
    i /= static_cast<std::size_t>(inner.extent(l));
    out += (c + static_cast<std::size_t>(inner.lo()[l] - outer.lo()[l])) * outer.stride(l);
  }
  return out;
}

}  // namespace detail

std::vector<std::int64_t> truncation_depth(const ThetaTuple& theta, double eps, const Window& window) {
  if (!(eps > 0.0)) throw ConfigError("truncation eps must be > 0");
  if (window.N() != theta.N())
    throw ConfigError("truncation_depth: window N = " + std::to_string(window.N()) +
                      " but theta N = " + std::to_string(theta.N()));
  const double lmin = min_eigenvalue(theta);
  const double x = (static_cast<double>(theta.N()) * std::log(2.0) - std::log(eps)) / lmin;
  // Relative slack absorbs rounding in log/exp so analytic integers stay put.
  const double m = std::ceil(x - 1e-9 * std::max(1.0, std::abs(x)));
  const auto depth = static_cast<std::int64_t>(std::max(0.0, m));
  return std::vector<std::int64_t>(theta.N(), depth);
}

double tail_bound(const ThetaTuple& theta, const std::vector<std::int64_t>& depth) {
  if (depth.empty()) return std::ldexp(1.0, static_cast<int>(theta.N()));
  const auto m = *std::min_element(depth.begin(), depth.end());
  return std::ldexp(1.0, static_cast<int>(theta.N())) *
         std::exp(-min_eigenvalue(theta) * static_cast<double>(m));
}

std::vector<std::int64_t> resolve_depth(const TruncationPolicy& policy, const ThetaTuple& theta,
                                        const Window& window) {
  if (policy.depth.empty()) return truncation_depth(theta, policy.eps, window);
  if (policy.depth.size() != theta.N())
    throw ConfigError("truncation depth has " + std::to_string(policy.depth.size()) +
                      " entries, expected N = " + std::to_string(theta.N()));
  for (auto d : policy.depth)
    if (d < 0) throw ConfigError("truncation depth must be >= 0 on every axis");
  return policy.depth;
}

ExpTable::ExpTable(const ThetaTuple& theta, const Window& window, int sign)
    : window_(window), n_(theta.n()) {
  if (window.N() != theta.N())
    throw ConfigError("window N = " + std::to_string(window.N()) + " but theta N = " +
                      std::to_string(theta.N()));
  const std::size_t nn = static_cast<std::size_t>(n_ * n_);
  data_.resize(window.volume() * nn);
  const auto vol = static_cast<std::int64_t>(window.volume());
  const std::size_t dim = window.N();
  bool overflow = false;
#pragma omp parallel
  {
    std::vector<std::int64_t> t(dim);
#pragma omp for schedule(static) reduction(|| : overflow)
    for (std::int64_t i = 0; i < vol; ++i) {
      window.site_into(static_cast<std::size_t>(i), t);
      if (sign < 0)
        for (auto& c : t) c = -c;
      try {
        const SymMatrix e = mat_exp_sym(star_index(t, theta));
        std::copy(e.matrix().data(), e.matrix().data() + nn, data_.data() + static_cast<std::size_t>(i) * nn);
      } catch (const NumericError&) {
        overflow = true;
      }
    }
  }
  if (overflow)
    throw NumericError("exp(t*Theta) overflows double range on window " + window.str() +
                       "; shrink the window or Theta");
}

Eigen::Map<const Matrix> ExpTable::at(const MultiIndex& t) const {
  if (!window_.contains(t)) throw WindowError("site " + t.str() + " outside table window " + window_.str());
  return at_linear(window_.linear(t));
}

namespace kernels {

FieldWindow apply_sitewise(const FieldWindow& f, const ExpTable& table, Clock out_clock) {
  if (!table.window().contains(f.window()))
    throw WindowError("exponential table window " + table.window().str() + " does not cover " +
                      f.window().str());
  if (table.n() != f.n())
    throw ConfigError("theta has n = " + std::to_string(table.n()) + " but field has n = " +
                      std::to_string(f.n()));
  FieldWindow out(f.window(), f.n(), out_clock);
  out.meta = f.meta;
  const auto vol = static_cast<std::int64_t>(f.window().volume());
  const bool same = table.window() == f.window();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < vol; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const std::size_t ti = same ? si : detail::relocate(f.window(), table.window(), si);
    out.at_linear(si).noalias() = table.at_linear(ti) * f.at_linear(si);
  }
  return out;
}

FieldWindow m_forward(const FieldWindow& y, const ExpTable& neg) {
  const Window& w = y.window();
  const std::size_t n = static_cast<std::size_t>(y.n());
  const FieldWindow dy = increment_field(y);  // on [lo+1, hi]
  const Window& dw = dy.window();
  if (!neg.window().contains(dw))
    throw WindowError("m_forward: exponential table does not cover " + dw.str());

  // Weighted increments embedded in the full window; faces at lo stay zero
  // and are never read by the anchored sums.
  std::vector<double> buf(w.volume() * n, 0.0);
  const auto dvol = static_cast<std::int64_t>(dw.volume());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < dvol; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const std::size_t ti = detail::relocate(dw, neg.window(), si);
    const std::size_t bi = detail::relocate(dw, w, si);
    Eigen::Map<Vector>(buf.data() + bi * n, y.n()).noalias() = neg.at_linear(ti) * dy.at_linear(si);
  }

  // Anchored sum along each axis: C(t) = sum_{1..t} for t >= 0 and
  // -sum_{t+1..0} for t < 0. The composition reproduces the sign
  // (-1)^{#negative coordinates} of the box sum.
  for (std::size_t l = 0; l < w.N(); ++l) {
    const auto ext = static_cast<std::size_t>(w.extent(l));
    const auto z = static_cast<std::size_t>(-w.lo()[l]);
    detail::for_each_line(w, l, [&](std::size_t base, std::size_t step) {
      auto elem = [&](std::size_t p) { return buf.data() + (base + p * step) * n; };
      for (std::size_t k = 0; k < n; ++k) {
        double carry = 0.0;
        double old_next = elem(z)[k];
        for (std::size_t p = z; p-- > 0;) {
          const double old = elem(p)[k];
          carry -= old_next;
          elem(p)[k] = carry;
          old_next = old;
        }
        elem(z)[k] = 0.0;
        for (std::size_t p = z + 1; p < ext; ++p) elem(p)[k] += elem(p - 1)[k];
      }
    });
  }
  FieldWindow g(w, y.n(), Clock::integer, std::move(buf));
  g.meta = y.meta;
  return g;
}

FieldWindow m_inverse(const FieldWindow& g, const ExpTable& pos, const Window& out) {
  const Window& sum_w = pos.window();  // [out.lo - depth, out.hi]
  const Window need(sum_w.lo() - MultiIndex::ones(sum_w.N()), sum_w.hi());
  if (!g.window().contains(need))
    throw WindowError("m_inverse_truncated: G must cover " + need.str() + ", has " + g.window().str());
  const std::size_t n = static_cast<std::size_t>(g.n());
  const FieldWindow dg = increment_field(need == g.window() ? g : g.restrict(need));  // on sum_w
  std::vector<double> buf(sum_w.volume() * n);
  const auto vol = static_cast<std::int64_t>(sum_w.volume());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < vol; ++i) {
    const auto si = static_cast<std::size_t>(i);
    Eigen::Map<Vector>(buf.data() + si * n, g.n()).noalias() = pos.at_linear(si) * dg.at_linear(si);
  }
  detail::prefix_sum_all_axes(buf, sum_w, n);
  FieldWindow y(sum_w, g.n(), Clock::exponential, std::move(buf));
  y.meta = g.meta;
  return out == sum_w ? y : y.restrict(out);
}

}  // namespace kernels

namespace {

void require_clock(const FieldWindow& f, Clock c, const char* who) {
  if (f.clock() != c)
    throw ConfigError(std::string(who) + " expects a field on the " + clock_name(c) +
                      " clock, got " + clock_name(f.clock()));
}

void require_dims(const FieldWindow& f, const ThetaTuple& theta, const char* who) {
  if (f.N() != theta.N() || f.n() != theta.n()) {
    std::ostringstream os;
    os << who << ": field has (N, n) = (" << f.N() << ", " << f.n() << "), theta has ("
       << theta.N() << ", " << theta.n() << ")";
    throw ConfigError(os.str());
  }
}

}  // namespace

FieldWindow lamperti(const FieldWindow& x, const ThetaTuple& theta, const std::string& theta_ref) {
  require_clock(x, Clock::integer, "lamperti");
  require_dims(x, theta, "lamperti");
  theta.require_commuting("lamperti");
  FieldWindow y = kernels::apply_sitewise(x, ExpTable(theta, x.window(), +1), Clock::exponential);
  y.meta.history.push_back({"L", theta_ref, {}, 0.0});
  return y;
}

FieldWindow lamperti_inv(const FieldWindow& y, const ThetaTuple& theta, const std::string& theta_ref) {
  require_clock(y, Clock::exponential, "lamperti_inv");
  require_dims(y, theta, "lamperti_inv");
  theta.require_commuting("lamperti_inv");
  FieldWindow x = kernels::apply_sitewise(y, ExpTable(theta, y.window(), -1), Clock::integer);
  x.meta.history.push_back({"Linv", theta_ref, {}, 0.0});
  return x;
}

FieldWindow m_forward(const FieldWindow& y, const ThetaTuple& theta, const std::string& theta_ref) {
  require_clock(y, Clock::exponential, "m_forward");
  require_dims(y, theta, "m_forward");
  theta.require_commuting("m_forward");
  const Window& w = y.window();
  for (std::size_t l = 0; l < w.N(); ++l) {
    if (w.lo()[l] > 0 || w.hi()[l] < 0) {
      MultiIndex lo = w.lo(), hi = w.hi();
      for (std::size_t a = 0; a < w.N(); ++a) {
        lo[a] = std::min<std::int64_t>(lo[a], 0);
        hi[a] = std::max<std::int64_t>(hi[a], 0);
      }
      throw WindowError("m_forward: window " + w.str() + " must contain 0 on every axis; required " +
                        Window(lo, hi).str());
    }
  }
  bool flat = false;
  for (std::size_t l = 0; l < w.N(); ++l) flat = flat || w.extent(l) == 1;
  FieldWindow g;
  if (flat) {
    // A window that is a single point along some axis only holds t_l = 0
    // there, so G vanishes identically.
    g = FieldWindow(w, y.n(), Clock::integer);
    g.meta = y.meta;
  } else {
    const Window inc(w.lo() + MultiIndex::ones(w.N()), w.hi());
    g = kernels::m_forward(y, ExpTable(theta, inc, -1));
  }
  g.meta.history.push_back({"M", theta_ref, {}, 0.0});
  return g;
}

FieldWindow m_inverse_truncated(const FieldWindow& g, const ThetaTuple& theta,
                                const TruncationPolicy& policy, const Window& out,
                                const std::string& theta_ref) {
  require_clock(g, Clock::integer, "m_inverse_truncated");
  require_dims(g, theta, "m_inverse_truncated");
  theta.require_commuting("m_inverse_truncated");
  if (out.N() != g.N()) throw ConfigError("m_inverse_truncated: output window has wrong N");
  const auto depth = resolve_depth(policy, theta, out);
  const MultiIndex d(depth);
  const Window sum_w(out.lo() - d, out.hi());
  const Window need(sum_w.lo() - MultiIndex::ones(out.N()), out.hi());
  if (!g.window().contains(need))
    throw WindowError("m_inverse_truncated: depth " + d.str() + " for output " + out.str() +
                      " needs G on " + need.str() + ", input covers " + g.window().str());
  FieldWindow y = kernels::m_inverse(g, ExpTable(theta, sum_w, +1), out);
  y.meta.history.push_back({"Minv", theta_ref, depth, tail_bound(theta, depth)});
  return y;
}

FieldWindow m_inverse_truncated(const FieldWindow& g, const ThetaTuple& theta,
                                const TruncationPolicy& policy, const std::string& theta_ref) {
  require_dims(g, theta, "m_inverse_truncated");
  const auto depth = resolve_depth(policy, theta, g.window());
  MultiIndex lo = g.window().lo();
  for (std::size_t l = 0; l < lo.size(); ++l) {
    lo[l] += 1 + depth[l];
    if (lo[l] > g.window().hi()[l])
      throw WindowError("m_inverse_truncated: depth " + std::to_string(depth[l]) + " on axis " +
                        std::to_string(l) + " leaves no output sites in " + g.window().str() +
                        "; extend G downward by at least " +
                        std::to_string(lo[l] - g.window().hi()[l]));
  }
  TruncationPolicy fixed = policy;
  fixed.depth = depth;
  return m_inverse_truncated(g, theta, fixed, Window(lo, g.window().hi()), theta_ref);
}

}  // namespace fieldcorr
