#include "fieldcorr/reference.hpp"

#include <bit>

#include "fieldcorr/error.hpp"

namespace fieldcorr::reference {

namespace {

MultiIndex corner(const MultiIndex& t, unsigned mask) {
  MultiIndex c = t;
  for (std::size_t l = 0; l < t.size(); ++l)
    if (mask & (1u << l)) c[l] -= 1;
  return c;
}

double parity_sign(unsigned mask) { return (std::popcount(mask) % 2) ? -1.0 : 1.0; }

Matrix exp_at(const MultiIndex& t, const ThetaTuple& theta, double sign) {
  MultiIndex s = t;
  if (sign < 0)
    for (auto& c : s) c = -c;
  return mat_exp_sym(star_index(s, theta)).matrix();
}

}  // namespace

Vector unit_increment(const FieldWindow& x, const MultiIndex& t) {
  Vector acc = Vector::Zero(x.n());
  const unsigned corners = 1u << x.N();
  for (unsigned m = 0; m < corners; ++m) acc += parity_sign(m) * x.at(corner(t, m));
  return acc;
}

FieldWindow increment_field(const FieldWindow& x) {
  const Window w(x.window().lo() + MultiIndex::ones(x.N()), x.window().hi());
  FieldWindow out(w, x.n(), x.clock());
  for (std::size_t i = 0; i < w.volume(); ++i) out.at_linear(i) = reference::unit_increment(x, w.site(i));
  return out;
}

FieldWindow lamperti(const FieldWindow& x, const ThetaTuple& theta) {
  FieldWindow y(x.window(), x.n(), Clock::exponential);
  for (std::size_t i = 0; i < x.window().volume(); ++i)
    y.at_linear(i) = exp_at(x.window().site(i), theta, +1) * x.at_linear(i);
  return y;
}

FieldWindow lamperti_inv(const FieldWindow& y, const ThetaTuple& theta) {
  FieldWindow x(y.window(), y.n(), Clock::integer);
  for (std::size_t i = 0; i < y.window().volume(); ++i)
    x.at_linear(i) = exp_at(y.window().site(i), theta, -1) * y.at_linear(i);
  return x;
}

FieldWindow m_forward(const FieldWindow& y, const ThetaTuple& theta) {
  const Window& w = y.window();
  const std::size_t dim = w.N();
  FieldWindow g(w, y.n(), Clock::integer);
  for (std::size_t i = 0; i < w.volume(); ++i) {
    const MultiIndex t = w.site(i);
    MultiIndex lo(dim), hi(dim);
    int neg = 0;
    bool empty = false;
    for (std::size_t l = 0; l < dim; ++l) {
      if (t[l] >= 0) {
        lo[l] = 1;
        hi[l] = t[l];
      } else {
        lo[l] = t[l] + 1;
        hi[l] = 0;
        ++neg;
      }
      empty = empty || lo[l] > hi[l];
    }
    if (empty) continue;
    const Window box(lo, hi);
    Vector acc = Vector::Zero(y.n());
    for (std::size_t b = 0; b < box.volume(); ++b) {
      const MultiIndex j = box.site(b);
      acc += exp_at(j, theta, -1) * reference::unit_increment(y, j);
    }
    g.at_linear(i) = (neg % 2 ? -1.0 : 1.0) * acc;
  }
  return g;
}

FieldWindow m_inverse(const FieldWindow& g, const ThetaTuple& theta, const Window& out,
                      const std::vector<std::int64_t>& depth) {
  const MultiIndex start = out.lo() - MultiIndex(depth);
  FieldWindow y(out, g.n(), Clock::exponential);
  for (std::size_t i = 0; i < out.volume(); ++i) {
    const MultiIndex t = out.site(i);
    const Window box(start, t);
    Vector acc = Vector::Zero(g.n());
    for (std::size_t b = 0; b < box.volume(); ++b) {
      const MultiIndex j = box.site(b);
      acc += exp_at(j, theta, +1) * reference::unit_increment(g, j);
    }
    y.at_linear(i) = acc;
  }
  return y;
}

Vector ar1_drift(const FieldWindow& x, const MultiIndex& t, const ThetaTuple& theta) {
  Vector acc = Vector::Zero(x.n());
  const unsigned corners = 1u << x.N();
  for (unsigned m = 1; m < corners; ++m) {
    MultiIndex i(x.N(), 0);
    for (std::size_t l = 0; l < x.N(); ++l) i[l] = (m >> l) & 1u;
    acc += -parity_sign(m) * exp_at(i, theta, -1) * x.at(corner(t, m));
  }
  return acc;
}

}  // namespace fieldcorr::reference
