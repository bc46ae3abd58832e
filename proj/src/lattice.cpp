#include "fieldcorr/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fieldcorr/error.hpp"

namespace fieldcorr {

Window::Window(MultiIndex lo, MultiIndex hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() == 0) throw ConfigError("window must have N >= 1");
  if (lo_.size() != hi_.size())
    throw ConfigError("window bounds have different lengths: lo " + lo_.str() + ", hi " + hi_.str());
  if (!leq(lo_, hi_)) throw ConfigError("window lo " + lo_.str() + " is not <= hi " + hi_.str());
  const std::size_t dim = lo_.size();
  strides_.assign(dim, 1);
  volume_ = 1;
  for (std::size_t l = dim; l-- > 0;) {
    strides_[l] = volume_;
    const auto e = static_cast<std::size_t>(hi_[l] - lo_[l] + 1);
    if (volume_ > std::numeric_limits<std::size_t>::max() / e)
      throw ConfigError("window volume overflows");
    volume_ *= e;
  }
}

Window Window::from_extent(const MultiIndex& lo, const std::vector<std::int64_t>& extent) {
  if (extent.size() != lo.size()) throw ConfigError("window extent length does not match lo");
  MultiIndex hi = lo;
  for (std::size_t l = 0; l < lo.size(); ++l) {
    if (extent[l] < 1) throw ConfigError("window extent must be >= 1 on every axis");
    hi[l] = lo[l] + extent[l] - 1;
  }
  return Window(lo, hi);
}

bool Window::contains(const MultiIndex& t) const {
  if (t.size() != N()) return false;
  for (std::size_t l = 0; l < N(); ++l)
    if (t[l] < lo_[l] || t[l] > hi_[l]) return false;
  return true;
}

bool Window::contains(const Window& w) const {
  return contains(w.lo()) && contains(w.hi());
}

std::size_t Window::linear(const MultiIndex& t) const {
  std::size_t idx = 0;
  for (std::size_t l = 0; l < N(); ++l) idx += static_cast<std::size_t>(t[l] - lo_[l]) * strides_[l];
  return idx;
}

MultiIndex Window::site(std::size_t linear) const {
  MultiIndex t(N());
  site_into(linear, std::span<std::int64_t>(&t[0], N()));
  return t;
}

void Window::site_into(std::size_t linear, std::span<std::int64_t> out) const {
  for (std::size_t l = 0; l < N(); ++l) {
    out[l] = lo_[l] + static_cast<std::int64_t>(linear / strides_[l]);
    linear %= strides_[l];
  }
}

Window Window::shift_lo(const MultiIndex& delta) const {
  return Window(lo_ - delta, hi_);
}

Window Window::intersect(const Window& o) const {
  MultiIndex lo = lo_, hi = hi_;
  for (std::size_t l = 0; l < N(); ++l) {
    lo[l] = std::max(lo_[l], o.lo_[l]);
    hi[l] = std::min(hi_[l], o.hi_[l]);
  }
  return Window(lo, hi);
}

Window Window::translated(const MultiIndex& s) const {
  return Window(lo_ + s, hi_ + s);
}

std::string Window::str() const { return "[" + lo_.str() + ", " + hi_.str() + "]"; }

const char* clock_name(Clock c) { return c == Clock::integer ? "integer" : "exponential"; }

Clock parse_clock(const std::string& s) {
  if (s == "integer") return Clock::integer;
  if (s == "exponential") return Clock::exponential;
  throw ConfigError("clock must be \"integer\" or \"exponential\", got \"" + s + "\"");
}

FieldWindow::FieldWindow(Window w, Eigen::Index n, Clock clock)
    : window_(std::move(w)), n_(n), clock_(clock),
      values_(window_.volume() * static_cast<std::size_t>(n), 0.0) {
  if (n < 1) throw ConfigError("field state dimension n must be >= 1");
}

FieldWindow::FieldWindow(Window w, Eigen::Index n, Clock clock, std::vector<double> values)
    : window_(std::move(w)), n_(n), clock_(clock), values_(std::move(values)) {
  if (n < 1) throw ConfigError("field state dimension n must be >= 1");
  if (values_.size() != window_.volume() * static_cast<std::size_t>(n)) {
    std::ostringstream os;
    os << "field has " << values_.size() << " scalars, window " << window_.str() << " with n = " << n
       << " needs " << window_.volume() * static_cast<std::size_t>(n);
    throw ConfigError(os.str());
  }
  if (!all_finite()) throw NumericError("field contains non-finite values");
}

namespace {

[[noreturn]] void out_of_window(const MultiIndex& t, const Window& w) {
  throw WindowError("site " + t.str() + " lies outside window " + w.str());
}

}  // namespace

Eigen::Map<const Vector> FieldWindow::at(const MultiIndex& t) const {
  if (!window_.contains(t)) out_of_window(t, window_);
  return at_linear(window_.linear(t));
}

Eigen::Map<Vector> FieldWindow::at(const MultiIndex& t) {
  if (!window_.contains(t)) out_of_window(t, window_);
  return at_linear(window_.linear(t));
}

FieldWindow FieldWindow::restrict(const Window& sub) const {
  if (!window_.contains(sub))
    throw WindowError("sub-window " + sub.str() + " is not inside " + window_.str());
  FieldWindow out(sub, n_, clock_);
  out.meta = meta;
  const std::size_t dim = N();
  std::vector<std::int64_t> t(dim);
  for (std::size_t i = 0; i < sub.volume(); ++i) {
    sub.site_into(i, t);
    out.at_linear(i) = at_linear(window_.linear(MultiIndex(t)));
  }
  return out;
}

double FieldWindow::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool FieldWindow::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void require_cube(const FieldWindow& x, const MultiIndex& t, const char* who) {
  if (t.size() != x.N())
    throw ConfigError(std::string(who) + ": multi-index has length " + std::to_string(t.size()) +
                      ", field has N = " + std::to_string(x.N()));
  const MultiIndex lo = t - MultiIndex::ones(t.size());
  if (!x.window().contains(lo) || !x.window().contains(t))
    throw WindowError(std::string(who) + ": cube [" + lo.str() + ", " + t.str() +
                      "] is not inside window " + x.window().str());
}

// Nested differences over axes axis..N-1 with corner coordinates fixed for
// axes < axis in `p`.
Vector nested_diff(const FieldWindow& x, const MultiIndex& s, const MultiIndex& t, MultiIndex& p,
                   std::size_t axis) {
  if (axis == p.size()) return x.at(p);
  p[axis] = t[axis];
  Vector hi = nested_diff(x, s, t, p, axis + 1);
  p[axis] = s[axis];
  Vector lo = nested_diff(x, s, t, p, axis + 1);
  return hi - lo;
}

}  // namespace

Vector unit_increment(const FieldWindow& x, const MultiIndex& t) {
  require_cube(x, t, "unit_increment");
  return rect_increment(x, t - MultiIndex::ones(t.size()), t);
}

Vector rect_increment(const FieldWindow& x, const MultiIndex& s, const MultiIndex& t) {
  if (s.size() != x.N() || t.size() != x.N())
    throw ConfigError("rect_increment: corner lengths do not match field N = " +
                      std::to_string(x.N()));
  // Every corner mixes coordinates of s and t, so containing both suffices.
  if (!x.window().contains(s) || !x.window().contains(t))
    throw WindowError("rect_increment: corners " + s.str() + ", " + t.str() +
                      " are not inside window " + x.window().str());
  MultiIndex p = t;
  return nested_diff(x, s, t, p, 0);
}

Vector rect_from_units(const FieldWindow& x, const MultiIndex& s, const MultiIndex& t) {
  if (!leq(s, t)) throw ConfigError("rect_from_units: requires s <= t, got " + s.str() + ", " + t.str());
  if (!x.window().contains(s) || !x.window().contains(t))
    throw WindowError("rect_from_units: [" + s.str() + ", " + t.str() + "] is not inside window " +
                      x.window().str());
  Vector acc = Vector::Zero(x.n());
  for (std::size_t l = 0; l < s.size(); ++l)
    if (s[l] == t[l]) return acc;
  const Window box(s + MultiIndex::ones(s.size()), t);
  for (std::size_t i = 0; i < box.volume(); ++i) acc += unit_increment(x, box.site(i));
  return acc;
}

Vector previous_value(const FieldWindow& x, const MultiIndex& t) {
  require_cube(x, t, "previous_value");
  return x.at(t) - unit_increment(x, t);
}

namespace {

// First difference along `axis`: out lives on `in_w` with lo[axis] + 1.
std::vector<double> difference_along(std::span<const double> in, const Window& in_w,
                                     Eigen::Index n, std::size_t axis, Window& out_w) {
  MultiIndex lo = in_w.lo();
  lo[axis] += 1;
  out_w = Window(lo, in_w.hi());
  std::vector<double> out(out_w.volume() * static_cast<std::size_t>(n));
  const auto vol = static_cast<std::int64_t>(out_w.volume());
  const std::size_t back = in_w.stride(axis) * static_cast<std::size_t>(n);
  const std::size_t dim = in_w.N();
#pragma omp parallel
  {
    std::vector<std::int64_t> c(dim);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < vol; ++i) {
      out_w.site_into(static_cast<std::size_t>(i), c);
      std::size_t src = 0;
      for (std::size_t l = 0; l < dim; ++l)
        src += static_cast<std::size_t>(c[l] - in_w.lo()[l]) * in_w.stride(l);
      src *= static_cast<std::size_t>(n);
      for (Eigen::Index k = 0; k < n; ++k)
        out[static_cast<std::size_t>(i) * n + k] = in[src + k] - in[src + k - back];
    }
  }
  return out;
}

}  // namespace

FieldWindow increment_field(const FieldWindow& x) {
  for (std::size_t l = 0; l < x.N(); ++l)
    if (x.window().extent(l) < 2)
      throw WindowError("increment_field: window " + x.window().str() +
                        " has no interior cube along axis " + std::to_string(l));
  Window w = x.window();
  std::vector<double> buf(x.values().begin(), x.values().end());
  for (std::size_t l = 0; l < x.N(); ++l) {
    Window next;
    buf = difference_along(buf, w, x.n(), l, next);
    w = next;
  }
  FieldWindow out(w, x.n(), x.clock(), std::move(buf));
  out.meta = x.meta;
  return out;
}

}  // namespace fieldcorr
