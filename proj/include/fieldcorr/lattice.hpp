#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fieldcorr/algebra.hpp"
#include "fieldcorr/multi_index.hpp"

namespace fieldcorr {

/// Inclusive hyperrectangle [lo, hi] of Z^N. Sites are linearized row-major
/// (last axis fastest), which is also lexicographic order.
class Window {
public:
  Window() = default;
  Window(MultiIndex lo, MultiIndex hi);

  /// [lo, lo + extent - 1] per axis.
  static Window from_extent(const MultiIndex& lo, const std::vector<std::int64_t>& extent);

  std::size_t N() const noexcept { return lo_.size(); }
  const MultiIndex& lo() const noexcept { return lo_; }
  const MultiIndex& hi() const noexcept { return hi_; }
  std::int64_t extent(std::size_t l) const { return hi_[l] - lo_[l] + 1; }
  std::size_t volume() const noexcept { return volume_; }
  std::size_t stride(std::size_t l) const { return strides_[l]; }

  bool contains(const MultiIndex& t) const;
  bool contains(const Window& w) const;

  std::size_t linear(const MultiIndex& t) const;
  MultiIndex site(std::size_t linear) const;
  /// Writes the coordinates of `linear` into `out` (size N), no allocation.
  void site_into(std::size_t linear, std::span<std::int64_t> out) const;

  /// Window grown (positive) or shrunk (negative) on the low side only.
  Window shift_lo(const MultiIndex& delta) const;
  Window intersect(const Window& o) const;
  /// Window translated by s.
  Window translated(const MultiIndex& s) const;

  friend bool operator==(const Window& a, const Window& b) { return a.lo_ == b.lo_ && a.hi_ == b.hi_; }

  std::string str() const;

private:
  MultiIndex lo_, hi_;
  std::vector<std::size_t> strides_;
  std::size_t volume_ = 0;
};

enum class Clock { integer, exponential };

const char* clock_name(Clock c);
Clock parse_clock(const std::string& s);

/// One applied transform, recorded in a field's sidecar.
struct TransformRecord {
  std::string transform;  // "L", "Linv", "M", "Minv"
  std::string theta_ref;
  std::vector<std::int64_t> depth;
  double tail_bound = 0.0;
};

struct FieldMeta {
  std::optional<std::uint64_t> seed;
  std::vector<TransformRecord> history;
};

/// An n-vector valued field on a finite window. Values are stored site-major:
/// component k of site with linear index i lives at values[i * n + k].
class FieldWindow {
public:
  FieldWindow() = default;
  FieldWindow(Window w, Eigen::Index n, Clock clock);
  FieldWindow(Window w, Eigen::Index n, Clock clock, std::vector<double> values);

  const Window& window() const noexcept { return window_; }
  std::size_t N() const noexcept { return window_.N(); }
  Eigen::Index n() const noexcept { return n_; }
  Clock clock() const noexcept { return clock_; }
  void set_clock(Clock c) noexcept { clock_ = c; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// Throws WindowError for t outside the window.
  Eigen::Map<const Vector> at(const MultiIndex& t) const;
  Eigen::Map<Vector> at(const MultiIndex& t);
  Eigen::Map<const Vector> at_linear(std::size_t i) const {
    return Eigen::Map<const Vector>(values_.data() + i * n_, n_);
  }
  Eigen::Map<Vector> at_linear(std::size_t i) {
    return Eigen::Map<Vector>(values_.data() + i * n_, n_);
  }

  /// Copy of the field restricted to a sub-window.
  FieldWindow restrict(const Window& sub) const;

  /// Largest absolute entry.
  double max_abs() const;
  bool all_finite() const;

  FieldMeta meta;

private:
  Window window_;
  Eigen::Index n_ = 0;
  Clock clock_ = Clock::integer;
  std::vector<double> values_;
};

/// Sum over i in {0,1}^N of (-1)^{|i|} X_{t-i}.
Vector unit_increment(const FieldWindow& x, const MultiIndex& t);

/// Sum over i in {0,1}^N of (-1)^{|i|} X_{t - i(t-s)}; s need not be <= t.
/// Evaluated as nested differences so degenerate rectangles are exactly zero
/// and swapping s_l, t_l flips the sign exactly.
Vector rect_increment(const FieldWindow& x, const MultiIndex& s, const MultiIndex& t);

/// Sum of unit_increment over j in [s+1, t]; requires s <= t.
Vector rect_from_units(const FieldWindow& x, const MultiIndex& s, const MultiIndex& t);

/// X_t - unit_increment(X, t).
Vector previous_value(const FieldWindow& x, const MultiIndex& t);

/// Unit-cube increment field on [lo+1, hi] (parallel kernel).
FieldWindow increment_field(const FieldWindow& x);

}  // namespace fieldcorr
