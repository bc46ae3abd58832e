#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace fieldcorr {

/// A point of Z^N.
class MultiIndex {
public:
  using value_type = std::int64_t;

  MultiIndex() = default;
  explicit MultiIndex(std::size_t dim, value_type fill = 0) : c_(dim, fill) {}
  MultiIndex(std::initializer_list<value_type> c) : c_(c) {}
  explicit MultiIndex(std::vector<value_type> c) : c_(std::move(c)) {}

  std::size_t size() const noexcept { return c_.size(); }
  value_type& operator[](std::size_t l) { return c_[l]; }
  value_type operator[](std::size_t l) const { return c_[l]; }

  auto begin() const noexcept { return c_.begin(); }
  auto end() const noexcept { return c_.end(); }
  auto begin() noexcept { return c_.begin(); }
  auto end() noexcept { return c_.end(); }

  std::span<const value_type> coords() const noexcept { return c_; }
  const std::vector<value_type>& vec() const noexcept { return c_; }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

  MultiIndex& operator+=(const MultiIndex& o);
  MultiIndex& operator-=(const MultiIndex& o);
  friend MultiIndex operator+(MultiIndex a, const MultiIndex& b) { return a += b; }
  friend MultiIndex operator-(MultiIndex a, const MultiIndex& b) { return a -= b; }

  /// Componentwise a <= b.
  friend bool leq(const MultiIndex& a, const MultiIndex& b);

  static MultiIndex ones(std::size_t dim) { return MultiIndex(dim, 1); }
  static MultiIndex unit(std::size_t dim, std::size_t axis);

  std::string str() const;

private:
  std::vector<value_type> c_;
};

}  // namespace fieldcorr
