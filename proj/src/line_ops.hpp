#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "fieldcorr/lattice.hpp"

namespace fieldcorr::detail {

// Calls f(base, step) for every line of `w` parallel to `axis`; element p of
// the line sits at site index base + p * step. Lines are independent, so the
// loop runs in parallel.
template <class F>
void for_each_line(const Window& w, std::size_t axis, F&& f) {
  const std::size_t stride = w.stride(axis);
  const auto ext = static_cast<std::size_t>(w.extent(axis));
  const auto lines = static_cast<std::int64_t>(w.volume() / ext);
#pragma omp parallel for schedule(static)
  for (std::int64_t id = 0; id < lines; ++id) {
    const auto a = static_cast<std::size_t>(id) / stride;
    const auto b = static_cast<std::size_t>(id) % stride;
    f(a * stride * ext + b, stride);
  }
}

// In-place inclusive prefix sum along every axis (n scalars per site).
void prefix_sum_all_axes(std::span<double> buf, const Window& w, std::size_t n);

// Linear index in `outer` of the site with linear index i in `inner`.
std::size_t relocate(const Window& inner, const Window& outer, std::size_t i);

}  // namespace fieldcorr::detail
