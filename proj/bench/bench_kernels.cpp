// Wall-clock comparison of the OpenMP kernels against the serial reference.
//
//   bench_kernels [side=24] [threads=max] [repeats=3]
//
// Both paths run on the same 3-D field (n = 2); the table reports the best of
// `repeats` runs and the max difference between the outputs relative to the largest
// reference value.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>

#include "fieldcorr/lattice.hpp"
#include "fieldcorr/parallel.hpp"
#include "fieldcorr/reference.hpp"
#include "fieldcorr/transforms.hpp"

using namespace fieldcorr;

namespace {

double best_of(int repeats, const std::function<FieldWindow()>& fn, FieldWindow& out) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    out = fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

double rel_diff(const FieldWindow& a, const FieldWindow& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  const double s = b.max_abs();
  return s > 0.0 ? d / s : d;
}

void row(const char* name, int repeats, const std::function<FieldWindow()>& par,
         const std::function<FieldWindow()>& ref) {
  FieldWindow a, b;
  const double tp = best_of(repeats, par, a);
  const double tr = best_of(repeats, ref, b);
  std::printf("%-16s %12.4f %12.4f %9.2fx %12.3e\n", name, tr, tp, tr / tp, rel_diff(a, b));
}

}  // namespace

int main(int argc, char** argv) {
  const std::int64_t side = argc > 1 ? std::atoll(argv[1]) : 24;
  const int threads = argc > 2 ? std::atoi(argv[2]) : max_threads();
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;
  set_threads(threads);

  const Window w(MultiIndex{-side / 2, -side / 2, -side / 2}, MultiIndex{side / 2, side / 2, side / 2});
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  FieldWindow x(w, 2, Clock::integer);
  for (auto& v : x.values()) v = nd(rng);
  Matrix a(2, 2), b(2, 2), c(2, 2);
  a << 0.9, 0.1, 0.1, 0.8;
  b << 0.7, 0.0, 0.0, 0.7;
  c << 1.0, 0.0, 0.0, 1.0;
  const ThetaTuple theta({a, b, c});
  const FieldWindow y = lamperti(x, theta);
  const std::vector<std::int64_t> depth{4, 4, 4};
  TruncationPolicy pol;
  pol.depth = depth;
  const Window out(w.lo() + MultiIndex{5, 5, 5}, w.hi());

  std::printf("window %s, n = 2, threads = %d\n", w.str().c_str(), threads);
  std::printf("%-16s %12s %12s %10s %12s\n", "kernel", "serial [s]", "omp [s]", "speedup", "rel diff");
  row("increment_field", repeats, [&] { return increment_field(x); }, [&] { return reference::increment_field(x); });
  row("lamperti", repeats, [&] { return lamperti(x, theta); }, [&] { return reference::lamperti(x, theta); });
  row("m_forward", repeats, [&] { return m_forward(y, theta); }, [&] { return reference::m_forward(y, theta); });
  row("m_inverse", repeats, [&] { return m_inverse_truncated(x, theta, pol, out); },
      [&] { return reference::m_inverse(x, theta, out, depth); });
  return 0;
}
