#include <cmath>

#include "doctest.h"
#include "fieldcorr/error.hpp"
#include "fieldcorr/reference.hpp"
#include "fieldcorr/transforms.hpp"
#include "support.hpp"

using namespace fieldcorr;
using testing::Rng;

namespace {

ThetaTuple scalar_theta(double h) { return ThetaTuple({Matrix::Constant(1, 1, h)}); }

FieldWindow zero_on_hyperplanes(FieldWindow g) {
  const Window& w = g.window();
  for (std::size_t i = 0; i < w.volume(); ++i) {
    const MultiIndex t = w.site(i);
    for (std::size_t l = 0; l < w.N(); ++l)
      if (t[l] == 0) {
        g.at_linear(i).setZero();
        break;
      }
  }
  return g;
}

}  // namespace

TEST_SUITE("transforms") {

TEST_CASE("lamperti pair") {
  Rng rng(21);
  const ThetaTuple h = scalar_theta(0.4);
  const FieldWindow x = testing::random_field(rng, Window(MultiIndex{-3}, MultiIndex{3}), 1, Clock::integer);
  const FieldWindow y = lamperti(x, h);
  CHECK(y.clock() == Clock::exponential);
  CHECK(y.at(MultiIndex{0})(0) == x.at(MultiIndex{0})(0));
  for (std::int64_t t = -3; t <= 3; ++t)
    CHECK(y.at(MultiIndex{t})(0) == doctest::Approx(std::exp(0.4 * t) * x.at(MultiIndex{t})(0)).epsilon(1e-15));

  FieldWindow e(Window(MultiIndex{-4}, MultiIndex{4}), 1, Clock::exponential);
  for (std::int64_t t = -4; t <= 4; ++t) e.at(MultiIndex{t})(0) = std::exp(0.4 * t);
  const FieldWindow one = lamperti_inv(e, h);
  for (double v : one.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));

  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t dim = 1 + rep % 3;
    const Eigen::Index n = 1 + rep % 3;
    const ThetaTuple th = testing::random_commuting_theta(rng, n, dim, 0.2, 1.5);
    const FieldWindow f = testing::random_field(rng, testing::random_window(rng, dim, 1, 4, false), n, Clock::integer);
    const FieldWindow back = lamperti_inv(lamperti(f, th), th);
    CHECK(testing::rel_diff(back, f) <= 1e-10);
    FieldWindow g = f;
    g.set_clock(Clock::exponential);
    CHECK(testing::rel_diff(lamperti(lamperti_inv(g, th), th), g) <= 1e-10);
    CHECK(testing::max_abs_diff(lamperti(f, th), reference::lamperti(f, th)) <= 1e-12 * lamperti(f, th).max_abs());
  }

  CHECK_THROWS_AS(lamperti(y, h), ConfigError);
  CHECK_THROWS_AS(lamperti_inv(x, h), ConfigError);
  const ThetaTuple bad({(Matrix(2, 2) << 1, 0, 0, 2).finished(), (Matrix(2, 2) << 2, 1, 1, 2).finished()});
  const FieldWindow x2(Window(MultiIndex{0, 0}, MultiIndex{1, 1}), 2, Clock::integer);
  CHECK_THROWS_AS(lamperti(x2, bad), HypothesisError);
}

TEST_CASE("lamperti transports shifts into e^{s*Theta} scaling") {
  Rng rng(22);
  const ThetaTuple th = testing::random_commuting_theta(rng, 2, 2, 0.3, 1.0);
  const Window w(MultiIndex{-2, -2}, MultiIndex{3, 3});
  const FieldWindow x = testing::random_field(rng, w, 2, Clock::integer);
  const MultiIndex s{1, 2};
  const Window base(w.lo(), w.hi() - s);
  FieldWindow shifted(base, 2, Clock::integer);
  for (std::size_t i = 0; i < base.volume(); ++i) shifted.at_linear(i) = x.at(base.site(i) + s);
  const FieldWindow ys = lamperti(shifted, th), y = lamperti(x, th);
  const Matrix es = mat_exp_sym(star_index(s, th)).matrix();
  for (std::size_t i = 0; i < base.volume(); ++i) {
    const MultiIndex t = base.site(i);
    const Vector want = es * ys.at(t);
    CHECK((y.at(t + s) - want).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + want.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("m_forward structure") {
  Rng rng(23);
  const double h = 0.7;
  FieldWindow y(Window(MultiIndex{-1}, MultiIndex{2}), 1, Clock::exponential);
  for (auto& v : y.values()) v = testing::uniform(rng, -1, 1);
  auto yv = [&](std::int64_t t) { return y.at(MultiIndex{t})(0); };
  const FieldWindow g = m_forward(y, scalar_theta(h));
  CHECK(g.clock() == Clock::integer);
  CHECK(g.window() == y.window());
  CHECK(g.at(MultiIndex{0})(0) == 0.0);
  const double g2 = std::exp(-h) * (yv(1) - yv(0)) + std::exp(-2 * h) * (yv(2) - yv(1));
  CHECK(g.at(MultiIndex{2})(0) == doctest::Approx(g2).epsilon(1e-14));
  CHECK(g.at(MultiIndex{-1})(0) == doctest::Approx(-(yv(0) - yv(-1))).epsilon(1e-14));

  for (int rep = 0; rep < 15; ++rep) {
    const std::size_t dim = 1 + rep % 3;
    const Eigen::Index n = 1 + (rep / 3) % 3;
    const ThetaTuple th = testing::random_commuting_theta(rng, n, dim, 0.2, 1.2);
    const Window w = testing::random_window(rng, dim, 2, 4, true);
    const FieldWindow yy = testing::random_field(rng, w, n, Clock::exponential);
    const FieldWindow gg = m_forward(yy, th);
    const FieldWindow ref = reference::m_forward(yy, th);
    CHECK(testing::max_abs_diff(gg, ref) <= 1e-12 * std::max(1.0, ref.max_abs()));
    for (std::size_t i = 0; i < w.volume(); ++i) {
      const MultiIndex t = w.site(i);
      if (std::find(t.begin(), t.end(), 0) != t.end()) {
        CHECK(gg.at_linear(i).isZero(0.0));
        continue;
      }
      if (!leq(w.lo() + MultiIndex::ones(dim), t)) continue;
      const Vector want = mat_exp_sym(star_index(MultiIndex(dim, 0) - t, th)).matrix() *
                          unit_increment(yy, t);
      const Vector got = unit_increment(gg, t);
      CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, want.cwiseAbs().maxCoeff()));
    }
  }

  const FieldWindow off(Window(MultiIndex{1, -1}, MultiIndex{3, 2}), 1, Clock::exponential);
  CHECK_THROWS_AS(m_forward(off, ThetaTuple({Matrix::Ones(1, 1), Matrix::Ones(1, 1)})), WindowError);
  try {
    m_forward(off, ThetaTuple({Matrix::Ones(1, 1), Matrix::Ones(1, 1)}));
  } catch (const WindowError& e) {
    CHECK(std::string(e.what()).find("[(0,-1), (3,2)]") != std::string::npos);
  }
  const FieldWindow flat(Window(MultiIndex{0, -1}, MultiIndex{0, 2}), 1, Clock::exponential);
  CHECK(m_forward(flat, ThetaTuple({Matrix::Ones(1, 1), Matrix::Ones(1, 1)})).max_abs() == 0.0);
}

TEST_CASE("m_inverse_truncated") {
  Rng rng(24);
  const ThetaTuple h = scalar_theta(1.0);
  const FieldWindow zero(Window(MultiIndex{-12}, MultiIndex{3}), 1, Clock::integer);
  TruncationPolicy p;
  p.eps = 1e-3;
  const FieldWindow yz = m_inverse_truncated(zero, h, p);
  CHECK(yz.max_abs() == 0.0);
  CHECK(yz.clock() == Clock::exponential);
  REQUIRE(yz.meta.history.size() == 1);
  CHECK(yz.meta.history[0].transform == "Minv");
  const auto d = yz.meta.history[0].depth[0];
  CHECK(yz.window() == Window(MultiIndex{-12 + 1 + d}, MultiIndex{3}));
  CHECK(yz.meta.history[0].tail_bound == doctest::Approx(2.0 * std::exp(-static_cast<double>(d))));
  CHECK(yz.meta.history[0].tail_bound <= p.eps);

  for (int rep = 0; rep < 15; ++rep) {
    const std::size_t dim = 1 + rep % 3;
    const Eigen::Index n = 1 + (rep / 3) % 3;
    const ThetaTuple th = testing::random_commuting_theta(rng, n, dim, 0.3, 1.0);
    TruncationPolicy pol;
    pol.depth.assign(dim, testing::uniform_int(rng, 0, 2));
    const Window gw = testing::random_window(rng, dim, 3 + pol.depth[0], 5 + pol.depth[0], true);
    const FieldWindow g = testing::random_field(rng, gw, n, Clock::integer);
    const FieldWindow y = m_inverse_truncated(g, th, pol);
    const FieldWindow ref = reference::m_inverse(g, th, y.window(), pol.depth);
    CHECK(testing::max_abs_diff(y, ref) <= 1e-12 * std::max(1.0, ref.max_abs()));
    const Window& yw = y.window();
    for (std::size_t i = 0; i < yw.volume(); ++i) {
      const MultiIndex t = yw.site(i);
      if (!leq(yw.lo() + MultiIndex::ones(dim), t)) continue;
      const Vector want = mat_exp_sym(star_index(t, th)).matrix() * unit_increment(g, t);
      CHECK((unit_increment(y, t) - want).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, y.max_abs()));
    }
  }

  TruncationPolicy deep;
  deep.depth = {20};
  CHECK_THROWS_AS(m_inverse_truncated(zero, h, deep), WindowError);
  CHECK_THROWS_AS(m_inverse_truncated(zero, h, deep, Window(MultiIndex{0}, MultiIndex{3})), WindowError);
  FieldWindow e = zero;
  e.set_clock(Clock::exponential);
  CHECK_THROWS_AS(m_inverse_truncated(e, h, p), ConfigError);
}

TEST_CASE("bijection round-trips under finite-support anchoring") {
  Rng rng(25);
  TruncationPolicy zero_depth;
  for (int rep = 0; rep < 15; ++rep) {
    const std::size_t dim = 1 + rep % 3;
    const Eigen::Index n = 1 + (rep / 3) % 3;
    zero_depth.depth.assign(dim, 0);
    const ThetaTuple th = testing::random_commuting_theta(rng, n, dim, 0.3, 1.0);

    // M o M^{-1} = id for G vanishing on the hyperplanes; the output window
    // must contain 0, so G starts at or below -1.
    MultiIndex lo(dim), hi(dim);
    for (std::size_t l = 0; l < dim; ++l) {
      lo[l] = -testing::uniform_int(rng, 1, 3);
      hi[l] = testing::uniform_int(rng, 0, 2);
    }
    const FieldWindow g = zero_on_hyperplanes(testing::random_field(rng, Window(lo, hi), n, Clock::integer));
    const FieldWindow y = m_inverse_truncated(g, th, zero_depth);
    const FieldWindow g2 = m_forward(y, th);
    CHECK(testing::rel_diff(g2, g.restrict(g2.window())) <= 1e-10);

    // M^{-1} o M = id for Y vanishing on the lower faces of its window.
    const FieldWindow yy =
        testing::zero_lower_faces(testing::random_field(rng, testing::random_window(rng, dim, 2, 5, true), n, Clock::exponential));
    const FieldWindow back = m_inverse_truncated(m_forward(yy, th), th, zero_depth);
    CHECK(testing::rel_diff(back, yy.restrict(back.window())) <= 1e-10);
  }
}

TEST_CASE("order of summation does not matter") {
  // Axis permutation of the field and theta commutes with m_forward.
  Rng rng(26);
  const ThetaTuple th = testing::random_commuting_theta(rng, 2, 2, 0.3, 1.0);
  const ThetaTuple swapped({th[1].matrix(), th[0].matrix()});
  const FieldWindow y = testing::random_field(rng, Window(MultiIndex{-2, -1}, MultiIndex{2, 3}), 2, Clock::exponential);
  FieldWindow yt(Window(MultiIndex{-1, -2}, MultiIndex{3, 2}), 2, Clock::exponential);
  for (std::size_t i = 0; i < y.window().volume(); ++i) {
    const MultiIndex t = y.window().site(i);
    yt.at(MultiIndex{t[1], t[0]}) = y.at_linear(i);
  }
  const FieldWindow g = m_forward(y, th), gt = m_forward(yt, swapped);
  double diff = 0.0;
  for (std::size_t i = 0; i < g.window().volume(); ++i) {
    const MultiIndex t = g.window().site(i);
    diff = std::max(diff, (g.at_linear(i) - gt.at(MultiIndex{t[1], t[0]})).cwiseAbs().maxCoeff());
  }
  CHECK(diff <= 1e-13 * std::max(1.0, g.max_abs()));
}

TEST_CASE("truncation depth") {
  const ThetaTuple one({Matrix::Identity(2, 2), 3 * Matrix::Identity(2, 2)});
  const Window w(MultiIndex{0, 0}, MultiIndex{1, 1});
  // 2^N e^{-M} <= eps with eps = e^{-10} 2^N gives M = 10.
  CHECK(truncation_depth(one, std::exp(-10.0) * 4.0, w) == std::vector<std::int64_t>{10, 10});
  CHECK(truncation_depth(one, 4.0, w) == std::vector<std::int64_t>{0, 0});
  CHECK(truncation_depth(one, 100.0, w) == std::vector<std::int64_t>{0, 0});
  for (double eps : {1e-3, 1e-6, 1e-8, 1e-12}) {
    const auto d = truncation_depth(one, eps, w);
    CHECK(tail_bound(one, d) <= eps * (1 + 1e-9));
    CHECK(tail_bound(one, {d[0] - 1, d[1] - 1}) > eps);
  }
  const std::vector<std::int64_t> m{7, 7}, m2{14, 14};
  CHECK(tail_bound(one, m2) == doctest::Approx(tail_bound(one, m) * std::exp(-7.0)).epsilon(1e-12));
  CHECK_THROWS_AS(truncation_depth(one, 0.0, w), ConfigError);
  TruncationPolicy p;
  p.depth = {1};
  CHECK_THROWS_AS(resolve_depth(p, one, w), ConfigError);
}

TEST_CASE("exp tables reject overflow") {
  const ThetaTuple big({Matrix::Constant(1, 1, 50.0)});
  CHECK_THROWS_AS(ExpTable(big, Window(MultiIndex{0}, MultiIndex{20}), +1), NumericError);
}

}
