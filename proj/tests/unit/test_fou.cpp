#include <cmath>

#include "doctest.h"
#include "fieldcorr/error.hpp"
#include "fieldcorr/fou.hpp"
#include "fieldcorr/parallel.hpp"
#include "fieldcorr/stats.hpp"
#include "support.hpp"

using namespace fieldcorr;

namespace {

FouConfig scalar_first(double h, const Window& w, std::size_t reps) {
  FouConfig c;
  c.kind = FouKind::first;
  c.hurst = HurstSpec(Matrix::Constant(1, 1, 0.5));
  c.mixing = MixingMatrix::identity(1);
  c.theta = ThetaTuple({Matrix::Constant(1, 1, h)});
  c.window = w;
  c.policy.eps = 1e-6;
  c.seed = 12;
  c.replications = reps;
  return c;
}

}  // namespace

TEST_SUITE("fou") {

TEST_CASE("first kind: zero mixing gives zero field") {
  FouConfig c = scalar_first(0.5, Window(MultiIndex{0}, MultiIndex{4}), 1);
  c.mixing = MixingMatrix(Matrix::Zero(1, 1));
  CHECK(fou_first_kind(c, 0).max_abs() == 0.0);
  CHECK_THROWS_AS(fou_second_kind(c, 0), ConfigError);
}

TEST_CASE("first kind solves the AR(1) equation with its driver") {
  testing::Rng rng(41);
  FouConfig c;
  c.kind = FouKind::first;
  c.hurst = HurstSpec((Matrix(2, 2) << 0.3, 0.6, 0.7, 0.5).finished());
  c.mixing = MixingMatrix((Matrix(2, 2) << 1, 0.5, -0.3, 1).finished());
  c.theta = testing::random_commuting_theta(rng, 2, 2, 0.8, 1.2);
  c.window = Window(MultiIndex{-1, -1}, MultiIndex{1, 1});
  c.policy.eps = 1e-6;
  c.seed = 3;
  const FouGenerator gen(c);
  CHECK(gen.tail_bound() <= c.policy.eps);
  for (std::uint64_t r = 0; r < 3; ++r) {
    const FouDraw d = gen.draw_with_driver(r);
    CHECK(d.x.window() == c.window);
    CHECK(summarize_residual(ar1_residual(d.x, d.driver, gen.theta()), d.x, d.driver, 0.0).relative() <=
          10 * c.policy.eps);
    // The driver vanishes on the hyperplanes, so M(L(X)) recovers it.
    const FieldWindow back = noise_from_stationary(d.x, gen.theta());
    CHECK(testing::rel_diff(back, d.driver.restrict(c.window)) <= 1e-10);
  }

  FouConfig no_theta = c;
  no_theta.theta.reset();
  CHECK_THROWS_AS(FouGenerator{no_theta}, ConfigError);
  FouConfig bad = c;
  bad.theta = ThetaTuple({(Matrix(2, 2) << 1, 0, 0, 2).finished(), (Matrix(2, 2) << 2, 1, 1, 2).finished()});
  CHECK_THROWS_AS(FouGenerator{bad}, HypothesisError);
  FouConfig huge = c;
  huge.policy.eps = 1e-300;
  huge.theta = ThetaTuple({0.05 * Matrix::Identity(2, 2), 0.05 * Matrix::Identity(2, 2)});
  CHECK_THROWS_AS(FouGenerator{huge}, NumericError);
}

TEST_CASE("first kind, scalar: lag-1 covariance matches the moving-average oracle") {
  const double h = 0.5;
  const FouConfig c = scalar_first(h, Window(MultiIndex{0}, MultiIndex{3}), 4000);
  const FouGenerator gen(c);
  const SampleBatch batch = gen.batch();
  // X_t = sum_{j = anchor}^{t} e^{-h (t - j)} dW_j with unit-variance
  // Brownian increments; the oracle sums the same truncated weights.
  const std::int64_t anchor = -gen.depth()[0];
  auto oracle = [&](std::int64_t t, std::int64_t s) {
    double acc = 0.0;
    for (std::int64_t j = anchor; j <= std::min(t, s); ++j)
      acc += std::exp(-h * static_cast<double>(t - j)) * std::exp(-h * static_cast<double>(s - j));
    return acc;
  };
  const MomentEstimate est = empirical_moments(batch, {MultiIndex{1}, MultiIndex{2}});
  CHECK(std::abs(est.cov(0, 1) - oracle(1, 2)) <= 3 * est.se_cov(0, 1));
  CHECK(std::abs(est.cov(0, 0) - oracle(1, 1)) <= 3 * est.se_cov(0, 0));
  CHECK(oracle(1, 2) / oracle(1, 1) == doctest::Approx(std::exp(-h)).epsilon(1e-9));
}

TEST_CASE("second kind, scalar: Ornstein-Uhlenbeck covariance e^{-|k|/2}") {
  FouConfig c;
  c.kind = FouKind::second;
  c.hurst = HurstSpec(Matrix::Constant(1, 1, 0.5));
  c.mixing = MixingMatrix::identity(1);
  c.window = Window(MultiIndex{-1}, MultiIndex{2});
  c.seed = 8;
  c.replications = 4000;
  const SampleBatch batch = FouGenerator(c).batch();
  const std::vector<MultiIndex> sites{{-1}, {0}, {1}, {2}};
  const MomentEstimate est = empirical_moments(batch, sites);
  for (Eigen::Index a = 0; a < 4; ++a)
    for (Eigen::Index b = a; b < 4; ++b)
      CHECK(std::abs(est.cov(a, b) - std::exp(-0.5 * static_cast<double>(b - a))) <= 3 * est.se_cov(a, b));
}

TEST_CASE("second kind: commutation hypothesis and the t = 0 site") {
  FouConfig c;
  c.kind = FouKind::second;
  c.hurst = HurstSpec((Matrix(2, 1) << 0.3, 0.7).finished());
  c.mixing = MixingMatrix((Matrix(2, 2) << 1, 1, 0, 1).finished());
  c.window = Window(MultiIndex{-1}, MultiIndex{1});
  CHECK_THROWS_AS(FouGenerator{c}, HypothesisError);
  try {
    FouGenerator{c};
  } catch (const HypothesisError& e) {
    CHECK(std::string(e.what()).find("commute") != std::string::npos);
    CHECK(e.defect() > 1e-10);
  }

  // Equal Hurst rows make exp(s*Theta) scalar, so any A is admissible.
  c.hurst = HurstSpec((Matrix(2, 2) << 0.4, 0.6, 0.4, 0.6).finished());
  c.window = Window(MultiIndex{-1, 0}, MultiIndex{1, 1});
  const FouGenerator gen(c);
  const FouDraw d = gen.draw_with_driver(2);
  CHECK(d.driver.clock() == Clock::exponential);
  CHECK(d.x.at(MultiIndex{0, 0}) == d.driver.at(MultiIndex{0, 0}));
  CHECK(gen.tail_bound() == 0.0);

  FouConfig explicit_theta = c;
  explicit_theta.theta = ThetaTuple({Matrix::Identity(2, 2), Matrix::Identity(2, 2)});
  CHECK_THROWS_AS(FouGenerator{explicit_theta}, ConfigError);
}

TEST_CASE("fou batches do not depend on the thread count") {
  FouConfig c = scalar_first(0.7, Window(MultiIndex{0}, MultiIndex{5}), 30);
  set_threads(1);
  const SampleBatch a = FouGenerator(c).batch();
  set_threads(3);
  const SampleBatch b = FouGenerator(c).batch();
  set_threads(1);
  for (std::size_t r = 0; r < 30; ++r)
    CHECK(std::equal(a.fields[r].values().begin(), a.fields[r].values().end(), b.fields[r].values().begin()));
}

TEST_CASE("first kind, scalar: stationarity check passes") {
  const SampleBatch batch = FouGenerator(scalar_first(0.6, Window(MultiIndex{0}, MultiIndex{2}), 3000)).batch();
  CHECK(stationarity_check(batch, {MultiIndex{1}}).pass);
}

TEST_CASE("kind names") {
  CHECK(parse_fou_kind("first") == FouKind::first);
  CHECK(std::string(fou_kind_name(FouKind::second)) == "second");
  CHECK_THROWS_AS(parse_fou_kind("third"), ConfigError);
}

}
