#include <cmath>

#include "doctest.h"
#include "fieldcorr/error.hpp"
#include "fieldcorr/gaussian.hpp"
#include "fieldcorr/parallel.hpp"
#include "fieldcorr/stats.hpp"
#include "support.hpp"

using namespace fieldcorr;

namespace {

double cov1(std::vector<double> t, std::vector<double> s, std::vector<double> h) { return fbs_cov(t, s, h); }

}  // namespace

TEST_SUITE("gaussian") {

TEST_CASE("fbs_cov") {
  CHECK(cov1({2.0, 3.0}, {2.0, 3.0}, {0.3, 0.8}) ==
        doctest::Approx(std::pow(2.0, 0.6) * std::pow(3.0, 1.6)).epsilon(1e-14));
  CHECK(cov1({2.0}, {1.0}, {0.5}) == 1.0);
  CHECK(cov1({0.0, 2.5}, {1.0, 1.5}, {0.3, 0.6}) == 0.0);
  CHECK(cov1({1.5, 2.5}, {3.0, 0.0}, {0.3, 0.6}) == 0.0);
  for (double t : {0.5, 1.0, 2.0, 7.0})
    for (double s : {0.25, 1.0, 3.0}) CHECK(cov1({t}, {s}, {0.5}) == doctest::Approx(std::min(t, s)).epsilon(1e-15));
  CHECK_THROWS_AS(cov1({1.0}, {1.0}, {1.2}), ConfigError);
  CHECK_THROWS_AS(cov1({1.0}, {1.0}, {0.0}), ConfigError);
  CHECK_THROWS_AS(cov1({1.0, 1.0}, {1.0}, {0.5}), ConfigError);
}

TEST_CASE("build_cov_matrix") {
  const Matrix one = build_cov_matrix(Matrix::Ones(1, 3), Vector::LinSpaced(3, 0.2, 0.9));
  CHECK(one(0, 0) == 1.0);

  Matrix pts(3, 1);
  pts << 1, 2, 3;
  Matrix want(3, 3);
  want << 1, 1, 1, 1, 2, 2, 1, 2, 3;
  CHECK(build_cov_matrix(pts, Vector::Constant(1, 0.5)) == want);

  Matrix p2(3, 2);
  p2 << 1, 1, 0, 2, 2, 1;
  const Matrix c = build_cov_matrix(p2, Vector::Constant(2, 0.7));
  CHECK(c.row(1).isZero(0.0));
  CHECK(c.col(1).isZero(0.0));
  CHECK(c == c.transpose());
}

TEST_CASE("grid points") {
  const Window w(MultiIndex{-1, 0}, MultiIndex{0, 1});
  const Matrix ip = grid_points(w, Clock::integer);
  CHECK(ip(0, 0) == -1.0);
  CHECK(ip(3, 1) == 1.0);
  const Matrix ep = grid_points(w, Clock::exponential);
  CHECK(ep(0, 0) == std::exp(-1.0));
  CHECK(ep(0, 1) == 1.0);
  CHECK_THROWS_AS(grid_points(Window(MultiIndex{800}, MultiIndex{800}), Clock::exponential), NumericError);
}

TEST_CASE("sub-streams are keyed, not ordered") {
  SubStream a(5, 2, 1), b(5, 2, 1), c(5, 3, 1), d(5, 2, 0);
  const double a0 = a.normal();
  CHECK(a0 == b.normal());
  CHECK(a0 != c.normal());
  CHECK(a0 != d.normal());
  SubStream e(6, 2, 1);
  CHECK(a0 != e.normal());
}

TEST_CASE("sample_gaussian_field") {
  const std::size_t reps = 10000;
  const Matrix eye = Matrix::Identity(3, 3);
  Vector ss = Vector::Zero(3);
  for (std::size_t r = 0; r < reps; ++r) {
    SubStream rng(1, r, 0);
    const Vector v = sample_gaussian_field(eye, rng);
    ss += v.cwiseProduct(v);
  }
  ss /= static_cast<double>(reps);
  for (Eigen::Index k = 0; k < 3; ++k) CHECK(std::abs(ss(k) - 1.0) <= 3.0 * std::sqrt(2.0 / reps));

  SubStream z(1, 0, 0);
  CHECK(sample_gaussian_field(Matrix::Zero(4, 4), z).isZero(0.0));

  // H = 1 on the only axis: cov = t s, rank one.
  Matrix pts(4, 1);
  pts << 1, 2, 3, 4;
  const Matrix c = build_cov_matrix(pts, Vector::Constant(1, 1.0));
  const GaussianFactor f(c);
  CHECK(f.clipped() >= 1);
  const Vector dir = pts.col(0).normalized();
  for (std::uint64_t r = 0; r < 50; ++r) {
    SubStream rng(2, r, 0);
    Vector v(4);
    f.sample(rng, v);
    CHECK((v - dir * dir.dot(v)).norm() <= 1e-6);
  }

  Matrix indef(2, 2);
  indef << 1, 2, 2, 1;
  CHECK_THROWS_AS(GaussianFactor{indef}, NumericError);
  Matrix zero_var(2, 2);
  zero_var << 0, 1, 1, 1;
  CHECK_THROWS_AS(GaussianFactor{zero_var}, NumericError);
}

TEST_CASE("sheet sampling") {
  const HurstSpec h((Matrix(1, 2) << 0.3, 0.7).finished());
  const Window w(MultiIndex{0, -1}, MultiIndex{2, 2});
  const FieldWindow s = sample_multivariate_sheet(MixingMatrix::identity(1), h, w, Clock::integer, 4, 0);
  for (std::size_t i = 0; i < w.volume(); ++i) {
    const MultiIndex t = w.site(i);
    if (t[0] == 0 || t[1] == 0) CHECK(s.at_linear(i)(0) == 0.0);
    else CHECK(s.at_linear(i)(0) != 0.0);
  }
  CHECK(s.meta.seed == std::optional<std::uint64_t>(4));

  // A = I, n = 1 is the plain sheet drawn from component stream 0.
  const GaussianFactor f(build_cov_matrix(grid_points(w, Clock::integer), h.component(0)));
  SubStream rng(4, 0, 0);
  Vector plain(static_cast<Eigen::Index>(w.volume()));
  f.sample(rng, plain);
  for (std::size_t i = 0; i < w.volume(); ++i) CHECK(s.at_linear(i)(0) == plain(static_cast<Eigen::Index>(i)));

  // G = A B componentwise.
  const HurstSpec h2((Matrix(2, 2) << 0.3, 0.7, 0.5, 0.5).finished());
  Matrix a(2, 2);
  a << 1, 2, -1, 0.5;
  const FieldWindow g = sample_multivariate_sheet(MixingMatrix(a), h2, w, Clock::integer, 4, 1);
  const FieldWindow b = sample_multivariate_sheet(MixingMatrix::identity(2), h2, w, Clock::integer, 4, 1);
  for (std::size_t i = 0; i < w.volume(); ++i)
    CHECK((g.at_linear(i) - a * b.at_linear(i)).cwiseAbs().maxCoeff() <= 1e-15);

  CHECK_THROWS_AS(SheetSampler(MixingMatrix::identity(1), h, Window(MultiIndex{1, 1}, MultiIndex{70, 70}), Clock::integer),
                  NumericError);
  CHECK_THROWS_AS(SheetSampler(MixingMatrix::identity(2), h, w, Clock::integer), ConfigError);
  CHECK_THROWS_AS(HurstSpec((Matrix(1, 2) << 0.3, 1.1).finished()), ConfigError);

  const SheetSampler deg(MixingMatrix::identity(1), HurstSpec((Matrix(1, 2) << 1.0, 0.5).finished()),
                         Window(MultiIndex{1, 1}, MultiIndex{3, 3}), Clock::integer);
  CHECK(deg.notes().size() == 1);
}

TEST_CASE("batches do not depend on the thread count") {
  const HurstSpec h((Matrix(2, 2) << 0.3, 0.7, 0.6, 0.4).finished());
  const SheetSampler sampler(MixingMatrix::identity(2), h, Window(MultiIndex{1, 1}, MultiIndex{4, 4}), Clock::integer);
  set_threads(1);
  const SampleBatch one = sample_sheet_batch(sampler, 77, 40);
  set_threads(3);
  const SampleBatch three = sample_sheet_batch(sampler, 77, 40);
  set_threads(1);
  for (std::size_t r = 0; r < 40; ++r)
    CHECK(std::equal(one.fields[r].values().begin(), one.fields[r].values().end(), three.fields[r].values().begin()));
}

TEST_CASE("sheet covariance matches fbs_cov within 3 standard errors") {
  const HurstSpec h((Matrix(1, 2) << 0.3, 0.7).finished());
  const Window w(MultiIndex{1, 1}, MultiIndex{3, 3});
  const SheetSampler sampler(MixingMatrix::identity(1), h, w, Clock::integer);
  const SampleBatch batch = sample_sheet_batch(sampler, 2024, 4000);
  const std::vector<MultiIndex> sites{{1, 1}, {2, 3}, {3, 2}, {3, 3}};
  const MomentEstimate est = empirical_moments(batch, sites);
  const Vector hv = h.component(0);
  for (std::size_t a = 0; a < sites.size(); ++a)
    for (std::size_t b = a; b < sites.size(); ++b) {
      const std::vector<double> ta(sites[a].begin(), sites[a].end()), tb(sites[b].begin(), sites[b].end());
      const double want = fbs_cov(ta, tb, std::span<const double>(hv.data(), 2));
      const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
      CHECK(std::abs(est.cov(ia, ib) - want) <= 3.0 * est.se_cov(ia, ib));
    }
  const Matrix ref = sheet_covariance(MixingMatrix::identity(1), h, sites, Clock::integer);
  CHECK(ref(1, 2) == doctest::Approx(cov1({2, 3}, {3, 2}, {0.3, 0.7})).epsilon(1e-15));
}

}
