#include "fieldcorr/gaussian.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "fieldcorr/error.hpp"

namespace fieldcorr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

HurstSpec::HurstSpec(Matrix h) : h_(std::move(h)) {
  if (h_.rows() < 1 || h_.cols() < 1) throw ConfigError("Hurst array must be at least 1x1 (n x N)");
  for (Eigen::Index k = 0; k < h_.rows(); ++k)
    for (Eigen::Index j = 0; j < h_.cols(); ++j)
      if (!(h_(k, j) > 0.0 && h_(k, j) <= 1.0)) {
        std::ostringstream os;
        os << "Hurst index H[" << k << "][" << j << "] = " << h_(k, j) << " is outside (0, 1]";
        throw ConfigError(os.str());
      }
}

bool HurstSpec::has_degenerate_entry() const { return (h_.array() == 1.0).any(); }

MixingMatrix::MixingMatrix(Matrix a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols() || a_.rows() < 1) throw ConfigError("mixing matrix A must be square");
  if (!a_.allFinite()) throw ConfigError("mixing matrix A has non-finite entries");
}

double MixingMatrix::exp_commutation_defect(const ThetaTuple& theta) const {
  if (theta.n() != a_.rows()) throw ConfigError("mixing matrix and theta have different n");
  const double na = operator_norm(a_);
  if (na == 0.0) return 0.0;
  double defect = 0.0;
  for (std::size_t j = 0; j < theta.N(); ++j) {
    const Matrix e = mat_exp_sym(theta[j]).matrix();
    defect = std::max(defect, operator_norm(a_ * e - e * a_) / (na * operator_norm(e)));
  }
  return defect;
}

SubStream::SubStream(std::uint64_t seed, std::uint64_t replication, std::uint64_t component) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ splitmix64(replication + 0x632BE59BD9B4E019ULL));
  h = splitmix64(h ^ splitmix64(component + 0x8CB92BA72F3D8DD7ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(replication),
                    static_cast<std::uint32_t>(component)};
  engine_.seed(seq);
}

double fbs_cov(std::span<const double> t, std::span<const double> s, std::span<const double> h) {
  if (t.size() != h.size() || s.size() != h.size())
    throw ConfigError("fbs_cov: points and Hurst index have different lengths");
  double prod = 1.0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    if (!(h[j] > 0.0 && h[j] <= 1.0))
      throw ConfigError("fbs_cov: Hurst index " + std::to_string(h[j]) + " is outside (0, 1]");
    const double e = 2.0 * h[j];
    prod *= std::pow(std::abs(t[j]), e) + std::pow(std::abs(s[j]), e) - std::pow(std::abs(t[j] - s[j]), e);
  }
  return std::ldexp(prod, -static_cast<int>(h.size()));
}

Matrix build_cov_matrix(const Matrix& points, const Vector& h) {
  if (points.cols() != h.size())
    throw ConfigError("build_cov_matrix: points have " + std::to_string(points.cols()) +
                      " coordinates, H has " + std::to_string(h.size()));
  if (!points.allFinite()) throw NumericError("build_cov_matrix: non-finite grid point");
  const Eigen::Index p = points.rows();
  const std::size_t dim = static_cast<std::size_t>(points.cols());
  Matrix cov(p, p);
  std::vector<double> a(dim), b(dim);
  const std::span<const double> hs(h.data(), dim);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (std::size_t l = 0; l < dim; ++l) a[l] = points(i, static_cast<Eigen::Index>(l));
    for (Eigen::Index k = 0; k <= i; ++k) {
      for (std::size_t l = 0; l < dim; ++l) b[l] = points(k, static_cast<Eigen::Index>(l));
      cov(i, k) = cov(k, i) = fbs_cov(a, b, hs);
    }
  }
  if (!cov.allFinite()) throw NumericError("build_cov_matrix: covariance overflows double range");
  return cov;
}

Matrix sheet_covariance(const MixingMatrix& a, const HurstSpec& h, const std::vector<MultiIndex>& sites,
                        Clock clock) {
  if (a.n() != h.n()) throw ConfigError("sheet_covariance: A and H have different n");
  const Eigen::Index n = h.n();
  const auto k = static_cast<Eigen::Index>(sites.size());
  Matrix pts(k, static_cast<Eigen::Index>(h.N()));
  for (Eigen::Index i = 0; i < k; ++i) {
    const MultiIndex& t = sites[static_cast<std::size_t>(i)];
    if (t.size() != h.N()) throw ConfigError("sheet_covariance: site " + t.str() + " has wrong length");
    for (std::size_t l = 0; l < h.N(); ++l) {
      const double c = static_cast<double>(t[l]);
      pts(i, static_cast<Eigen::Index>(l)) = clock == Clock::integer ? c : std::exp(c);
    }
  }
  std::vector<Matrix> per(static_cast<std::size_t>(n));
  for (Eigen::Index q = 0; q < n; ++q) per[static_cast<std::size_t>(q)] = build_cov_matrix(pts, h.component(q));
  Matrix cov(k * n, k * n);
  for (Eigen::Index x = 0; x < k; ++x)
    for (Eigen::Index y = 0; y < k; ++y) {
      Vector d(n);
      for (Eigen::Index q = 0; q < n; ++q) d(q) = per[static_cast<std::size_t>(q)](x, y);
      cov.block(x * n, y * n, n, n) = a.matrix() * d.asDiagonal() * a.matrix().transpose();
    }
  return cov;
}

Matrix grid_points(const Window& window, Clock clock) {
  Matrix pts(static_cast<Eigen::Index>(window.volume()), static_cast<Eigen::Index>(window.N()));
  for (std::size_t i = 0; i < window.volume(); ++i) {
    const MultiIndex t = window.site(i);
    for (std::size_t l = 0; l < window.N(); ++l) {
      const double c = static_cast<double>(t[l]);
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) =
          clock == Clock::integer ? c : std::exp(c);
    }
  }
  if (!pts.allFinite())
    throw NumericError("exponential-clock grid " + window.str() + " overflows double range");
  return pts;
}

GaussianFactor::GaussianFactor(const Matrix& cov) : size_(cov.rows()) {
  if (cov.rows() != cov.cols()) throw ConfigError("covariance must be square");
  if (!cov.allFinite()) throw NumericError("covariance has non-finite entries");
  const double scale = operator_norm(cov);
  if (operator_norm(cov - cov.transpose()) > kSymmetryTol * (scale > 0 ? scale : 1.0))
    throw ConfigError("covariance is not symmetric");
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    if (cov(i, i) > 0.0) {
      active_.push_back(i);
    } else if (cov(i, i) < -1e-10 * scale || cov.row(i).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw NumericError("covariance is indefinite: row " + std::to_string(i) +
                         " has zero variance but nonzero covariance");
    }
  }
  const auto m = static_cast<Eigen::Index>(active_.size());
  if (m == 0) {
    l_.resize(0, 0);
    return;
  }
  Matrix sub(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = cov(active_[a], active_[b]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sub + sub.transpose()));
  if (es.info() != Eigen::Success) throw NumericError("covariance eigendecomposition failed");
  Vector lam = es.eigenvalues();
  if (lam(0) < -1e-10 * scale) {
    std::ostringstream os;
    os << "covariance is indefinite beyond tolerance: smallest eigenvalue " << lam(0)
       << ", norm " << scale;
    throw NumericError(os.str());
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    if (lam(k) <= 0.0) {
      lam(k) = 0.0;
      ++clipped_;
    }
  }
  l_ = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

void GaussianFactor::sample(SubStream& rng, Eigen::Ref<Vector> out) const {
  out.setZero();
  if (l_.cols() == 0) return;
  Vector z(l_.cols());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = rng.normal();
  const Vector y = l_ * z;
  for (std::size_t a = 0; a < active_.size(); ++a) out(active_[a]) = y(static_cast<Eigen::Index>(a));
}

Vector sample_gaussian_field(const Matrix& cov, SubStream& rng) {
  const GaussianFactor f(cov);
  Vector out(cov.rows());
  f.sample(rng, out);
  return out;
}

SheetSampler::SheetSampler(const MixingMatrix& a, const HurstSpec& h, const Window& window, Clock clock,
                           std::size_t max_points)
    : a_(a.matrix()), window_(window), clock_(clock) {
  if (a.n() != h.n())
    throw ConfigError("mixing matrix is " + std::to_string(a.n()) + "x" + std::to_string(a.n()) +
                      " but H has n = " + std::to_string(h.n()) + " components");
  if (window.N() != h.N())
    throw ConfigError("window has N = " + std::to_string(window.N()) + " but H has N = " +
                      std::to_string(h.N()));
  if (window.volume() > max_points)
    throw NumericError("grid of " + std::to_string(window.volume()) + " points exceeds the cap of " +
                       std::to_string(max_points) + " (dense factorization is cubic)");
  const Matrix pts = grid_points(window, clock);
  std::map<std::vector<double>, std::size_t> seen;
  for (Eigen::Index k = 0; k < h.n(); ++k) {
    const Vector hk = h.component(k);
    std::vector<double> key(hk.data(), hk.data() + hk.size());
    auto it = seen.find(key);
    if (it == seen.end()) {
      factors_.emplace_back(build_cov_matrix(pts, hk));
      it = seen.emplace(key, factors_.size() - 1).first;
      if (factors_.back().clipped() > 0) {
        std::ostringstream os;
        os << "component " << k << ": covariance is rank deficient (" << factors_.back().clipped()
           << " eigenvalues clipped to 0)";
        notes_.push_back(os.str());
      }
    }
    factor_of_.push_back(it->second);
  }
}

FieldWindow SheetSampler::sample(std::uint64_t seed, std::uint64_t replication) const {
  const auto n = static_cast<Eigen::Index>(factor_of_.size());
  const auto p = static_cast<Eigen::Index>(window_.volume());
  Matrix b(p, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    SubStream rng(seed, replication, static_cast<std::uint64_t>(k));
    factors_[factor_of_[static_cast<std::size_t>(k)]].sample(rng, b.col(k));
  }
  FieldWindow out(window_, n, clock_);
  for (Eigen::Index i = 0; i < p; ++i)
    out.at_linear(static_cast<std::size_t>(i)).noalias() = a_ * b.row(i).transpose();
  out.meta.seed = seed;
  return out;
}

FieldWindow sample_multivariate_sheet(const MixingMatrix& a, const HurstSpec& h, const Window& window,
                                      Clock clock, std::uint64_t seed, std::uint64_t replication,
                                      std::size_t max_points) {
  return SheetSampler(a, h, window, clock, max_points).sample(seed, replication);
}

SampleBatch sample_sheet_batch(const SheetSampler& sampler, std::uint64_t seed, std::size_t replications) {
  SampleBatch batch;
  batch.seed = seed;
  batch.fields.resize(replications);
  const auto reps = static_cast<std::int64_t>(replications);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t r = 0; r < reps; ++r)
    batch.fields[static_cast<std::size_t>(r)] = sampler.sample(seed, static_cast<std::uint64_t>(r));
  return batch;
}

}  // namespace fieldcorr
