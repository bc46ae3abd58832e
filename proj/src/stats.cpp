#include "fieldcorr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "fieldcorr/error.hpp"

namespace fieldcorr {

namespace {

double tiny_for(double magnitude) { return 1e-12 * (1.0 + std::abs(magnitude)); }

void require_batch(const SampleBatch& batch, const char* who) {
  if (batch.replications() < 2)
    throw ConfigError(std::string(who) + ": needs at least 2 replications, got " +
                      std::to_string(batch.replications()));
  const FieldWindow& f0 = batch.fields.front();
  for (const auto& f : batch.fields)
    if (!(f.window() == f0.window()) || f.n() != f0.n())
      throw ConfigError(std::string(who) + ": replications have different windows");
}

std::string site_label(const MultiIndex& t, Eigen::Index k) {
  return t.str() + "#" + std::to_string(k);
}

}  // namespace

JackknifeResult jackknife_moments(const Matrix& samples, const MomentStatistic& stat, std::size_t groups) {
  const auto r = static_cast<std::size_t>(samples.rows());
  if (r < 2) throw ConfigError("jackknife needs at least 2 replications");
  const std::size_t g = groups == 0 ? r : std::clamp<std::size_t>(groups, 2, r);

  // Center on the full mean; covariances are shift invariant and the leave-out
  // means are shifted back below.
  const Vector center = samples.colwise().mean().transpose();
  const Matrix c = samples.rowwise() - center.transpose();

  auto moments_from = [&](const Vector& s1, const Matrix& s2, double cnt, Vector& mean, Matrix& cov) {
    const Vector m = s1 / cnt;
    mean = m + center;
    cov = (s2 - cnt * m * m.transpose()) / (cnt - 1.0);
  };

  const Vector s1 = c.colwise().sum().transpose();
  const Matrix s2 = c.transpose() * c;
  Vector mean;
  Matrix cov;
  moments_from(s1, s2, static_cast<double>(r), mean, cov);

  JackknifeResult out;
  out.estimate = stat(mean, cov);
  // Accumulate deviations from the full estimate; leave-out values differ from
  // it by O(1/R), so this avoids cancellation without storing them.
  const Eigen::Index m = out.estimate.size();
  Vector sd = Vector::Zero(m), sd2 = Vector::Zero(m);
  for (std::size_t k = 0; k < g; ++k) {
    const std::size_t b = k * r / g, e = (k + 1) * r / g;
    const auto blk = c.middleRows(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(e - b));
    const Vector g1 = s1 - blk.colwise().sum().transpose();
    const Matrix g2 = s2 - blk.transpose() * blk;
    Vector lm;
    Matrix lc;
    moments_from(g1, g2, static_cast<double>(r - (e - b)), lm, lc);
    const Vector d = stat(lm, lc) - out.estimate;
    sd += d;
    sd2 += d.cwiseProduct(d);
  }
  const double gd = static_cast<double>(g);
  const Vector ss = (sd2 - sd.cwiseProduct(sd) / gd).cwiseMax(0.0);
  out.se = (ss * (gd - 1.0) / gd).cwiseSqrt();
  return out;
}

Matrix gather(const SampleBatch& batch, const std::vector<MultiIndex>& sites) {
  const FieldWindow& f0 = batch.fields.front();
  const Eigen::Index n = f0.n();
  std::vector<std::size_t> idx;
  for (const auto& t : sites) {
    if (!f0.window().contains(t))
      throw WindowError("site " + t.str() + " lies outside batch window " + f0.window().str());
    idx.push_back(f0.window().linear(t));
  }
  Matrix v(static_cast<Eigen::Index>(batch.replications()), static_cast<Eigen::Index>(sites.size()) * n);
  for (std::size_t r = 0; r < batch.replications(); ++r)
    for (std::size_t a = 0; a < idx.size(); ++a)
      v.row(static_cast<Eigen::Index>(r)).segment(static_cast<Eigen::Index>(a) * n, n) =
          batch.fields[r].at_linear(idx[a]).transpose();
  return v;
}

MomentEstimate empirical_moments(const SampleBatch& batch, const std::vector<MultiIndex>& sites,
                                 std::size_t groups) {
  require_batch(batch, "empirical_moments");
  if (sites.empty()) throw ConfigError("empirical_moments: no sites given");
  const Matrix v = gather(batch, sites);
  const Eigen::Index q = v.cols();
  const MomentStatistic stat = [q](const Vector& m, const Matrix& c) {
    Vector out(q + q * q);
    out.head(q) = m;
    out.tail(q * q) = Eigen::Map<const Vector>(c.data(), q * q);
    return out;
  };
  const JackknifeResult jk = jackknife_moments(v, stat, groups);
  MomentEstimate est;
  est.sites = sites;
  est.n = batch.fields.front().n();
  est.mean = jk.estimate.head(q);
  est.cov = Eigen::Map<const Matrix>(jk.estimate.data() + q, q, q);
  est.se_mean = jk.se.head(q);
  est.se_cov = Eigen::Map<const Matrix>(jk.se.data() + q, q, q);
  est.degenerate = jk.se.maxCoeff() <= tiny_for(jk.estimate.cwiseAbs().maxCoeff());
  return est;
}

double EnsembleReport::max_abs_z() const {
  double m = 0.0;
  for (const auto& c : items) m = std::max(m, std::abs(c.z));
  return m;
}

double bonferroni_threshold(double z_max, std::size_t comparisons) {
  if (comparisons <= 1) return z_max;
  const boost::math::normal_distribution<double> nd;
  const double alpha = std::erfc(z_max / std::sqrt(2.0));
  return boost::math::quantile(boost::math::complement(nd, alpha / (2.0 * static_cast<double>(comparisons))));
}

std::vector<Comparison> compare_moments(const Matrix& reference, const Matrix& tested,
                                        const std::vector<std::string>& names, std::size_t groups) {
  const Eigen::Index p = reference.cols();
  if (tested.cols() != p || tested.rows() != reference.rows())
    throw ConfigError("compare_moments: sample shapes differ");
  Matrix v(reference.rows(), 2 * p);
  v << reference, tested;
  const Eigen::Index ncov = p * (p + 1) / 2;
  // Layout: [ref means, tested means, ref covs, tested covs].
  const MomentStatistic stat = [p, ncov](const Vector& m, const Matrix& c) {
    Vector out(2 * p + 2 * ncov);
    out.head(2 * p) = m;
    Eigen::Index k = 0;
    for (Eigen::Index a = 0; a < p; ++a)
      for (Eigen::Index b = a; b < p; ++b, ++k) {
        out(2 * p + k) = c(a, b);
        out(2 * p + ncov + k) = c(p + a, p + b);
      }
    return out;
  };
  // Jackknife the differences directly so the pairing between the two sides
  // enters the standard error.
  const MomentStatistic diff = [&](const Vector& m, const Matrix& c) {
    const Vector s = stat(m, c);
    Vector d(p + ncov);
    d.head(p) = s.segment(p, p) - s.head(p);
    d.tail(ncov) = s.segment(2 * p + ncov, ncov) - s.segment(2 * p, ncov);
    return d;
  };
  const JackknifeResult jd = jackknife_moments(v, diff, groups);
  const Vector full = stat(v.colwise().mean().transpose(),
                           ((v.rowwise() - v.colwise().mean()).transpose() * (v.rowwise() - v.colwise().mean())) /
                               static_cast<double>(v.rows() - 1));
  std::vector<Comparison> out;
  out.reserve(static_cast<std::size_t>(p + ncov));
  auto push = [&](std::string label, double ref, double tst, Eigen::Index k) {
    Comparison c;
    c.label = std::move(label);
    c.reference = ref;
    c.empirical = tst;
    c.se = jd.se(k);
    const double d = jd.estimate(k);
    const double tiny = tiny_for(std::max(std::abs(ref), std::abs(tst)));
    if (c.se <= tiny) {
      c.degenerate = true;
      c.z = std::abs(d) <= tiny ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), d);
    } else {
      c.z = d / c.se;
    }
    out.push_back(std::move(c));
  };
  for (Eigen::Index a = 0; a < p; ++a)
    push("mean[" + names[static_cast<std::size_t>(a)] + "]", full(a), full(p + a), a);
  Eigen::Index k = 0;
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = a; b < p; ++b, ++k)
      push("cov[" + names[static_cast<std::size_t>(a)] + "," + names[static_cast<std::size_t>(b)] + "]",
           full(2 * p + k), full(2 * p + ncov + k), p + k);
  return out;
}

void finalize_report(EnsembleReport& r, const CheckOptions& opt) {
  r.z_max = opt.z_max;
  r.bonferroni = opt.bonferroni;
  r.z_threshold = opt.bonferroni ? bonferroni_threshold(opt.z_max, r.items.size()) : opt.z_max;
  r.pass = std::all_of(r.items.begin(), r.items.end(),
                       [&](const Comparison& c) { return std::abs(c.z) <= r.z_threshold; });
}

namespace {

std::vector<MultiIndex> base_sites(const Window& w, const MultiIndex& s, std::size_t max_sites) {
  std::vector<MultiIndex> out;
  for (std::size_t i = 0; i < w.volume() && out.size() < max_sites; ++i) {
    const MultiIndex t = w.site(i);
    if (w.contains(t + s)) out.push_back(t);
  }
  return out;
}

std::vector<std::string> names_for(const std::vector<MultiIndex>& sites, Eigen::Index n) {
  std::vector<std::string> names;
  for (const auto& t : sites)
    for (Eigen::Index k = 0; k < n; ++k) names.push_back(site_label(t, k));
  return names;
}

}  // namespace

EnsembleReport stationarity_check(const SampleBatch& batch, const std::vector<MultiIndex>& shifts,
                                  const CheckOptions& opt) {
  require_batch(batch, "stationarity_check");
  const Window& w = batch.fields.front().window();
  const Eigen::Index n = batch.fields.front().n();
  EnsembleReport rep;
  rep.statistic = "stationarity";
  rep.replications = batch.replications();
  for (const auto& s : shifts) {
    if (s.size() != w.N()) throw ConfigError("shift " + s.str() + " has wrong length");
    const auto base = base_sites(w, s, opt.max_sites);
    if (base.empty()) throw WindowError("shift " + s.str() + " leaves window " + w.str());
    std::vector<MultiIndex> moved;
    for (const auto& t : base) {
      moved.push_back(t + s);
      rep.site_pairs.push_back(t.str() + "->" + moved.back().str());
    }
    auto items = compare_moments(gather(batch, base), gather(batch, moved), names_for(base, n), opt.groups);
    for (auto& c : items) {
      c.label = "shift" + s.str() + ":" + c.label;
      rep.items.push_back(std::move(c));
    }
  }
  finalize_report(rep, opt);
  return rep;
}

EnsembleReport self_similarity_check(const SampleBatch& batch, const MultiIndex& s, const ThetaTuple& theta,
                                     const CheckOptions& opt) {
  require_batch(batch, "self_similarity_check");
  const Window& w = batch.fields.front().window();
  const Eigen::Index n = batch.fields.front().n();
  if (s.size() != w.N() || theta.N() != w.N() || theta.n() != n)
    throw ConfigError("self_similarity_check: shift/theta dimensions do not match the batch");
  const auto base = base_sites(w, s, opt.max_sites);
  if (base.empty()) throw WindowError("shift " + s.str() + " leaves window " + w.str());
  std::vector<MultiIndex> moved;
  EnsembleReport rep;
  rep.statistic = "self_similarity";
  rep.replications = batch.replications();
  for (const auto& t : base) {
    moved.push_back(t + s);
    rep.site_pairs.push_back(moved.back().str() + "<->exp(s*Theta)" + t.str());
  }
  // Reference side: exp(s*Theta) Y_{e^t}, applied per site block.
  Matrix ref = gather(batch, base);
  const Matrix e = mat_exp_sym(star_index(s, theta)).matrix();
  for (std::size_t a = 0; a < base.size(); ++a) {
    auto blk = ref.middleCols(static_cast<Eigen::Index>(a) * n, n);
    blk = (blk * e.transpose()).eval();
  }
  auto items = compare_moments(ref, gather(batch, moved), names_for(base, n), opt.groups);
  for (auto& c : items) {
    c.label = "scale" + s.str() + ":" + c.label;
    rep.items.push_back(std::move(c));
  }
  finalize_report(rep, opt);
  return rep;
}

EnsembleReport increment_stationarity_check(const SampleBatch& batch, const std::vector<MultiIndex>& shifts,
                                            const CheckOptions& opt) {
  require_batch(batch, "increment_stationarity_check");
  SampleBatch inc;
  inc.seed = batch.seed;
  inc.fields.reserve(batch.replications());
  for (const auto& f : batch.fields) inc.fields.push_back(increment_field(f));
  EnsembleReport rep = stationarity_check(inc, shifts, opt);
  rep.statistic = "increment_stationarity";
  return rep;
}

EnsembleReport covariance_check(const SampleBatch& batch, const std::vector<MultiIndex>& sites,
                                const Matrix& reference_cov, const CheckOptions& opt) {
  const MomentEstimate est = empirical_moments(batch, sites, opt.groups);
  const Eigen::Index q = est.mean.size();
  if (reference_cov.rows() != q || reference_cov.cols() != q)
    throw ConfigError("covariance_check: reference covariance must be " + std::to_string(q) + "x" +
                      std::to_string(q));
  const auto names = names_for(sites, est.n);
  EnsembleReport rep;
  rep.statistic = "covariance";
  rep.replications = batch.replications();
  for (const auto& t : sites) rep.site_pairs.push_back(t.str());
  auto push = [&](std::string label, double emp, double ref, double se) {
    Comparison c;
    c.label = std::move(label);
    c.empirical = emp;
    c.reference = ref;
    c.se = se;
    const double d = emp - ref;
    const double tiny = tiny_for(std::max(std::abs(emp), std::abs(ref)));
    if (se <= tiny) {
      c.degenerate = true;
      c.z = std::abs(d) <= tiny ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), d);
    } else {
      c.z = d / se;
    }
    rep.items.push_back(std::move(c));
  };
  for (Eigen::Index a = 0; a < q; ++a)
    push("mean[" + names[static_cast<std::size_t>(a)] + "]", est.mean(a), 0.0, est.se_mean(a));
  for (Eigen::Index a = 0; a < q; ++a)
    for (Eigen::Index b = a; b < q; ++b)
      push("cov[" + names[static_cast<std::size_t>(a)] + "," + names[static_cast<std::size_t>(b)] + "]",
           est.cov(a, b), reference_cov(a, b), est.se_cov(a, b));
  finalize_report(rep, opt);
  return rep;
}

std::vector<MultiIndex> unit_shifts(std::size_t dim) {
  std::vector<MultiIndex> out;
  for (std::size_t l = 0; l < dim; ++l) out.push_back(MultiIndex::unit(dim, l));
  return out;
}

}  // namespace fieldcorr
