#include "fieldcorr/fou.hpp"

#include <sstream>

#include "fieldcorr/error.hpp"

namespace fieldcorr {

const char* fou_kind_name(FouKind k) { return k == FouKind::first ? "first" : "second"; }

FouKind parse_fou_kind(const std::string& s) {
  if (s == "first") return FouKind::first;
  if (s == "second") return FouKind::second;
  throw ConfigError("kind must be \"first\" or \"second\", got \"" + s + "\"");
}

FouGenerator::FouGenerator(const FouConfig& cfg) : cfg_(cfg) {
  const HurstSpec& h = cfg.hurst;
  if (cfg.mixing.n() != h.n())
    throw ConfigError("mixing matrix A has n = " + std::to_string(cfg.mixing.n()) +
                      ", H has n = " + std::to_string(h.n()));
  if (cfg.window.N() != h.N())
    throw ConfigError("window has N = " + std::to_string(cfg.window.N()) + ", H has N = " +
                      std::to_string(h.N()));
  if (cfg.replications < 1) throw ConfigError("replications must be >= 1");

  if (cfg.kind == FouKind::first) {
    if (!cfg.theta) throw ConfigError("fou kind first requires theta");
    theta_ = *cfg.theta;
    if (theta_.n() != h.n() || theta_.N() != h.N())
      throw ConfigError("theta (N, n) does not match H");
    theta_.require_commuting("fou first kind");
    const MultiIndex depth(resolve_depth(cfg.policy, theta_, cfg.window));
    const Window gw(cfg.window.lo() - depth - MultiIndex::ones(cfg.window.N()), cfg.window.hi());
    if (gw.volume() > cfg.max_points) {
      std::ostringstream os;
      os << "fou first kind: truncation depth " << depth.str()
         << " needs noise on " << gw.str() << " (" << gw.volume() << " points), above the cap of "
         << cfg.max_points << "; raise eps or max_points";
      throw NumericError(os.str());
    }
    solver_ = std::make_unique<StationarySolver>(theta_, cfg.policy, cfg.window);
    tail_ = solver_->tail_bound();
    sampler_ = std::make_unique<SheetSampler>(cfg.mixing, h, solver_->noise_window(), Clock::integer, cfg.max_points);
  } else {
    if (cfg.theta)
      throw ConfigError("fou kind second derives Theta_j = diag(H_j^(k)); an explicit theta is not accepted");
    theta_ = ThetaTuple::diagonal(h.matrix());
    const double defect = cfg.mixing.exp_commutation_defect(theta_);
    if (defect > kCommuteTol) {
      std::ostringstream os;
      os << "fou kind second requires A to commute with exp(s*Theta) for Theta_j = diag(H_j^(k)); "
            "relative defect "
         << defect << " exceeds " << kCommuteTol;
      throw HypothesisError(os.str(), defect);
    }
    neg_ = std::make_unique<ExpTable>(theta_, cfg.window, -1);
    sampler_ = std::make_unique<SheetSampler>(cfg.mixing, h, cfg.window, Clock::exponential, cfg.max_points);
  }
}

std::vector<std::int64_t> FouGenerator::depth() const {
  return solver_ ? solver_->depth() : std::vector<std::int64_t>(cfg_.window.N(), 0);
}

FouDraw FouGenerator::draw_with_driver(std::uint64_t replication) const {
  FieldWindow driver = sampler_->sample(cfg_.seed, replication);
  FieldWindow x;
  if (cfg_.kind == FouKind::first) {
    x = solver_->solve(driver);
  } else {
    x = kernels::apply_sitewise(driver, *neg_, Clock::integer);
    x.meta.history.push_back({"Linv", "", {}, 0.0});
  }
  x.meta.seed = cfg_.seed;
  return {std::move(x), std::move(driver)};
}

SampleBatch FouGenerator::batch() const {
  SampleBatch b;
  b.seed = cfg_.seed;
  b.fields.resize(cfg_.replications);
  const auto reps = static_cast<std::int64_t>(cfg_.replications);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t r = 0; r < reps; ++r)
    b.fields[static_cast<std::size_t>(r)] = draw(static_cast<std::uint64_t>(r));
  return b;
}

FieldWindow fou_first_kind(const FouConfig& cfg, std::uint64_t replication) {
  if (cfg.kind != FouKind::first) throw ConfigError("fou_first_kind called with kind = second");
  return FouGenerator(cfg).draw(replication);
}

FieldWindow fou_second_kind(const FouConfig& cfg, std::uint64_t replication) {
  if (cfg.kind != FouKind::second) throw ConfigError("fou_second_kind called with kind = first");
  return FouGenerator(cfg).draw(replication);
}

}  // namespace fieldcorr
