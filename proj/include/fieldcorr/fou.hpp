#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "fieldcorr/ar1.hpp"
#include "fieldcorr/gaussian.hpp"
#include "fieldcorr/transforms.hpp"

namespace fieldcorr {

enum class FouKind { first, second };

const char* fou_kind_name(FouKind k);
FouKind parse_fou_kind(const std::string& s);

struct FouConfig {
  FouKind kind = FouKind::first;
  HurstSpec hurst;
  MixingMatrix mixing;
  /// Required for the first kind; must be absent for the second kind, where
  /// Theta_j = diag(H_j^{(1)}, ..., H_j^{(n)}) is derived.
  std::optional<ThetaTuple> theta;
  Window window;
  TruncationPolicy policy;
  std::uint64_t seed = 0;
  std::size_t replications = 1;
  std::size_t max_points = kDefaultMaxGridPoints;
};

/// One replication together with the noise (first kind) or self-similar
/// field (second kind) it was built from.
struct FouDraw {
  FieldWindow x;
  FieldWindow driver;
};

/// Validates a configuration once and draws replications from it.
///
/// First kind: G = A B is sampled on the integer clock over the window the
/// stationary solution needs (output window extended downward by the
/// truncation depth plus one), then X = lamperti_inv(m_inverse_truncated(G)).
/// Second kind: Y = A B is sampled at the exponential-clock sites of the
/// output window and X = lamperti_inv(Y) with the diagonal Theta.
class FouGenerator {
public:
  explicit FouGenerator(const FouConfig& cfg);

  const FouConfig& config() const noexcept { return cfg_; }
  const ThetaTuple& theta() const noexcept { return theta_; }
  /// Zero for the second kind (no truncation).
  double tail_bound() const noexcept { return tail_; }
  std::vector<std::int64_t> depth() const;
  const std::vector<std::string>& notes() const noexcept { return sampler_->notes(); }

  FouDraw draw_with_driver(std::uint64_t replication) const;
  FieldWindow draw(std::uint64_t replication) const { return draw_with_driver(replication).x; }
  SampleBatch batch() const;

private:
  FouConfig cfg_;
  ThetaTuple theta_;
  double tail_ = 0.0;
  std::unique_ptr<StationarySolver> solver_;
  std::unique_ptr<ExpTable> neg_;
  std::unique_ptr<SheetSampler> sampler_;
};

FieldWindow fou_first_kind(const FouConfig& cfg, std::uint64_t replication);
FieldWindow fou_second_kind(const FouConfig& cfg, std::uint64_t replication);

}  // namespace fieldcorr
