#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "specdec/error.hpp"
#include "specdec/rng.hpp"

namespace specdec {

// Index into the active vocabulary, 0 <= id < V.
using TokenId = std::int32_t;

enum class DistanceMetricKind { kTvd, kJsd };

// Dense probability vector over a vocabulary. Entries are nonnegative and
// sum to 1 within kNormTolerance; a constructor input further off than that
// is renormalized silently. Immutable after construction.
class ProbDist {
 public:
  static constexpr double kNormTolerance = 1e-9;

  ProbDist() = default;
  // Throws kNegativeMass / kAllZero on invalid input.
  explicit ProbDist(std::vector<double> mass);

  int size() const { return static_cast<int>(mass_.size()); }
  double operator[](TokenId t) const { return mass_[static_cast<size_t>(t)]; }
  const std::vector<double>& mass() const { return mass_; }

  // Lowest id wins ties.
  TokenId argmax() const;

  friend bool operator==(const ProbDist&, const ProbDist&) = default;

 private:
  std::vector<double> mass_;
};

// Scales the input to unit sum. Errors: kAllZero, kNegativeMass.
ProbDist normalize(const std::vector<double>& raw);

// The positive-part residual [q - p]_+, renormalized. Returns nullopt when
// max(q - p, 0) has zero total mass, i.e. q == p elementwise; the caller
// chooses the fallback. Errors: kSizeMismatch.
std::optional<ProbDist> residual_plus(const ProbDist& q, const ProbDist& p);

// Total variation distance, (1/2) * sum |a - b|. In [0, 1].
double tvd(const ProbDist& a, const ProbDist& b);

// Jensen-Shannon divergence with natural log: (1/2)KL(a||m) + (1/2)KL(b||m),
// m = (a+b)/2, with 0*log(0/.) = 0. In [0, ln 2].
double jsd(const ProbDist& a, const ProbDist& b);

// tau > 0: mass^(1/tau) renormalized (tau == 1 is the identity);
// tau == 0: one-hot at the argmax, ties to the lowest id.
ProbDist apply_temperature(const ProbDist& d, double tau);

// Keeps the top_k highest-mass tokens, then the shortest descending-mass
// prefix whose cumulative (original) mass reaches top_p; zeroes the rest and
// renormalizes. Ties break toward the lowest id. Pre: 1 <= top_k <= V,
// 0 < top_p <= 1.
ProbDist truncate_top_k_p(const ProbDist& d, int top_k, double top_p);

// Draws one token; pure in (d, rng state).
TokenId sample(const ProbDist& d, Rng& rng);

// Token ids sorted by (mass descending, id ascending).
std::vector<TokenId> tokens_by_mass(const ProbDist& d);

}  // namespace specdec
