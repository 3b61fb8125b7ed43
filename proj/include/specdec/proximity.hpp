#pragma once

#include <vector>

#include "specdec/codebook.hpp"
#include "specdec/prob.hpp"

namespace specdec {

// Upper bound on the divergence a distorted target may incur.
// delta must be strictly positive and at most 1 (TVD) / ln 2 (JSD).
struct DivergenceBound {
  double delta = 0.05;
  DistanceMetricKind metric = DistanceMetricKind::kTvd;

  DivergenceBound(double delta, DistanceMetricKind metric);
};

// The divergence-bounded neighborhood of a candidate token: the greedy
// distance-ordered prefix of its k-nearest list whose induced distortion
// stays strictly below the bound.
struct ProximitySet {
  TokenId candidate = 0;
  std::vector<TokenId> members;   // candidate first, then by distance order
  double aggregated_mass = 0.0;   // sum of q over members
  double realized_divergence = 0.0;
};

// The target distribution with every member's mass moved onto the candidate:
// dist(candidate) = aggregated_mass, dist(x) = 0 for other members,
// dist(x) = q(x) elsewhere.
struct DistortedTarget {
  ProbDist dist;
  ProximitySet source_set;
};

// Scans the candidate's neighbor list in increasing distance order (the
// candidate itself leads and always enters, its increment being 0) and adds
// a token iff the cumulative divergence would stay strictly below the bound,
// stopping at the first violation. Under TVD the increment for a non-self
// token x is exactly q(x); under JSD the would-be distorted distribution is
// built and measured in full.
ProximitySet build_proximity_set(const ProbDist& q, TokenId candidate,
                                 const NeighborIndex& idx,
                                 const DivergenceBound& bound);

// Materializes the distorted target for a set built against this same q.
// Errors: kInconsistentSet if the set's aggregated mass disagrees with q.
DistortedTarget distort_target(const ProbDist& q, const ProximitySet& set);

}  // namespace specdec
