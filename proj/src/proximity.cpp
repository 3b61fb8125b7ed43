#include "specdec/proximity.hpp"

#include <cmath>

namespace specdec {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// q with `mass_to_candidate` moved from `zeroed` onto `candidate`.
ProbDist fold_mass(const ProbDist& q, TokenId candidate,
                   const std::vector<TokenId>& zeroed, double mass_to_candidate) {
  std::vector<double> out = q.mass();
  for (TokenId x : zeroed) out[static_cast<size_t>(x)] = 0.0;
  out[static_cast<size_t>(candidate)] = mass_to_candidate;
  return ProbDist(std::move(out));
}

}  // namespace

DivergenceBound::DivergenceBound(double delta, DistanceMetricKind metric)
    : delta(delta), metric(metric) {
  if (!(delta > 0.0)) throw Error(Errc::kRangeError, "delta must be > 0");
  const double cap = metric == DistanceMetricKind::kTvd ? 1.0 : kLn2;
  if (delta > cap) throw Error(Errc::kRangeError, "delta exceeds the metric's range");
}

ProximitySet build_proximity_set(const ProbDist& q, TokenId candidate,
                                 const NeighborIndex& idx,
                                 const DivergenceBound& bound) {
  if (candidate < 0 || candidate >= q.size()) {
    throw Error(Errc::kRangeError, "candidate out of range");
  }
  if (idx.vocab() != q.size()) {
    throw Error(Errc::kSizeMismatch, "neighbor index vocab != distribution vocab");
  }

  ProximitySet set;
  set.candidate = candidate;
  double cum = 0.0;
  double mass = 0.0;
  for (TokenId x : idx.neighbors(candidate)) {
    if (bound.metric == DistanceMetricKind::kTvd) {
      const double increment = x == candidate ? 0.0 : q[x];
      if (!(cum + increment < bound.delta)) break;
      cum += increment;
    } else {
      std::vector<TokenId> would_be = set.members;
      would_be.push_back(x);
      const double folded = mass + q[x];
      const double would_div = jsd(fold_mass(q, candidate, would_be, folded), q);
      if (!(would_div < bound.delta)) break;
      cum = would_div;
    }
    set.members.push_back(x);
    mass += q[x];
  }
  set.aggregated_mass = mass;
  set.realized_divergence = cum;
  return set;
}

DistortedTarget distort_target(const ProbDist& q, const ProximitySet& set) {
  if (set.members.empty() || set.members.front() != set.candidate) {
    throw Error(Errc::kInconsistentSet, "set must lead with its candidate");
  }
  double member_mass = 0.0;
  for (TokenId x : set.members) {
    if (x < 0 || x >= q.size()) {
      throw Error(Errc::kRangeError, "set member out of range");
    }
    member_mass += q[x];
  }
  if (std::abs(member_mass - set.aggregated_mass) > 1e-9) {
    throw Error(Errc::kInconsistentSet,
                "proximity set was built against a different distribution");
  }
  return DistortedTarget{
      fold_mass(q, set.candidate, set.members, set.aggregated_mass), set};
}

}  // namespace specdec
