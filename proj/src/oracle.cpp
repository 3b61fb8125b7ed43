#include "specdec/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace specdec {

namespace {

void check_cap(const ProbDist& q, const ProbDist& p, int cap) {
  if (q.size() != p.size()) {
    throw Error(Errc::kSizeMismatch, "q and p vocab sizes differ");
  }
  if (q.size() > cap) {
    throw Error(Errc::kCapExceeded, "vocabulary exceeds the enumeration cap");
  }
}

// accept-mass at the draft plus reject-mass routed through the residual of
// (target_like - p); mirrors the decoder's degenerate fallback of sampling
// target_like directly.
std::vector<double> conditional_law(const std::vector<double>& target_like,
                                    const ProbDist& p, TokenId draft,
                                    double accept_prob) {
  const size_t n = target_like.size();
  std::vector<double> cond(n, 0.0);
  cond[static_cast<size_t>(draft)] += accept_prob;
  const double reject = 1.0 - accept_prob;
  if (reject <= 0.0) return cond;

  std::vector<double> residual(n, 0.0);
  double residual_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    residual[i] = std::max(target_like[i] - p[static_cast<TokenId>(i)], 0.0);
    residual_sum += residual[i];
  }
  if (residual_sum > 0.0) {
    for (size_t i = 0; i < n; ++i) cond[i] += reject * residual[i] / residual_sum;
  } else {
    for (size_t i = 0; i < n; ++i) cond[i] += reject * target_like[i];
  }
  return cond;
}

}  // namespace

StepLaw enumerate_vanilla_step(const ProbDist& q, const ProbDist& p, int cap) {
  check_cap(q, p, cap);
  StepLaw out;
  std::vector<double> marginal(static_cast<size_t>(q.size()), 0.0);
  for (TokenId draft = 0; draft < q.size(); ++draft) {
    if (p[draft] <= 0.0) continue;
    const double accept = std::min(1.0, q[draft] / p[draft]);
    const std::vector<double> cond = conditional_law(q.mass(), p, draft, accept);
    for (size_t i = 0; i < cond.size(); ++i) marginal[i] += p[draft] * cond[i];
    out.conditional_laws.emplace(draft, ProbDist(cond));
  }
  out.law = ProbDist(std::move(marginal));
  return out;
}

namespace {

// Greedy neighborhood scan plus mass folding, redone from scratch.
std::vector<double> build_distorted(const ProbDist& q, const NeighborIndex& idx,
                                    const DivergenceBound& bound, TokenId draft) {
  std::vector<double> distorted = q.mass();
  double aggregated = 0.0;
  double divergence = 0.0;
  for (const TokenId x : idx.neighbors(draft)) {
    if (bound.metric == DistanceMetricKind::kTvd) {
      const double increment = x == draft ? 0.0 : q[x];
      if (!(divergence + increment < bound.delta)) break;
      divergence += increment;
    } else {
      std::vector<double> would_be = distorted;
      would_be[static_cast<size_t>(x)] = 0.0;
      would_be[static_cast<size_t>(draft)] = aggregated + q[x];
      const double would_div = jsd(ProbDist(would_be), q);
      if (!(would_div < bound.delta)) break;
      divergence = would_div;
    }
    aggregated += q[x];
    distorted[static_cast<size_t>(x)] = 0.0;
    distorted[static_cast<size_t>(draft)] = aggregated;
  }
  return distorted;
}

}  // namespace

StepLaw enumerate_lantern_step(const ProbDist& q, const ProbDist& p,
                               const NeighborIndex& idx,
                               const DivergenceBound& bound, int cap) {
  check_cap(q, p, cap);
  if (idx.vocab() != q.size()) {
    throw Error(Errc::kSizeMismatch, "neighbor index vocab != distribution vocab");
  }

  StepLaw out;
  std::vector<double> marginal(static_cast<size_t>(q.size()), 0.0);
  for (TokenId draft = 0; draft < q.size(); ++draft) {
    if (p[draft] <= 0.0) continue;
    const std::vector<double> distorted = build_distorted(q, idx, bound, draft);
    const double aggregated = distorted[static_cast<size_t>(draft)];
    const double accept = std::min(1.0, aggregated / p[draft]);
    const std::vector<double> cond = conditional_law(distorted, p, draft, accept);
    for (size_t i = 0; i < cond.size(); ++i) marginal[i] += p[draft] * cond[i];
    out.conditional_laws.emplace(draft, ProbDist(cond));
  }
  out.law = ProbDist(std::move(marginal));
  return out;
}

ProbDist enumerate_candidate_distorted_law(const ProbDist& q, const ProbDist& p,
                                           const NeighborIndex& idx,
                                           const DivergenceBound& bound,
                                           TokenId candidate, int cap) {
  check_cap(q, p, cap);
  if (candidate < 0 || candidate >= q.size()) {
    throw Error(Errc::kRangeError, "candidate out of range");
  }
  const std::vector<double> distorted = build_distorted(q, idx, bound, candidate);

  // A full lossless step with the distorted target: every possible draft,
  // each branch routed through the same acceptance arithmetic as above.
  std::vector<double> law(static_cast<size_t>(q.size()), 0.0);
  for (TokenId draft = 0; draft < q.size(); ++draft) {
    if (p[draft] <= 0.0) continue;
    const double accept =
        std::min(1.0, distorted[static_cast<size_t>(draft)] / p[draft]);
    const std::vector<double> cond = conditional_law(distorted, p, draft, accept);
    for (size_t i = 0; i < cond.size(); ++i) law[i] += p[draft] * cond[i];
  }
  return ProbDist(std::move(law));
}

ProbDist empirical_step_law(const std::function<TokenId(Rng&)>& step, int trials,
                            std::uint64_t seed, int vocab) {
  if (trials < 1) throw Error(Errc::kRangeError, "trials must be >= 1");
  Rng rng(seed);
  std::vector<double> counts(static_cast<size_t>(vocab), 0.0);
  for (int n = 0; n < trials; ++n) {
    const TokenId t = step(rng);
    if (t < 0 || t >= vocab) throw Error(Errc::kRangeError, "step emitted an out-of-range token");
    counts[static_cast<size_t>(t)] += 1.0;
  }
  return normalize(counts);
}

}  // namespace specdec
