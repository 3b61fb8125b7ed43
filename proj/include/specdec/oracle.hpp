#pragma once

#include <functional>
#include <map>

#include "specdec/codebook.hpp"
#include "specdec/prob.hpp"
#include "specdec/proximity.hpp"

namespace specdec {

// Exact one-step output law of a draft-and-verify round: the marginal law of
// the first emitted token, plus the law conditioned on each possible draft.
// The marginal is always the p-weighted mixture of the conditionals.
struct StepLaw {
  ProbDist law;
  std::map<TokenId, ProbDist> conditional_laws;  // keys: drafts with p > 0
};

// Enumerates the lossless acceptance rule over every (draft, accept/reject)
// outcome. The acceptance arithmetic is reimplemented here on purpose so the
// decoding module can be cross-checked against it. Errors: kCapExceeded when
// the vocabulary exceeds `cap`.
StepLaw enumerate_vanilla_step(const ProbDist& q, const ProbDist& p, int cap = 64);

// Same enumeration for the relaxed rule: per draft it rebuilds the
// divergence-bounded neighborhood and distorted target from scratch.
StepLaw enumerate_lantern_step(const ProbDist& q, const ProbDist& p,
                               const NeighborIndex& idx,
                               const DivergenceBound& bound, int cap = 64);

// Law of a full lossless speculative step run against the fixed distorted
// target of one candidate. The lossless argument makes this reproduce the
// distorted target itself, so the p-mixture over candidates stays within the
// bound of q; conditional_laws above instead record the single branch the
// decoder follows once the draft is known, whose law that argument does not
// cover.
ProbDist enumerate_candidate_distorted_law(const ProbDist& q, const ProbDist& p,
                                           const NeighborIndex& idx,
                                           const DivergenceBound& bound,
                                           TokenId candidate, int cap = 64);

// Monte Carlo frequency of the first emitted token over `trials` runs of a
// single-step decoder.
ProbDist empirical_step_law(const std::function<TokenId(Rng&)>& step, int trials,
                            std::uint64_t seed, int vocab);

}  // namespace specdec
