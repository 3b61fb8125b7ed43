#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "specdec/codebook.hpp"
#include "specdec/model.hpp"
#include "specdec/proximity.hpp"

namespace specdec {

enum class DecodeMode { kVanilla, kLantern };

struct DecodeConfig {
  int gamma = 1;  // draft chain length per verification step
  int k = 1;      // neighborhood cardinality (lantern mode)
  DivergenceBound bound{0.05, DistanceMetricKind::kTvd};
  double tau = 1.0;
  int top_k = -1;  // -1 means the full vocabulary
  double top_p = 1.0;
  DecodeMode mode = DecodeMode::kVanilla;
  int min_target_len = 1;  // decode until the full sequence reaches this
};

// One draft-and-verify round. Exactly accepted_count + 1 tokens are emitted:
// the accepted draft prefix plus either the resampled token (on rejection)
// or the bonus token (when every draft was accepted).
struct StepOutcome {
  std::vector<TokenId> drafts;
  std::vector<double> accept_probs;  // one per draft examined
  int accepted_count = 0;
  std::optional<TokenId> resampled;
  std::optional<TokenId> bonus;
  std::vector<ProximitySet> proximity_sets;  // lantern mode, per draft examined
};

struct DecodeTrace {
  std::vector<StepOutcome> steps;
  std::vector<TokenId> output;  // prompt followed by everything emitted
  int prompt_len = 0;
  std::uint64_t rng_seed = 0;
};

// The model's next-token distribution after temperature and top-k/top-p.
ProbDist adjusted_next(const TableModel& model, const Context& ctx,
                       const DecodeConfig& cfg);

// Samples gamma tokens autoregressively from the drafter's adjusted
// distribution.
std::vector<TokenId> draft_chain(const TableModel& drafter, const Context& ctx,
                                 int gamma, const DecodeConfig& cfg, Rng& rng);

// Lossless draft-and-verify: draft t is accepted with probability
// min(1, q_t(x)/p_t(x)); the first rejection resamples from [q_t - p_t]_+
// (falling back to q_t itself when the residual is degenerate) and discards
// the rest; full acceptance samples a bonus token from the target.
StepOutcome verify_vanilla(const TableModel& target, const TableModel& drafter,
                           const Context& ctx, const std::vector<TokenId>& drafts,
                           const DecodeConfig& cfg, Rng& rng);

// Relaxed acceptance: draft t is accepted with probability
// min(1, sum_{A} q_t / p_t(x)) where A is its divergence-bounded
// neighborhood; rejection resamples from the distorted target's residual.
// The bonus token still comes from the undistorted target. idx must be built
// with exactly cfg.k.
StepOutcome verify_lantern(const TableModel& target, const TableModel& drafter,
                           const Context& ctx, const std::vector<TokenId>& drafts,
                           const NeighborIndex& idx, const DecodeConfig& cfg,
                           Rng& rng);

// Deterministic tau = 0 reduction: accept a draft iff it is the argmax of the
// distorted target built from the truncation-adjusted (not argmax-collapsed)
// target distribution; on rejection emit that argmax.
StepOutcome verify_lantern_greedy(const TableModel& target,
                                  const TableModel& drafter, const Context& ctx,
                                  const std::vector<TokenId>& drafts,
                                  const NeighborIndex& idx,
                                  const DecodeConfig& cfg);

// Repeats draft_chain + verify until the sequence reaches
// cfg.min_target_len. idx may be null in vanilla mode.
DecodeTrace decode(const TableModel& target, const TableModel& drafter,
                   const Context& prompt, const DecodeConfig& cfg,
                   const NeighborIndex* idx, std::uint64_t rng_seed);

}  // namespace specdec
