#include "specdec/decode.hpp"

#include <algorithm>

namespace specdec {

namespace {

int resolve_top_k(const DecodeConfig& cfg, int vocab) {
  return cfg.top_k < 0 ? vocab : cfg.top_k;
}

double accept_probability(double q_mass, double p_mass) {
  if (p_mass <= 0.0) return q_mass > 0.0 ? 1.0 : 0.0;
  return std::min(1.0, q_mass / p_mass);
}

// Truncation without the temperature step; the lantern greedy path distorts
// the full target distribution, not its argmax collapse.
ProbDist truncated_next(const TableModel& model, const Context& ctx,
                        const DecodeConfig& cfg) {
  return truncate_top_k_p(model.next_dist(ctx), resolve_top_k(cfg, model.vocab()),
                          cfg.top_p);
}

void check_pair(const TableModel& target, const TableModel& drafter) {
  if (target.vocab() != drafter.vocab()) {
    throw Error(Errc::kSizeMismatch, "target and drafter vocab sizes differ");
  }
}

}  // namespace

ProbDist adjusted_next(const TableModel& model, const Context& ctx,
                       const DecodeConfig& cfg) {
  return truncate_top_k_p(apply_temperature(model.next_dist(ctx), cfg.tau),
                          resolve_top_k(cfg, model.vocab()), cfg.top_p);
}

std::vector<TokenId> draft_chain(const TableModel& drafter, const Context& ctx,
                                 int gamma, const DecodeConfig& cfg, Rng& rng) {
  if (gamma < 1) throw Error(Errc::kRangeError, "gamma must be >= 1");
  Context work = ctx;
  std::vector<TokenId> drafts;
  drafts.reserve(gamma);
  for (int t = 0; t < gamma; ++t) {
    const TokenId x = sample(adjusted_next(drafter, work, cfg), rng);
    drafts.push_back(x);
    work.push_back(x);
  }
  return drafts;
}

StepOutcome verify_vanilla(const TableModel& target, const TableModel& drafter,
                           const Context& ctx, const std::vector<TokenId>& drafts,
                           const DecodeConfig& cfg, Rng& rng) {
  check_pair(target, drafter);
  if (drafts.empty()) throw Error(Errc::kEmptyInput, "no drafts to verify");

  StepOutcome outcome;
  outcome.drafts = drafts;
  Context work = ctx;
  for (const TokenId x : drafts) {
    const ProbDist q = adjusted_next(target, work, cfg);
    const ProbDist p = adjusted_next(drafter, work, cfg);
    const double a = accept_probability(q[x], p[x]);
    outcome.accept_probs.push_back(a);
    if (rng.next_unit() < a) {
      ++outcome.accepted_count;
      work.push_back(x);
      continue;
    }
    const auto residual = residual_plus(q, p);
    outcome.resampled = sample(residual ? *residual : q, rng);
    return outcome;
  }
  outcome.bonus = sample(adjusted_next(target, work, cfg), rng);
  return outcome;
}

StepOutcome verify_lantern(const TableModel& target, const TableModel& drafter,
                           const Context& ctx, const std::vector<TokenId>& drafts,
                           const NeighborIndex& idx, const DecodeConfig& cfg,
                           Rng& rng) {
  check_pair(target, drafter);
  if (drafts.empty()) throw Error(Errc::kEmptyInput, "no drafts to verify");
  if (idx.k() != cfg.k) {
    throw Error(Errc::kConfigInvalid, "neighbor index k != cfg.k");
  }

  StepOutcome outcome;
  outcome.drafts = drafts;
  Context work = ctx;
  for (const TokenId x : drafts) {
    const ProbDist q = adjusted_next(target, work, cfg);
    const ProbDist p = adjusted_next(drafter, work, cfg);
    ProximitySet set = build_proximity_set(q, x, idx, cfg.bound);
    const double a = accept_probability(set.aggregated_mass, p[x]);
    outcome.accept_probs.push_back(a);
    outcome.proximity_sets.push_back(std::move(set));
    if (rng.next_unit() < a) {
      ++outcome.accepted_count;
      work.push_back(x);
      continue;
    }
    const ProbDist distorted =
        distort_target(q, outcome.proximity_sets.back()).dist;
    const auto residual = residual_plus(distorted, p);
    outcome.resampled = sample(residual ? *residual : distorted, rng);
    return outcome;
  }
  outcome.bonus = sample(adjusted_next(target, work, cfg), rng);
  return outcome;
}

StepOutcome verify_lantern_greedy(const TableModel& target,
                                  const TableModel& drafter, const Context& ctx,
                                  const std::vector<TokenId>& drafts,
                                  const NeighborIndex& idx,
                                  const DecodeConfig& cfg) {
  check_pair(target, drafter);
  if (drafts.empty()) throw Error(Errc::kEmptyInput, "no drafts to verify");
  if (cfg.tau != 0.0) {
    throw Error(Errc::kConfigInvalid, "greedy verification requires tau = 0");
  }
  if (idx.k() != cfg.k) {
    throw Error(Errc::kConfigInvalid, "neighbor index k != cfg.k");
  }

  StepOutcome outcome;
  outcome.drafts = drafts;
  Context work = ctx;
  for (const TokenId x : drafts) {
    const ProbDist q = truncated_next(target, work, cfg);
    ProximitySet set = build_proximity_set(q, x, idx, cfg.bound);
    const TokenId best = distort_target(q, set).dist.argmax();
    outcome.proximity_sets.push_back(std::move(set));
    if (best == x) {
      outcome.accept_probs.push_back(1.0);
      ++outcome.accepted_count;
      work.push_back(x);
      continue;
    }
    outcome.accept_probs.push_back(0.0);
    outcome.resampled = best;
    return outcome;
  }
  outcome.bonus = truncated_next(target, work, cfg).argmax();
  return outcome;
}

DecodeTrace decode(const TableModel& target, const TableModel& drafter,
                   const Context& prompt, const DecodeConfig& cfg,
                   const NeighborIndex* idx, std::uint64_t rng_seed) {
  check_pair(target, drafter);
  if (cfg.min_target_len < 1) {
    throw Error(Errc::kRangeError, "min_target_len must be >= 1");
  }
  if (cfg.mode == DecodeMode::kLantern) {
    if (idx == nullptr) {
      throw Error(Errc::kConfigInvalid, "lantern mode needs a neighbor index");
    }
    if (idx->vocab() != target.vocab()) {
      throw Error(Errc::kSizeMismatch, "neighbor index vocab != model vocab");
    }
  }
  for (const TokenId t : prompt) {
    if (t < 0 || t >= target.vocab()) {
      throw Error(Errc::kRangeError, "prompt token out of range");
    }
  }

  Rng rng(rng_seed);
  DecodeTrace trace;
  trace.rng_seed = rng_seed;
  trace.prompt_len = static_cast<int>(prompt.size());
  Context ctx = prompt;
  while (static_cast<int>(ctx.size()) < cfg.min_target_len) {
    const std::vector<TokenId> drafts =
        draft_chain(drafter, ctx, cfg.gamma, cfg, rng);
    StepOutcome outcome;
    if (cfg.mode == DecodeMode::kVanilla) {
      outcome = verify_vanilla(target, drafter, ctx, drafts, cfg, rng);
    } else if (cfg.tau == 0.0) {
      outcome = verify_lantern_greedy(target, drafter, ctx, drafts, *idx, cfg);
    } else {
      outcome = verify_lantern(target, drafter, ctx, drafts, *idx, cfg, rng);
    }
    ctx.insert(ctx.end(), drafts.begin(), drafts.begin() + outcome.accepted_count);
    ctx.push_back(outcome.resampled ? *outcome.resampled : *outcome.bonus);
    trace.steps.push_back(std::move(outcome));
  }
  trace.output = std::move(ctx);
  return trace;
}

}  // namespace specdec
