#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "specdec/prob.hpp"

namespace specdec {

// Preceding token sequence; empty contexts are fine.
using Context = std::vector<TokenId>;

// Knobs for synthesizing next-token tables. Small concentration gives
// near-uniform rows (the ambiguity regime), large gives peaked rows.
struct AmbiguityProfile {
  double concentration = 1.0;
  std::uint64_t seed = 0;
};

// Finite-order Markov model over tables: the next-token distribution is a
// function of the last min(order, len) context tokens, with a fallback row
// for unseen suffixes. Immutable after construction.
class TableModel {
 public:
  TableModel(int vocab, int order, std::map<Context, ProbDist> tables,
             ProbDist fallback);

  int vocab() const { return vocab_; }
  int order() const { return order_; }
  const std::map<Context, ProbDist>& tables() const { return tables_; }
  const ProbDist& fallback() const { return fallback_; }

  const ProbDist& next_dist(const Context& ctx) const;
  // Argmax of next_dist, lowest id on ties.
  TokenId greedy_token(const Context& ctx) const;

  // JSON text; doubles round-trip bit-exactly.
  std::string to_text() const;
  static TableModel from_text(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static TableModel load(const std::filesystem::path& path);

 private:
  int vocab_ = 0;
  int order_ = 0;
  std::map<Context, ProbDist> tables_;
  ProbDist fallback_;
};

struct ModelPair {
  TableModel target;
  TableModel drafter;
};

// Optional drafter corruptions beyond the uniform mixture. blur > 0 averages
// each target row over a circular token-id window of half-width `blur` before
// the mixture, so the drafter stays right about regions while losing the
// exact token; sharpness != 1 raises the corrupted row to that power and
// renormalizes, making the drafter confident. Defaults are a no-op.
struct DrafterShape {
  int blur = 0;
  double sharpness = 1.0;
};

// Synthesizes a (target, drafter) pair. Target rows are smooth lognormal
// fields: a standard-normal field box-smoothed circularly along the token-id
// axis (and the suffix axis for order 1), re-standardized, scaled by
// sqrt(ln(1 + concentration)) and exponentiated, then row-normalized — small
// concentration gives near-uniform rows, and nearby token ids carry
// correlated mass. The drafter applies the optional shape corruption and then
// mixes with the uniform distribution at weight drafter_noise. Deterministic
// in all inputs. For order >= 2 the table covers all V^order suffixes when
// that is at most 4096, else 4096 seed-sampled distinct suffixes.
ModelPair synthesize_pair(int vocab, int order, const AmbiguityProfile& profile,
                          double drafter_noise, const DrafterShape& shape = {});

}  // namespace specdec
