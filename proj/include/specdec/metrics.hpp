#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "specdec/decode.hpp"
#include "specdec/model.hpp"

namespace specdec {

// Aggregated statistics for a batch of decodes.
struct StatsReport {
  double mean_accepted_length = 0.0;
  double avg_accept_prob_first_draft = 0.0;
  double top1_mass_mean = 0.0;
  double top10_mass_mean = 0.0;
  std::map<int, double> drafter_topk_accuracy;
  std::vector<double> avg_set_size_by_position;
  long num_steps = 0;
  long num_sequences = 0;

  // Flat "key = value" lines.
  std::string to_kv_text() const;
};

// Average tokens emitted per verification step, counting the resampled or
// bonus token; in [1, gamma + 1]. Errors: kEmptyInput.
double mean_accepted_length(const std::vector<DecodeTrace>& traces);

// Mean recorded acceptance probability of draft position 1.
double avg_accept_prob_first_draft(const std::vector<DecodeTrace>& traces);

// Means of the top-1 mass and of the summed top-N mass of next_dist over the
// given contexts.
std::pair<double, double> ambiguity_stats(const TableModel& model,
                                          const std::vector<Context>& contexts,
                                          int top_n);

// For each k, the fraction of contexts where the target's greedy token lies
// in the drafter's k highest-mass tokens.
std::map<int, double> drafter_accuracy(const TableModel& target,
                                       const TableModel& drafter,
                                       const std::vector<Context>& contexts,
                                       const std::vector<int>& ks);

// Mean proximity-set size per generated position (0-based, prompt excluded),
// averaged over traces. Positions observed only as bonus tokens report the
// self-only floor 1.0. Errors: kNoSetsRecorded when no trace carries sets
// (vanilla mode).
std::vector<double> set_size_profile(const std::vector<DecodeTrace>& traces);

long total_steps(const std::vector<DecodeTrace>& traces);

}  // namespace specdec
