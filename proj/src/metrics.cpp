#include "specdec/metrics.hpp"

#include <algorithm>
#include <sstream>

#include "specdec/textio.hpp"

namespace specdec {

namespace {

void check_nonempty_steps(const std::vector<DecodeTrace>& traces) {
  if (total_steps(traces) == 0) {
    throw Error(Errc::kEmptyInput, "no verification steps recorded");
  }
}

}  // namespace

long total_steps(const std::vector<DecodeTrace>& traces) {
  long steps = 0;
  for (const auto& trace : traces) steps += static_cast<long>(trace.steps.size());
  return steps;
}

double mean_accepted_length(const std::vector<DecodeTrace>& traces) {
  check_nonempty_steps(traces);
  long steps = 0;
  long emitted = 0;
  for (const auto& trace : traces) {
    for (const auto& step : trace.steps) {
      emitted += step.accepted_count + 1;
      ++steps;
    }
  }
  return static_cast<double>(emitted) / static_cast<double>(steps);
}

double avg_accept_prob_first_draft(const std::vector<DecodeTrace>& traces) {
  check_nonempty_steps(traces);
  double acc = 0.0;
  long steps = 0;
  for (const auto& trace : traces) {
    for (const auto& step : trace.steps) {
      acc += step.accept_probs.front();
      ++steps;
    }
  }
  return acc / static_cast<double>(steps);
}

std::pair<double, double> ambiguity_stats(const TableModel& model,
                                          const std::vector<Context>& contexts,
                                          int top_n) {
  if (contexts.empty()) throw Error(Errc::kEmptyInput, "no contexts");
  double top1 = 0.0;
  double topn = 0.0;
  for (const Context& ctx : contexts) {
    const ProbDist& d = model.next_dist(ctx);
    const auto order = tokens_by_mass(d);
    top1 += d[order.front()];
    const int n = std::min<int>(top_n, d.size());
    for (int rank = 0; rank < n; ++rank) topn += d[order[static_cast<size_t>(rank)]];
  }
  const double count = static_cast<double>(contexts.size());
  return {top1 / count, topn / count};
}

std::map<int, double> drafter_accuracy(const TableModel& target,
                                       const TableModel& drafter,
                                       const std::vector<Context>& contexts,
                                       const std::vector<int>& ks) {
  if (contexts.empty()) throw Error(Errc::kEmptyInput, "no contexts");
  std::map<int, long> hits;
  for (const Context& ctx : contexts) {
    const TokenId truth = target.greedy_token(ctx);
    const auto order = tokens_by_mass(drafter.next_dist(ctx));
    for (const int k : ks) {
      const int n = std::min<int>(k, static_cast<int>(order.size()));
      const auto end = order.begin() + n;
      if (std::find(order.begin(), end, truth) != end) ++hits[k];
    }
  }
  std::map<int, double> out;
  for (const int k : ks) {
    out[k] = static_cast<double>(hits[k]) / static_cast<double>(contexts.size());
  }
  return out;
}

std::vector<double> set_size_profile(const std::vector<DecodeTrace>& traces) {
  bool any_sets = false;
  std::vector<double> sums;
  std::vector<long> counts;
  for (const auto& trace : traces) {
    size_t pos = 0;  // generated-token index, prompt excluded
    for (const auto& step : trace.steps) {
      for (size_t i = 0; i < step.proximity_sets.size(); ++i) {
        const size_t at = pos + i;
        if (at >= sums.size()) {
          sums.resize(at + 1, 0.0);
          counts.resize(at + 1, 0);
        }
        sums[at] += static_cast<double>(step.proximity_sets[i].members.size());
        ++counts[at];
        any_sets = true;
      }
      pos += static_cast<size_t>(step.accepted_count) + 1;
    }
  }
  if (!any_sets) {
    throw Error(Errc::kNoSetsRecorded, "traces carry no proximity sets");
  }
  std::vector<double> profile(sums.size());
  for (size_t i = 0; i < sums.size(); ++i) {
    profile[i] = counts[i] > 0 ? sums[i] / static_cast<double>(counts[i]) : 1.0;
  }
  return profile;
}

std::string StatsReport::to_kv_text() const {
  std::ostringstream out;
  out << "mean_accepted_length = " << format_double(mean_accepted_length) << "\n";
  out << "avg_accept_prob_first_draft = " << format_double(avg_accept_prob_first_draft)
      << "\n";
  out << "top1_mass_mean = " << format_double(top1_mass_mean) << "\n";
  out << "top10_mass_mean = " << format_double(top10_mass_mean) << "\n";
  for (const auto& [k, acc] : drafter_topk_accuracy) {
    out << "drafter_top" << k << "_accuracy = " << format_double(acc) << "\n";
  }
  out << "avg_set_size_by_position =";
  for (size_t i = 0; i < avg_set_size_by_position.size(); ++i) {
    out << (i == 0 ? " " : ", ") << format_double(avg_set_size_by_position[i]);
  }
  out << "\n";
  out << "num_steps = " << num_steps << "\n";
  out << "num_sequences = " << num_sequences << "\n";
  return out.str();
}

}  // namespace specdec
