#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "specdec/codebook.hpp"
#include "specdec/prob.hpp"

namespace specdec::test {

// Random distribution with full support (normalized Exp(1) draws).
inline ProbDist random_dist(int vocab, Rng& rng) {
  std::vector<double> raw(static_cast<size_t>(vocab));
  for (double& v : raw) v = -std::log(1.0 - rng.next_unit());
  return normalize(raw);
}

// Random distribution where roughly half the entries are zeroed (at least
// one survives).
inline ProbDist random_sparse_dist(int vocab, Rng& rng) {
  std::vector<double> raw(static_cast<size_t>(vocab), 0.0);
  bool any = false;
  for (double& v : raw) {
    if (rng.next_unit() < 0.5) {
      v = -std::log(1.0 - rng.next_unit());
      any = true;
    }
  }
  if (!any) raw[rng.next_below(raw.size())] = 1.0;
  return normalize(raw);
}

// Independent O(V^2) full-sort k-NN reference. Distances are recomputed by
// hand for L2 and cosine instead of going through pairwise_distance.
inline std::vector<std::vector<TokenId>> brute_force_knn(const Codebook& cb, int k,
                                                         const ProximityMeasure& m) {
  const int vocab = cb.vocab();
  std::vector<std::vector<TokenId>> out(static_cast<size_t>(vocab));
  for (TokenId t = 0; t < vocab; ++t) {
    std::vector<std::pair<double, TokenId>> scored;
    for (TokenId x = 0; x < vocab; ++x) {
      double dist = 0.0;
      switch (m.kind) {
        case ProximityMeasure::Kind::kL2: {
          for (int i = 0; i < cb.dim(); ++i) {
            const double diff = double(cb.row(t)[i]) - double(cb.row(x)[i]);
            dist += diff * diff;
          }
          dist = std::sqrt(dist);
          break;
        }
        case ProximityMeasure::Kind::kCosine: {
          double dot = 0.0, nt = 0.0, nx = 0.0;
          for (int i = 0; i < cb.dim(); ++i) {
            dot += double(cb.row(t)[i]) * double(cb.row(x)[i]);
            nt += double(cb.row(t)[i]) * double(cb.row(t)[i]);
            nx += double(cb.row(x)[i]) * double(cb.row(x)[i]);
          }
          dist = 1.0 - dot / (std::sqrt(nt) * std::sqrt(nx));
          break;
        }
        case ProximityMeasure::Kind::kRandom:
          dist = t == x ? 0.0 : keyed_unit(m.seed, std::min(t, x), std::max(t, x));
          break;
      }
      scored.emplace_back(dist, x);
    }
    std::sort(scored.begin(), scored.end(), [t](const auto& a, const auto& b) {
      if ((a.second == t) != (b.second == t)) return a.second == t;
      if (a.first != b.first) return a.first < b.first;
      return a.second < b.second;
    });
    for (int j = 0; j < k; ++j) out[static_cast<size_t>(t)].push_back(scored[j].second);
  }
  return out;
}

}  // namespace specdec::test
