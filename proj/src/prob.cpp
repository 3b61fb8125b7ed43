#include "specdec/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace specdec {

namespace {

double checked_sum(const std::vector<double>& mass) {
  double sum = 0.0;
  for (double v : mass) {
    if (v < 0.0 || !std::isfinite(v)) {
      throw Error(Errc::kNegativeMass, "distribution entry negative or non-finite");
    }
    sum += v;
  }
  if (sum <= 0.0) throw Error(Errc::kAllZero, "distribution has zero total mass");
  return sum;
}

void check_same_size(const ProbDist& a, const ProbDist& b) {
  if (a.size() != b.size()) {
    throw Error(Errc::kSizeMismatch, "distributions have different vocab sizes");
  }
}

}  // namespace

ProbDist::ProbDist(std::vector<double> mass) : mass_(std::move(mass)) {
  const double sum = checked_sum(mass_);
  if (std::abs(sum - 1.0) > kNormTolerance) {
    for (double& v : mass_) v /= sum;
  }
}

TokenId ProbDist::argmax() const {
  return static_cast<TokenId>(
      std::max_element(mass_.begin(), mass_.end()) - mass_.begin());
}

ProbDist normalize(const std::vector<double>& raw) {
  const double sum = checked_sum(raw);
  std::vector<double> out(raw);
  for (double& v : out) v /= sum;
  return ProbDist(std::move(out));
}

std::optional<ProbDist> residual_plus(const ProbDist& q, const ProbDist& p) {
  check_same_size(q, p);
  std::vector<double> pos(static_cast<size_t>(q.size()));
  double sum = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    pos[static_cast<size_t>(i)] = std::max(q[i] - p[i], 0.0);
    sum += pos[static_cast<size_t>(i)];
  }
  if (sum <= 0.0) return std::nullopt;
  for (double& v : pos) v /= sum;
  return ProbDist(std::move(pos));
}

double tvd(const ProbDist& a, const ProbDist& b) {
  check_same_size(a, b);
  double acc = 0.0;
  for (int i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return 0.5 * acc;
}

double jsd(const ProbDist& a, const ProbDist& b) {
  check_same_size(a, b);
  double acc = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double m = 0.5 * (a[i] + b[i]);
    if (a[i] > 0.0) acc += 0.5 * a[i] * std::log(a[i] / m);
    if (b[i] > 0.0) acc += 0.5 * b[i] * std::log(b[i] / m);
  }
  return std::max(acc, 0.0);
}

ProbDist apply_temperature(const ProbDist& d, double tau) {
  if (tau < 0.0) throw Error(Errc::kRangeError, "tau must be >= 0");
  if (tau == 1.0) return d;
  if (tau == 0.0) {
    std::vector<double> onehot(static_cast<size_t>(d.size()), 0.0);
    onehot[static_cast<size_t>(d.argmax())] = 1.0;
    return ProbDist(std::move(onehot));
  }
  // Power transform in log space with the max shifted out.
  double log_max = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < d.size(); ++i) {
    if (d[i] > 0.0) log_max = std::max(log_max, std::log(d[i]));
  }
  std::vector<double> out(static_cast<size_t>(d.size()), 0.0);
  for (int i = 0; i < d.size(); ++i) {
    if (d[i] > 0.0) {
      out[static_cast<size_t>(i)] = std::exp((std::log(d[i]) - log_max) / tau);
    }
  }
  return normalize(out);
}

std::vector<TokenId> tokens_by_mass(const ProbDist& d) {
  std::vector<TokenId> order(static_cast<size_t>(d.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](TokenId a, TokenId b) {
    if (d[a] != d[b]) return d[a] > d[b];
    return a < b;
  });
  return order;
}

ProbDist truncate_top_k_p(const ProbDist& d, int top_k, double top_p) {
  if (top_k < 1 || top_k > d.size()) {
    throw Error(Errc::kRangeError, "top_k outside [1, V]");
  }
  if (!(top_p > 0.0) || top_p > 1.0) {
    throw Error(Errc::kRangeError, "top_p outside (0, 1]");
  }
  if (top_k == d.size() && top_p == 1.0) return d;  // nothing can be cut
  const std::vector<TokenId> order = tokens_by_mass(d);
  std::vector<double> kept(static_cast<size_t>(d.size()), 0.0);
  double cum = 0.0;
  int kept_count = 0;
  for (int rank = 0; rank < top_k; ++rank) {
    const TokenId t = order[static_cast<size_t>(rank)];
    kept[static_cast<size_t>(t)] = d[t];
    cum += d[t];
    ++kept_count;
    if (cum >= top_p) break;
  }
  if (kept_count == d.size()) return d;  // nothing zeroed, exact identity
  return normalize(kept);
}

TokenId sample(const ProbDist& d, Rng& rng) {
  const double u = rng.next_unit();
  double cum = 0.0;
  TokenId last_positive = 0;
  for (int i = 0; i < d.size(); ++i) {
    if (d[i] <= 0.0) continue;
    cum += d[i];
    last_positive = static_cast<TokenId>(i);
    if (u < cum) return last_positive;
  }
  // Rounding slack: u landed past the accumulated total.
  return last_positive;
}

}  // namespace specdec
