#include <doctest.h>

#include <cmath>

#include "specdec/proximity.hpp"
#include "test_support.hpp"

using namespace specdec;

namespace {

// Codebook whose L2 neighbor order from any token is 0, 1, 2, ... by id.
Codebook ladder(int vocab) {
  std::vector<float> rows(static_cast<size_t>(vocab));
  for (int i = 0; i < vocab; ++i) rows[static_cast<size_t>(i)] = float(i * i);
  return Codebook(vocab, 1, std::move(rows));
}

}  // namespace

TEST_SUITE("proximity") {

TEST_CASE("bound validation") {
  CHECK_NOTHROW(DivergenceBound(0.5, DistanceMetricKind::kTvd));
  CHECK_THROWS_AS(DivergenceBound(0.0, DistanceMetricKind::kTvd), Error);
  CHECK_THROWS_AS(DivergenceBound(-0.1, DistanceMetricKind::kTvd), Error);
  CHECK_THROWS_AS(DivergenceBound(1.1, DistanceMetricKind::kTvd), Error);
  CHECK_NOTHROW(DivergenceBound(0.69, DistanceMetricKind::kJsd));
  CHECK_THROWS_AS(DivergenceBound(0.70, DistanceMetricKind::kJsd), Error);
}

TEST_CASE("tiny bound keeps only the candidate") {
  const Codebook cb = Codebook::gaussian(8, 2, 3);
  const NeighborIndex idx = build_neighbor_index(cb, 8, ProximityMeasure::l2());
  Rng rng(4);
  const ProbDist q = test::random_dist(8, rng);  // full support
  for (TokenId t = 0; t < 8; ++t) {
    const ProximitySet set =
        build_proximity_set(q, t, idx, {1e-12, DistanceMetricKind::kTvd});
    CHECK(set.members.size() == 1);
    CHECK(set.members[0] == t);
    CHECK(set.aggregated_mass == q[t]);
    CHECK(set.realized_divergence == 0.0);
  }
}

TEST_CASE("greedy scan on a uniform target") {
  const Codebook cb = ladder(4);
  const NeighborIndex idx = build_neighbor_index(cb, 4, ProximityMeasure::l2());
  const ProbDist q({0.25, 0.25, 0.25, 0.25});

  const ProximitySet at_03 =
      build_proximity_set(q, 0, idx, {0.3, DistanceMetricKind::kTvd});
  CHECK(at_03.members == std::vector<TokenId>{0, 1});
  CHECK(at_03.aggregated_mass == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(at_03.realized_divergence == doctest::Approx(0.25).epsilon(1e-12));

  const ProximitySet at_06 =
      build_proximity_set(q, 0, idx, {0.6, DistanceMetricKind::kTvd});
  CHECK(at_06.members == std::vector<TokenId>{0, 1, 2});
  CHECK(at_06.aggregated_mass == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("distorting with a self-only set returns q unchanged") {
  Rng rng(5);
  const ProbDist q = test::random_dist(6, rng);
  ProximitySet set;
  set.candidate = 2;
  set.members = {2};
  set.aggregated_mass = q[2];
  set.realized_divergence = 0.0;
  CHECK(distort_target(q, set).dist.mass() == q.mass());
}

TEST_CASE("distort_target folds member mass onto the candidate") {
  const Codebook cb = ladder(4);
  const NeighborIndex idx = build_neighbor_index(cb, 4, ProximityMeasure::l2());
  const ProbDist q({0.25, 0.25, 0.25, 0.25});
  const ProximitySet set =
      build_proximity_set(q, 0, idx, {0.3, DistanceMetricKind::kTvd});
  const DistortedTarget distorted = distort_target(q, set);
  CHECK(distorted.dist[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(distorted.dist[1] == 0.0);
  CHECK(distorted.dist[2] == 0.25);
  CHECK(distorted.dist[3] == 0.25);
  CHECK(tvd(distorted.dist, q) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("distort_target rejects a set from a different distribution") {
  const Codebook cb = ladder(4);
  const NeighborIndex idx = build_neighbor_index(cb, 4, ProximityMeasure::l2());
  const ProbDist q({0.25, 0.25, 0.25, 0.25});
  const ProximitySet set =
      build_proximity_set(q, 0, idx, {0.3, DistanceMetricKind::kTvd});
  const ProbDist other({0.7, 0.1, 0.1, 0.1});
  try {
    distort_target(other, set);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kInconsistentSet);
  }
}

TEST_CASE("closed form matches the generic half-L1 on random instances") {
  Rng rng(6);
  const Codebook cb = Codebook::gaussian(12, 4, 7);
  const NeighborIndex idx = build_neighbor_index(cb, 12, ProximityMeasure::l2());
  for (int n = 0; n < 300; ++n) {
    const ProbDist q = test::random_sparse_dist(12, rng);
    const double delta = 0.05 + 0.4 * rng.next_unit();
    const TokenId cand = TokenId(rng.next_below(12));
    const ProximitySet set =
        build_proximity_set(q, cand, idx, {delta, DistanceMetricKind::kTvd});
    double non_self = 0.0;
    for (const TokenId x : set.members) {
      if (x != cand) non_self += q[x];
    }
    CHECK(std::abs(set.realized_divergence - non_self) <= 1e-12);
    CHECK(set.realized_divergence < delta);
    const DistortedTarget distorted = distort_target(q, set);
    CHECK(std::abs(tvd(distorted.dist, q) - non_self) <= 1e-12);
    CHECK(set.aggregated_mass >= q[cand]);
    if (set.members.size() == 1) CHECK(set.aggregated_mass == q[cand]);
  }
}

TEST_CASE("members grow with delta") {
  Rng rng(8);
  const Codebook cb = Codebook::gaussian(10, 3, 2);
  const NeighborIndex idx = build_neighbor_index(cb, 10, ProximityMeasure::l2());
  for (int n = 0; n < 100; ++n) {
    const ProbDist q = test::random_dist(10, rng);
    const TokenId cand = TokenId(rng.next_below(10));
    const double small = 0.02 + 0.3 * rng.next_unit();
    const double large = small + 0.3 * rng.next_unit();
    const auto a =
        build_proximity_set(q, cand, idx, {small, DistanceMetricKind::kTvd});
    const auto b =
        build_proximity_set(q, cand, idx, {large, DistanceMetricKind::kTvd});
    REQUIRE(a.members.size() <= b.members.size());
    for (size_t i = 0; i < a.members.size(); ++i) CHECK(a.members[i] == b.members[i]);
  }
}

TEST_CASE("members grow with k") {
  Rng rng(9);
  const Codebook cb = Codebook::gaussian(10, 3, 4);
  const NeighborIndex small_idx = build_neighbor_index(cb, 3, ProximityMeasure::l2());
  const NeighborIndex big_idx = build_neighbor_index(cb, 7, ProximityMeasure::l2());
  for (int n = 0; n < 100; ++n) {
    const ProbDist q = test::random_dist(10, rng);
    const TokenId cand = TokenId(rng.next_below(10));
    const DivergenceBound bound{0.05 + 0.5 * rng.next_unit(),
                                DistanceMetricKind::kTvd};
    const auto a = build_proximity_set(q, cand, small_idx, bound);
    const auto b = build_proximity_set(q, cand, big_idx, bound);
    REQUIRE(a.members.size() <= b.members.size());
    for (size_t i = 0; i < a.members.size(); ++i) CHECK(a.members[i] == b.members[i]);
  }
}

TEST_CASE("appending the next neighbor would violate the bound") {
  Rng rng(10);
  const Codebook cb = Codebook::gaussian(9, 3, 5);
  const NeighborIndex idx = build_neighbor_index(cb, 9, ProximityMeasure::l2());
  for (int n = 0; n < 200; ++n) {
    const ProbDist q = test::random_dist(9, rng);
    const TokenId cand = TokenId(rng.next_below(9));
    const double delta = 0.05 + 0.5 * rng.next_unit();
    const auto set =
        build_proximity_set(q, cand, idx, {delta, DistanceMetricKind::kTvd});
    if (set.members.size() == 9) continue;  // exhausted the whole list
    const TokenId next = idx.neighbors(cand)[set.members.size()];
    CHECK_FALSE(set.realized_divergence + q[next] < delta);
  }
}

TEST_CASE("jsd-bounded sets") {
  Rng rng(11);
  const Codebook cb = Codebook::gaussian(8, 3, 6);
  const NeighborIndex idx = build_neighbor_index(cb, 8, ProximityMeasure::l2());
  for (int n = 0; n < 100; ++n) {
    const ProbDist q = test::random_dist(8, rng);
    const TokenId cand = TokenId(rng.next_below(8));
    const double delta = 0.01 + 0.5 * rng.next_unit();
    const auto set =
        build_proximity_set(q, cand, idx, {delta, DistanceMetricKind::kJsd});
    REQUIRE(!set.members.empty());
    CHECK(set.members.front() == cand);
    const DistortedTarget distorted = distort_target(q, set);
    CHECK(std::abs(jsd(distorted.dist, q) - set.realized_divergence) <= 1e-12);
    CHECK(set.realized_divergence < delta);
    // The jsd route still respects monotonicity in delta.
    const auto bigger =
        build_proximity_set(q, cand, idx, {std::min(delta + 0.1, 0.69),
                                           DistanceMetricKind::kJsd});
    CHECK(set.members.size() <= bigger.members.size());
  }
}

}  // TEST_SUITE
