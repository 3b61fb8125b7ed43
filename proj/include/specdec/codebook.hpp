#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "specdec/prob.hpp"

namespace specdec {

// Per-token latent vectors: V rows of dimension d, row-major f32.
class Codebook {
 public:
  Codebook(int vocab, int dim, std::vector<float> data);

  int vocab() const { return vocab_; }
  int dim() const { return dim_; }
  std::span<const float> row(TokenId t) const {
    return {data_.data() + static_cast<size_t>(t) * static_cast<size_t>(dim_),
            static_cast<size_t>(dim_)};
  }

  // Independent N(0,1) rows.
  static Codebook gaussian(int vocab, int dim, std::uint64_t seed);
  // Gaussian rows sorted by coordinate 0 and assigned in token-id order, with
  // coordinate 0 scaled by vocab/8 so that L2 neighborhoods are id-local.
  // Pairs with table models whose rows are smooth in token id.
  static Codebook gaussian_correlated(int vocab, int dim, std::uint64_t seed);

  // Binary container: 16-byte header (magic "CDBK", version u32, V u32,
  // d u32, little-endian) then V*d little-endian f32, row-major.
  void save_binary(const std::filesystem::path& path) const;
  static Codebook load_binary(const std::filesystem::path& path);

  // One row per token, d comma-separated decimals. For hand-written fixtures.
  static Codebook load_csv(const std::filesystem::path& path);

 private:
  int vocab_ = 0;
  int dim_ = 0;
  std::vector<float> data_;
};

struct ProximityMeasure {
  enum class Kind { kL2, kCosine, kRandom };

  Kind kind = Kind::kL2;
  std::uint64_t seed = 0;  // only used by kRandom

  static ProximityMeasure l2() { return {Kind::kL2, 0}; }
  static ProximityMeasure cosine() { return {Kind::kCosine, 0}; }
  static ProximityMeasure random(std::uint64_t seed) { return {Kind::kRandom, seed}; }
};

// L2: Euclidean distance of rows. Cosine: 1 - cos_sim (smaller = closer);
// errors kZeroVector on a zero-norm row. Random: keyed_unit(seed, a, b)
// with the (a, a) case forced to 0.
double pairwise_distance(const Codebook& cb, TokenId a, TokenId b,
                         const ProximityMeasure& m);

// For each token, its k nearest tokens (self first, then nondecreasing
// distance, ties toward the lower id). neighbor lists for k are prefixes of
// the lists for k+1.
class NeighborIndex {
 public:
  NeighborIndex(int vocab, int k, std::vector<TokenId> neighbors,
                std::vector<double> distances);

  int vocab() const { return vocab_; }
  int k() const { return k_; }
  std::span<const TokenId> neighbors(TokenId t) const {
    return {neighbors_.data() + static_cast<size_t>(t) * static_cast<size_t>(k_),
            static_cast<size_t>(k_)};
  }
  std::span<const double> distances(TokenId t) const {
    return {distances_.data() + static_cast<size_t>(t) * static_cast<size_t>(k_),
            static_cast<size_t>(k_)};
  }

 private:
  int vocab_ = 0;
  int k_ = 0;
  std::vector<TokenId> neighbors_;
  std::vector<double> distances_;
};

// Exact k-NN by full pairwise computation. Errors: kKTooLarge if k > V.
NeighborIndex build_neighbor_index(const Codebook& cb, int k,
                                   const ProximityMeasure& m);

// Uniform draw from neighbors(t), the k closest tokens including t itself.
TokenId replace_with_uniform_neighbor(TokenId t, const NeighborIndex& idx, Rng& rng);

}  // namespace specdec
