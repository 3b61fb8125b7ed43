#include "specdec/codebook.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace specdec {

namespace {

static_assert(std::endian::native == std::endian::little,
              "codebook I/O assumes a little-endian host");

constexpr char kMagic[4] = {'C', 'D', 'B', 'K'};
constexpr std::uint32_t kFormatVersion = 1;

void check_token(const Codebook& cb, TokenId t) {
  if (t < 0 || t >= cb.vocab()) {
    throw Error(Errc::kRangeError, "token id out of range");
  }
}

}  // namespace

Codebook::Codebook(int vocab, int dim, std::vector<float> data)
    : vocab_(vocab), dim_(dim), data_(std::move(data)) {
  if (vocab_ < 1 || dim_ < 1) {
    throw Error(Errc::kRangeError, "codebook needs V >= 1 and d >= 1");
  }
  if (data_.size() != static_cast<size_t>(vocab_) * static_cast<size_t>(dim_)) {
    throw Error(Errc::kSizeMismatch, "codebook data size != V*d");
  }
  for (float v : data_) {
    if (!std::isfinite(v)) {
      throw Error(Errc::kRangeError, "codebook entry not finite");
    }
  }
}

Codebook Codebook::gaussian(int vocab, int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> data(static_cast<size_t>(vocab) * static_cast<size_t>(dim));
  for (float& v : data) v = static_cast<float>(rng.next_gaussian());
  return Codebook(vocab, dim, std::move(data));
}

Codebook Codebook::gaussian_correlated(int vocab, int dim, std::uint64_t seed) {
  Codebook cb = gaussian(vocab, dim, seed);
  std::vector<int> order(static_cast<size_t>(vocab));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return cb.data_[static_cast<size_t>(a) * static_cast<size_t>(dim)] <
           cb.data_[static_cast<size_t>(b) * static_cast<size_t>(dim)];
  });
  const float scale = static_cast<float>(vocab) / 8.0f;
  std::vector<float> data(cb.data_.size());
  for (int i = 0; i < vocab; ++i) {
    const float* src =
        cb.data_.data() + static_cast<size_t>(order[static_cast<size_t>(i)]) *
                              static_cast<size_t>(dim);
    float* dst = data.data() + static_cast<size_t>(i) * static_cast<size_t>(dim);
    std::copy(src, src + dim, dst);
    dst[0] *= scale;
  }
  return Codebook(vocab, dim, std::move(data));
}

void Codebook::save_binary(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIoFailure, "cannot open " + path.string());
  out.write(kMagic, 4);
  const std::uint32_t header[3] = {kFormatVersion,
                                   static_cast<std::uint32_t>(vocab_),
                                   static_cast<std::uint32_t>(dim_)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(data_.data()),
            static_cast<std::streamsize>(data_.size() * sizeof(float)));
  if (!out) throw Error(Errc::kIoFailure, "short write to " + path.string());
}

Codebook Codebook::load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoFailure, "cannot open " + path.string());
  char magic[4];
  std::uint32_t header[3];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(Errc::kIoFailure, path.string() + " is not a CDBK file");
  }
  if (header[0] != kFormatVersion) {
    throw Error(Errc::kIoFailure, "unsupported CDBK version");
  }
  const int vocab = static_cast<int>(header[1]);
  const int dim = static_cast<int>(header[2]);
  if (vocab < 1 || dim < 1) throw Error(Errc::kIoFailure, "bad CDBK header");
  std::vector<float> data(static_cast<size_t>(vocab) * static_cast<size_t>(dim));
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!in) throw Error(Errc::kIoFailure, "truncated CDBK payload");
  return Codebook(vocab, dim, std::move(data));
}

Codebook Codebook::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIoFailure, "cannot open " + path.string());
  std::vector<float> data;
  int dim = -1;
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    int cols = 0;
    while (std::getline(row, cell, ',')) {
      try {
        data.push_back(std::stof(cell));
      } catch (const std::exception&) {
        throw Error(Errc::kIoFailure, "bad CSV value '" + cell + "'");
      }
      ++cols;
    }
    if (dim < 0) dim = cols;
    if (cols != dim) throw Error(Errc::kIoFailure, "ragged CSV row");
    ++rows;
  }
  if (rows == 0) throw Error(Errc::kIoFailure, "empty codebook CSV");
  return Codebook(rows, dim, std::move(data));
}

double pairwise_distance(const Codebook& cb, TokenId a, TokenId b,
                         const ProximityMeasure& m) {
  check_token(cb, a);
  check_token(cb, b);
  switch (m.kind) {
    case ProximityMeasure::Kind::kL2: {
      const auto ra = cb.row(a);
      const auto rb = cb.row(b);
      double acc = 0.0;
      for (int i = 0; i < cb.dim(); ++i) {
        const double diff = static_cast<double>(ra[static_cast<size_t>(i)]) -
                            static_cast<double>(rb[static_cast<size_t>(i)]);
        acc += diff * diff;
      }
      return std::sqrt(acc);
    }
    case ProximityMeasure::Kind::kCosine: {
      const auto ra = cb.row(a);
      const auto rb = cb.row(b);
      double dot = 0.0;
      double na = 0.0;
      double nb = 0.0;
      for (int i = 0; i < cb.dim(); ++i) {
        const double x = ra[static_cast<size_t>(i)];
        const double y = rb[static_cast<size_t>(i)];
        dot += x * y;
        na += x * x;
        nb += y * y;
      }
      if (na <= 0.0 || nb <= 0.0) {
        throw Error(Errc::kZeroVector, "cosine distance on a zero vector");
      }
      return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
    }
    case ProximityMeasure::Kind::kRandom:
      if (a == b) return 0.0;
      return keyed_unit(m.seed, static_cast<std::uint64_t>(a),
                        static_cast<std::uint64_t>(b));
  }
  throw Error(Errc::kRangeError, "unknown proximity measure");
}

NeighborIndex::NeighborIndex(int vocab, int k, std::vector<TokenId> neighbors,
                             std::vector<double> distances)
    : vocab_(vocab), k_(k), neighbors_(std::move(neighbors)),
      distances_(std::move(distances)) {
  const size_t expect = static_cast<size_t>(vocab_) * static_cast<size_t>(k_);
  if (neighbors_.size() != expect || distances_.size() != expect) {
    throw Error(Errc::kSizeMismatch, "neighbor index storage size != V*k");
  }
}

NeighborIndex build_neighbor_index(const Codebook& cb, int k,
                                   const ProximityMeasure& m) {
  const int vocab = cb.vocab();
  if (k < 1) throw Error(Errc::kRangeError, "k must be >= 1");
  if (k > vocab) throw Error(Errc::kKTooLarge, "k exceeds vocabulary size");

  std::vector<TokenId> neighbors(static_cast<size_t>(vocab) * static_cast<size_t>(k));
  std::vector<double> distances(neighbors.size());
  std::vector<std::pair<double, TokenId>> scored(static_cast<size_t>(vocab));

  for (TokenId t = 0; t < vocab; ++t) {
    for (TokenId x = 0; x < vocab; ++x) {
      scored[static_cast<size_t>(x)] = {pairwise_distance(cb, t, x, m), x};
    }
    // Self always leads; after that (distance, id) ascending, so a duplicate
    // row with a lower id cannot displace t from its own slot 0.
    auto closer = [t](const std::pair<double, TokenId>& a,
                      const std::pair<double, TokenId>& b) {
      const bool a_self = a.second == t;
      const bool b_self = b.second == t;
      if (a_self != b_self) return a_self;
      if (a.first != b.first) return a.first < b.first;
      return a.second < b.second;
    };
    std::partial_sort(scored.begin(), scored.begin() + k, scored.end(), closer);
    for (int j = 0; j < k; ++j) {
      const size_t slot = static_cast<size_t>(t) * static_cast<size_t>(k) +
                          static_cast<size_t>(j);
      neighbors[slot] = scored[static_cast<size_t>(j)].second;
      distances[slot] = scored[static_cast<size_t>(j)].first;
    }
  }
  return NeighborIndex(vocab, k, std::move(neighbors), std::move(distances));
}

TokenId replace_with_uniform_neighbor(TokenId t, const NeighborIndex& idx, Rng& rng) {
  const auto list = idx.neighbors(t);
  return list[static_cast<size_t>(rng.next_below(list.size()))];
}

}  // namespace specdec
