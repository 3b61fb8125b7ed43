#include "specdec/model.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace specdec {

namespace {

constexpr int kMaxSynthesizedRows = 4096;

// Correlation length of within-row mass along the token-id axis; id-sorted
// codebooks turn this into latent-local mass correlation.
int smoothing_half_width(int vocab) {
  return std::clamp(vocab / 64, 1, 16);
}

// Circular box average with half-width h (h = 0 is the identity).
std::vector<double> smooth_circular(const std::vector<double>& in, int h) {
  if (h <= 0) return in;
  const int n = static_cast<int>(in.size());
  std::vector<double> out(in.size());
  const double inv = 1.0 / (2 * h + 1);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = -h; j <= h; ++j) {
      acc += in[static_cast<size_t>(((i + j) % n + n) % n)];
    }
    out[static_cast<size_t>(i)] = acc * inv;
  }
  return out;
}

// Standardizes to zero mean / unit variance in place (no-op on a flat field),
// then maps x -> exp(sigma * x). Standardizing after the smoothing keeps the
// marginal sharpness independent of the correlation length.
void standardize_exp(std::vector<double>& field, double sigma) {
  double mean = 0.0;
  for (double v : field) mean += v;
  mean /= static_cast<double>(field.size());
  double var = 0.0;
  for (double v : field) var += (v - mean) * (v - mean);
  var /= static_cast<double>(field.size());
  const double inv_std = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
  for (double& v : field) v = std::exp(sigma * (v - mean) * inv_std);
}

std::vector<double> normal_row(int vocab, Rng& rng) {
  std::vector<double> row(static_cast<size_t>(vocab));
  for (double& v : row) v = rng.next_gaussian();
  return row;
}

ProbDist smooth_lognormal_row(int vocab, double sigma, int h, Rng& rng) {
  std::vector<double> row = smooth_circular(normal_row(vocab, rng), h);
  standardize_exp(row, sigma);
  return normalize(row);
}

ProbDist corrupt_row(const ProbDist& row, double noise, const DrafterShape& shape) {
  std::vector<double> out = row.mass();
  if (shape.blur > 0) out = smooth_circular(out, shape.blur);
  if (shape.sharpness != 1.0) {
    // Power transform in log space with the max shifted out, as in
    // apply_temperature, so large exponents cannot underflow the whole row.
    double log_max = -std::numeric_limits<double>::infinity();
    for (const double v : out) {
      if (v > 0.0) log_max = std::max(log_max, std::log(v));
    }
    for (double& v : out) {
      v = v > 0.0 ? std::exp(shape.sharpness * (std::log(v) - log_max)) : 0.0;
    }
  }
  if (shape.blur > 0 || shape.sharpness != 1.0) {
    double sum = 0.0;
    for (double v : out) sum += v;
    for (double& v : out) v /= sum;
  }
  if (noise > 0.0) {
    const double u = 1.0 / row.size();
    for (double& v : out) v = (1.0 - noise) * v + noise * u;
  }
  return ProbDist(std::move(out));
}

}  // namespace

TableModel::TableModel(int vocab, int order, std::map<Context, ProbDist> tables,
                       ProbDist fallback)
    : vocab_(vocab), order_(order), tables_(std::move(tables)),
      fallback_(std::move(fallback)) {
  if (vocab_ < 1) throw Error(Errc::kRangeError, "vocab must be >= 1");
  if (order_ < 0) throw Error(Errc::kRangeError, "order must be >= 0");
  if (fallback_.size() != vocab_) {
    throw Error(Errc::kSizeMismatch, "fallback size != vocab");
  }
  for (const auto& [suffix, row] : tables_) {
    if (row.size() != vocab_) {
      throw Error(Errc::kSizeMismatch, "table row size != vocab");
    }
    if (static_cast<int>(suffix.size()) > order_) {
      throw Error(Errc::kRangeError, "table suffix longer than model order");
    }
    for (TokenId t : suffix) {
      if (t < 0 || t >= vocab_) {
        throw Error(Errc::kRangeError, "table suffix token out of range");
      }
    }
  }
}

const ProbDist& TableModel::next_dist(const Context& ctx) const {
  const size_t take = std::min<size_t>(static_cast<size_t>(order_), ctx.size());
  const Context suffix(ctx.end() - static_cast<std::ptrdiff_t>(take), ctx.end());
  const auto it = tables_.find(suffix);
  return it == tables_.end() ? fallback_ : it->second;
}

TokenId TableModel::greedy_token(const Context& ctx) const {
  return next_dist(ctx).argmax();
}

std::string TableModel::to_text() const {
  nlohmann::json doc;
  doc["order"] = order_;
  doc["vocab"] = vocab_;
  doc["fallback"] = fallback_.mass();
  auto& rows = doc["table"] = nlohmann::json::array();
  for (const auto& [suffix, row] : tables_) {
    rows.push_back({{"suffix", suffix}, {"mass", row.mass()}});
  }
  return doc.dump(2) + "\n";
}

TableModel TableModel::from_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
    std::map<Context, ProbDist> tables;
    for (const auto& entry : doc.at("table")) {
      tables.emplace(entry.at("suffix").get<Context>(),
                     ProbDist(entry.at("mass").get<std::vector<double>>()));
    }
    return TableModel(doc.at("vocab").get<int>(), doc.at("order").get<int>(),
                      std::move(tables),
                      ProbDist(doc.at("fallback").get<std::vector<double>>()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParseError, std::string("bad model document: ") + e.what());
  }
}

void TableModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIoFailure, "cannot open " + path.string());
  out << to_text();
  if (!out) throw Error(Errc::kIoFailure, "short write to " + path.string());
}

TableModel TableModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoFailure, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str());
}

ModelPair synthesize_pair(int vocab, int order, const AmbiguityProfile& profile,
                          double drafter_noise, const DrafterShape& shape) {
  if (vocab < 2) throw Error(Errc::kRangeError, "synthesize_pair needs V >= 2");
  if (order < 0 || order > 3) throw Error(Errc::kRangeError, "order outside [0, 3]");
  if (!(profile.concentration > 0.0)) {
    throw Error(Errc::kRangeError, "concentration must be > 0");
  }
  if (drafter_noise < 0.0 || drafter_noise > 1.0) {
    throw Error(Errc::kRangeError, "drafter_noise outside [0, 1]");
  }
  if (shape.blur < 0 || !(shape.sharpness > 0.0)) {
    throw Error(Errc::kRangeError, "bad drafter shape");
  }

  const double sigma = std::sqrt(std::log1p(profile.concentration));
  const int h = smoothing_half_width(vocab);
  Rng rng(profile.seed);

  std::map<Context, ProbDist> target_rows;
  if (order == 1) {
    // One field smoothed along both axes so rows keyed by nearby suffixes
    // stay similar too; standardized as a whole before the exponential.
    std::vector<std::vector<double>> field(static_cast<size_t>(vocab));
    for (auto& row : field) row = smooth_circular(normal_row(vocab, rng), h);
    std::vector<double> column(static_cast<size_t>(vocab));
    for (int x = 0; x < vocab; ++x) {
      for (int s = 0; s < vocab; ++s) {
        column[static_cast<size_t>(s)] =
            field[static_cast<size_t>(s)][static_cast<size_t>(x)];
      }
      column = smooth_circular(column, h);
      for (int s = 0; s < vocab; ++s) {
        field[static_cast<size_t>(s)][static_cast<size_t>(x)] =
            column[static_cast<size_t>(s)];
      }
    }
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(vocab) * static_cast<size_t>(vocab));
    for (const auto& row : field) flat.insert(flat.end(), row.begin(), row.end());
    standardize_exp(flat, sigma);
    for (TokenId s = 0; s < vocab; ++s) {
      const auto begin = flat.begin() + static_cast<std::ptrdiff_t>(s) * vocab;
      target_rows.emplace(Context{s},
                          normalize(std::vector<double>(begin, begin + vocab)));
    }
  } else if (order >= 2) {
    double total = 1.0;
    for (int i = 0; i < order; ++i) total *= vocab;
    std::set<Context> suffixes;
    if (total <= kMaxSynthesizedRows) {
      Context suffix(static_cast<size_t>(order), 0);
      for (;;) {
        suffixes.insert(suffix);
        int pos = order - 1;
        while (pos >= 0 && ++suffix[static_cast<size_t>(pos)] == vocab) {
          suffix[static_cast<size_t>(pos)] = 0;
          --pos;
        }
        if (pos < 0) break;
      }
    } else {
      while (static_cast<int>(suffixes.size()) < kMaxSynthesizedRows) {
        Context suffix(static_cast<size_t>(order));
        for (TokenId& t : suffix) {
          t = static_cast<TokenId>(rng.next_below(static_cast<std::uint64_t>(vocab)));
        }
        suffixes.insert(suffix);
      }
    }
    for (const Context& suffix : suffixes) {
      target_rows.emplace(suffix, smooth_lognormal_row(vocab, sigma, h, rng));
    }
  }
  const ProbDist target_fallback = smooth_lognormal_row(vocab, sigma, h, rng);

  std::map<Context, ProbDist> drafter_rows;
  for (const auto& [suffix, row] : target_rows) {
    drafter_rows.emplace(suffix, corrupt_row(row, drafter_noise, shape));
  }

  return ModelPair{
      TableModel(vocab, order, std::move(target_rows), target_fallback),
      TableModel(vocab, order, std::move(drafter_rows),
                 corrupt_row(target_fallback, drafter_noise, shape))};
}

}  // namespace specdec
