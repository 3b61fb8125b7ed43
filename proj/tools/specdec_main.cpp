#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "specdec/experiment.hpp"
#include "specdec/oracle.hpp"
#include "specdec/textio.hpp"

namespace {

using namespace specdec;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitCheckFailed = 4;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::kIoFailure:
      return kExitIo;
    default:
      return kExitConfig;
  }
}

ProbDist random_dist(int vocab, Rng& rng) {
  std::vector<double> raw(static_cast<size_t>(vocab));
  for (double& v : raw) v = rng.next_gamma(1.0);
  return normalize(raw);
}

// ---- run ----------------------------------------------------------------

struct RunOptions {
  std::string config_path;
  std::string seed_override;
  std::string out_dir_override;
  std::string mode_override;
};

int cmd_run(const RunOptions& opt) {
  std::string text;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot open config " << opt.config_path << "\n";
      return kExitIo;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
  }

  ExperimentConfig cfg;
  try {
    cfg = validate_config(text);
    if (!opt.seed_override.empty()) cfg.seed = std::stoull(opt.seed_override);
    if (!opt.out_dir_override.empty()) cfg.out_dir = opt.out_dir_override;
    if (opt.mode_override == "vanilla") cfg.mode = DecodeMode::kVanilla;
    else if (opt.mode_override == "lantern") cfg.mode = DecodeMode::kLantern;
    else if (!opt.mode_override.empty()) {
      std::cerr << "error: --mode must be vanilla or lantern\n";
      return kExitConfig;
    }
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const ExperimentResult result = run_experiment(cfg);
    const double forwards_per_token =
        result.total_tokens > 0
            ? static_cast<double>(result.total_steps) /
                  static_cast<double>(result.total_tokens)
            : 0.0;
    std::cout << "wrote " << (cfg.out_dir / "stats.csv").string() << " ("
              << result.cells.size() << " cells, " << result.total_steps
              << " steps)\n";
    std::cout << "target forwards per generated token: "
              << format_double(forwards_per_token) << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

// ---- oracle ---------------------------------------------------------------

struct OracleOptions {
  int vocab = 8;
  int instances = 200;
  int k = 4;
  double delta = 0.2;
  std::uint64_t seed = 0;
};

int cmd_oracle(const OracleOptions& opt) {
  Rng rng(opt.seed);
  double max_vanilla_dev = 0.0;
  double max_conditional_dev = 0.0;
  double max_marginal_tvd = 0.0;
  double max_closed_form_dev = 0.0;

  const Codebook cb = Codebook::gaussian(opt.vocab, 4, mix64(opt.seed) ^ 0xc0deull);
  const int k = std::min(opt.k, opt.vocab);
  const NeighborIndex idx = build_neighbor_index(cb, k, ProximityMeasure::l2());
  const DivergenceBound bound(opt.delta, DistanceMetricKind::kTvd);

  double max_mixture_dev = 0.0;
  for (int n = 0; n < opt.instances; ++n) {
    const ProbDist q = random_dist(opt.vocab, rng);
    const ProbDist p = random_dist(opt.vocab, rng);

    const StepLaw vanilla = enumerate_vanilla_step(q, p, opt.vocab);
    max_vanilla_dev = std::max(max_vanilla_dev, tvd(vanilla.law, q));

    const StepLaw lantern = enumerate_lantern_step(q, p, idx, bound, opt.vocab);
    std::vector<double> mixture(static_cast<size_t>(opt.vocab), 0.0);
    for (TokenId draft = 0; draft < opt.vocab; ++draft) {
      const ProximitySet set = build_proximity_set(q, draft, idx, bound);
      const DistortedTarget distorted = distort_target(q, set);
      double closed_form = 0.0;
      for (const TokenId x : set.members) {
        if (x != draft) closed_form += q[x];
      }
      max_closed_form_dev =
          std::max(max_closed_form_dev,
                   std::abs(tvd(distorted.dist, q) - closed_form));
      // A full step against this candidate's distorted target must land back
      // on that distorted target.
      const ProbDist candidate_law =
          enumerate_candidate_distorted_law(q, p, idx, bound, draft, opt.vocab);
      for (int i = 0; i < q.size(); ++i) {
        max_conditional_dev = std::max(
            max_conditional_dev, std::abs(candidate_law[i] - distorted.dist[i]));
        mixture[static_cast<size_t>(i)] += p[draft] * distorted.dist[i];
      }
    }
    max_marginal_tvd = std::max(max_marginal_tvd, tvd(ProbDist(mixture), q));

    // The branch-law mixture is the decoder's ground truth; its identity is
    // the p-weighted mixture of conditionals.
    std::vector<double> branch_mix(static_cast<size_t>(opt.vocab), 0.0);
    for (const auto& [draft, cond] : lantern.conditional_laws) {
      for (int i = 0; i < q.size(); ++i) {
        branch_mix[static_cast<size_t>(i)] += p[draft] * cond[i];
      }
    }
    max_mixture_dev = std::max(max_mixture_dev, tvd(ProbDist(branch_mix), lantern.law));
  }

  std::cout << "instances: " << opt.instances << ", V = " << opt.vocab
            << ", k = " << k << ", delta = " << format_double(opt.delta) << "\n";
  std::cout << "max tvd(law, q) (vanilla losslessness): "
            << format_double(max_vanilla_dev) << "\n";
  std::cout << "max |per-candidate law - distorted target|: "
            << format_double(max_conditional_dev) << "\n";
  std::cout << "max tvd(candidate mixture, q) vs delta " << format_double(opt.delta)
            << ": " << format_double(max_marginal_tvd) << "\n";
  std::cout << "max |realized tvd - closed form|: "
            << format_double(max_closed_form_dev) << "\n";
  std::cout << "max mixture-identity deviation: " << format_double(max_mixture_dev)
            << "\n";

  const bool ok = max_vanilla_dev < 1e-9 && max_conditional_dev < 1e-12 &&
                  max_marginal_tvd < opt.delta && max_closed_form_dev < 1e-12 &&
                  max_mixture_dev < 1e-12;
  std::cout << (ok ? "all checks passed" : "CHECK FAILED") << "\n";
  return ok ? 0 : kExitCheckFailed;
}

// ---- knn-check ------------------------------------------------------------

struct KnnOptions {
  int vocab = 64;
  int dim = 8;
  int k = 5;
  int codebooks = 10;
  std::string proximity = "l2";
  std::uint64_t seed = 0;
};

int cmd_knn_check(const KnnOptions& opt) {
  ProximityMeasure measure = ProximityMeasure::l2();
  if (opt.proximity == "cosine") measure = ProximityMeasure::cosine();
  else if (opt.proximity == "random") measure = ProximityMeasure::random(opt.seed);
  else if (opt.proximity != "l2") {
    std::cerr << "error: --proximity must be l2, cosine or random\n";
    return kExitConfig;
  }

  int mismatches = 0;
  for (int n = 0; n < opt.codebooks; ++n) {
    const Codebook cb = Codebook::gaussian(opt.vocab, opt.dim, opt.seed + n);
    const NeighborIndex idx = build_neighbor_index(cb, opt.k, measure);
    // Full-sort reference, one token at a time.
    for (TokenId t = 0; t < opt.vocab; ++t) {
      std::vector<std::pair<double, TokenId>> all;
      for (TokenId x = 0; x < opt.vocab; ++x) {
        all.emplace_back(pairwise_distance(cb, t, x, measure), x);
      }
      std::sort(all.begin(), all.end(), [t](const auto& a, const auto& b) {
        if ((a.second == t) != (b.second == t)) return a.second == t;
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
      });
      const auto got = idx.neighbors(t);
      for (int j = 0; j < opt.k; ++j) {
        if (got[static_cast<size_t>(j)] != all[static_cast<size_t>(j)].second) {
          ++mismatches;
          break;
        }
      }
    }
  }
  std::cout << opt.codebooks << " codebooks (V = " << opt.vocab << ", d = "
            << opt.dim << ", k = " << opt.k << ", " << opt.proximity
            << "): " << mismatches << " mismatching neighbor lists\n";
  return mismatches == 0 ? 0 : kExitCheckFailed;
}

// ---- replace-demo ---------------------------------------------------------

struct ReplaceOptions {
  int vocab = 256;
  int dim = 2;
  int k = 16;
  int length = 64;
  double concentration = 1.0;
  bool uncorrelated = false;
  std::string proximity = "l2";
  std::uint64_t seed = 0;
};

int cmd_replace_demo(const ReplaceOptions& opt) {
  ProximityMeasure measure = ProximityMeasure::l2();
  if (opt.proximity == "cosine") measure = ProximityMeasure::cosine();
  else if (opt.proximity == "random") measure = ProximityMeasure::random(opt.seed);
  else if (opt.proximity != "l2") {
    std::cerr << "error: --proximity must be l2, cosine or random\n";
    return kExitConfig;
  }

  const ModelPair pair =
      synthesize_pair(opt.vocab, 1, {opt.concentration, mix64(opt.seed)}, 0.0);
  const Codebook cb =
      opt.uncorrelated
          ? Codebook::gaussian(opt.vocab, opt.dim, mix64(opt.seed) ^ 0xcbull)
          : Codebook::gaussian_correlated(opt.vocab, opt.dim,
                                          mix64(opt.seed) ^ 0xcbull);
  const NeighborIndex idx = build_neighbor_index(cb, opt.k, measure);

  Rng rng(opt.seed);
  Context ctx;
  std::vector<double> divergences;
  for (int pos = 0; pos < opt.length; ++pos) {
    const ProbDist& d = pair.target.next_dist(ctx);
    const TokenId original = sample(d, rng);
    const TokenId replaced = replace_with_uniform_neighbor(original, idx, rng);

    Context with_original = ctx;
    with_original.push_back(original);
    Context with_replaced = ctx;
    with_replaced.push_back(replaced);
    const double div = tvd(pair.target.next_dist(with_original),
                           pair.target.next_dist(with_replaced));
    divergences.push_back(div);
    std::printf("pos %3d: token %4d -> %4d, next-dist tvd %s\n", pos, original,
                replaced, format_double(div).c_str());
    ctx.push_back(replaced);
  }
  const double mean =
      std::accumulate(divergences.begin(), divergences.end(), 0.0) /
      static_cast<double>(divergences.size());
  std::cout << "mean per-position tvd after uniform neighbor replacement (k = "
            << opt.k << ", " << opt.proximity << "): " << format_double(mean)
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speculative decoding engine with relaxed latent-neighbor acceptance"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "run a sweep experiment from a config file");
  run->add_option("--config", run_opt.config_path, "config file (defaults apply if omitted)");
  run->add_option("--seed", run_opt.seed_override, "override [run] seed");
  run->add_option("--out-dir", run_opt.out_dir_override, "override [run] out_dir");
  run->add_option("--mode", run_opt.mode_override, "override [run] mode");

  OracleOptions oracle_opt;
  auto* oracle = app.add_subcommand("oracle", "single-step enumeration checks");
  oracle->add_option("--vocab", oracle_opt.vocab, "vocabulary size")
      ->check(CLI::Range(2, 64));
  oracle->add_option("--instances", oracle_opt.instances, "random instances");
  oracle->add_option("--k", oracle_opt.k, "neighborhood size");
  oracle->add_option("--delta", oracle_opt.delta, "tvd bound");
  oracle->add_option("--seed", oracle_opt.seed, "rng seed");

  KnnOptions knn_opt;
  auto* knn = app.add_subcommand("knn-check", "neighbor index vs brute force");
  knn->add_option("--vocab", knn_opt.vocab, "vocabulary size");
  knn->add_option("--dim", knn_opt.dim, "latent dimension");
  knn->add_option("--k", knn_opt.k, "neighbors per token");
  knn->add_option("--codebooks", knn_opt.codebooks, "random codebooks to test");
  knn->add_option("--proximity", knn_opt.proximity, "l2, cosine or random");
  knn->add_option("--seed", knn_opt.seed, "rng seed");

  ReplaceOptions rep_opt;
  auto* rep = app.add_subcommand(
      "replace-demo", "uniform neighbor replacement over a generated sequence");
  rep->add_option("--vocab", rep_opt.vocab, "vocabulary size");
  rep->add_option("--dim", rep_opt.dim, "latent dimension");
  rep->add_option("--k", rep_opt.k, "replacement pool size");
  rep->add_option("--len", rep_opt.length, "sequence length");
  rep->add_option("--concentration", rep_opt.concentration, "table sharpness");
  rep->add_flag("--uncorrelated", rep_opt.uncorrelated,
                "use an uncorrelated codebook");
  rep->add_option("--proximity", rep_opt.proximity, "l2, cosine or random");
  rep->add_option("--seed", rep_opt.seed, "rng seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints message/help; 0 for --help
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opt);
    if (*oracle) return cmd_oracle(oracle_opt);
    if (*knn) return cmd_knn_check(knn_opt);
    if (*rep) return cmd_replace_demo(rep_opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
