#include "specdec/experiment.hpp"

#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "specdec/textio.hpp"

namespace specdec {

namespace {

constexpr int kSetSizeColumns = 10;
constexpr int kStatsContexts = 200;
const std::vector<int> kAccuracyKs = {1, 3, 10};

std::vector<Context> stats_contexts(const ExperimentConfig& cfg, int vocab,
                                    int order) {
  Rng rng(mix64(cfg.seed) ^ 0x5741755ull);
  std::vector<Context> contexts(kStatsContexts);
  for (auto& ctx : contexts) {
    ctx.resize(static_cast<size_t>(order));
    for (TokenId& t : ctx) {
      t = static_cast<TokenId>(rng.next_below(static_cast<std::uint64_t>(vocab)));
    }
  }
  return contexts;
}

std::string csv_row(const CellResult& cell, const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << cell.k << ',' << format_double(cell.delta) << ','
      << format_double(cell.tau) << ',' << cell.gamma << ',' << mode_name(cfg.mode)
      << ',' << metric_name(cfg.metric) << ',' << proximity_name(cfg.proximity.kind);
  const StatsReport& r = cell.report;
  out << ',' << format_double(r.mean_accepted_length);
  out << ',' << format_double(r.avg_accept_prob_first_draft);
  out << ',' << format_double(r.top1_mass_mean);
  out << ',' << format_double(r.top10_mass_mean);
  for (const int k : kAccuracyKs) {
    out << ',' << format_double(r.drafter_topk_accuracy.at(k));
  }
  for (int pos = 0; pos < kSetSizeColumns; ++pos) {
    const double value =
        pos < static_cast<int>(r.avg_set_size_by_position.size())
            ? r.avg_set_size_by_position[static_cast<size_t>(pos)]
            : 1.0;
    out << ',' << format_double(value);
  }
  out << ',' << r.num_steps << ',' << r.num_sequences << '\n';
  return out.str();
}

std::string trace_text(const DecodeTrace& trace, const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "seed = " << trace.rng_seed << "\n";
  out << "mode = " << mode_name(cfg.mode) << "\n";
  out << "prompt_len = " << trace.prompt_len << "\n";
  out << "output =";
  for (size_t i = 0; i < trace.output.size(); ++i) {
    out << (i ? ", " : " ") << trace.output[i];
  }
  out << "\n";
  for (size_t s = 0; s < trace.steps.size(); ++s) {
    const StepOutcome& step = trace.steps[s];
    out << "step " << s << ": drafts =";
    for (size_t i = 0; i < step.drafts.size(); ++i) {
      out << (i ? "," : "") << ' ' << step.drafts[i];
    }
    out << " | accept_probs =";
    for (size_t i = 0; i < step.accept_probs.size(); ++i) {
      out << (i ? "," : "") << ' ' << format_double(step.accept_probs[i]);
    }
    out << " | accepted = " << step.accepted_count;
    if (step.resampled) out << " | resampled = " << *step.resampled;
    if (step.bonus) out << " | bonus = " << *step.bonus;
    if (!step.proximity_sets.empty()) {
      out << " | set_sizes =";
      for (size_t i = 0; i < step.proximity_sets.size(); ++i) {
        out << (i ? "," : "") << ' ' << step.proximity_sets[i].members.size();
      }
    }
    out << "\n";
  }
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIoFailure, "cannot open " + path.string());
  out << contents;
  if (!out) throw Error(Errc::kIoFailure, "short write to " + path.string());
}

struct Inputs {
  TableModel target;
  TableModel drafter;
  Codebook codebook;
};

Codebook make_codebook(const ExperimentConfig& cfg, int vocab) {
  if (!cfg.synthesize_codebook) {
    return cfg.codebook_path.extension() == ".csv"
               ? Codebook::load_csv(cfg.codebook_path)
               : Codebook::load_binary(cfg.codebook_path);
  }
  return cfg.correlated
             ? Codebook::gaussian_correlated(vocab, cfg.dim, cfg.codebook_seed)
             : Codebook::gaussian(vocab, cfg.dim, cfg.codebook_seed);
}

Inputs load_inputs(const ExperimentConfig& cfg) {
  if (cfg.synthesize_model) {
    ModelPair pair = synthesize_pair(
        cfg.vocab, cfg.order, {cfg.concentration, cfg.model_seed},
        cfg.drafter_noise, {cfg.drafter_blur, cfg.drafter_sharpness});
    Codebook cb = make_codebook(cfg, cfg.vocab);
    return {std::move(pair.target), std::move(pair.drafter), std::move(cb)};
  }
  TableModel target = TableModel::load(cfg.target_path);
  TableModel drafter = TableModel::load(cfg.drafter_path);
  Codebook cb = make_codebook(cfg, target.vocab());
  return {std::move(target), std::move(drafter), std::move(cb)};
}

}  // namespace

std::string stats_csv_header() {
  std::ostringstream out;
  out << "k,delta,tau,gamma,mode,metric,proximity,mean_accepted_length,"
         "avg_accept_prob_first_draft,top1_mass_mean,top10_mass_mean";
  for (const int k : kAccuracyKs) out << ",drafter_top" << k << "_accuracy";
  for (int pos = 0; pos < kSetSizeColumns; ++pos) out << ",set_size_pos" << pos;
  out << ",num_steps,num_sequences\n";
  return out.str();
}

using TraceSink = std::function<void(int, int, const DecodeTrace&)>;

static ExperimentResult run_cells_impl(const ExperimentConfig& cfg,
                                       const TraceSink& sink) {
  Inputs inputs = load_inputs(cfg);
  const TableModel& target = inputs.target;
  const TableModel& drafter = inputs.drafter;
  const int vocab = target.vocab();

  if (drafter.vocab() != vocab || inputs.codebook.vocab() != vocab) {
    throw Error(Errc::kConfigInvalid,
                "model and codebook vocabulary sizes disagree");
  }
  for (const int k : cfg.k_values) {
    if (k > vocab) throw Error(Errc::kConfigInvalid, "sweep k exceeds vocab");
  }
  if (cfg.top_k > vocab) {
    throw Error(Errc::kConfigInvalid, "top_k exceeds vocab");
  }

  // Model-level statistics do not vary across sweep cells.
  const std::vector<Context> contexts = stats_contexts(cfg, vocab, target.order());
  const auto [top1_mean, top10_mean] = ambiguity_stats(target, contexts, 10);
  const auto accuracy = drafter_accuracy(target, drafter, contexts, kAccuracyKs);

  // One index per distinct k; rebuilding per trial would not change a byte.
  std::map<int, NeighborIndex> index_by_k;
  if (cfg.mode == DecodeMode::kLantern) {
    for (const int k : cfg.k_values) {
      if (!index_by_k.contains(k)) {
        index_by_k.emplace(k, build_neighbor_index(inputs.codebook, k, cfg.proximity));
      }
    }
  }

  ExperimentResult result;
  std::string csv = stats_csv_header();
  int cell_index = 0;
  for (const int k : cfg.k_values) {
    for (const double delta : cfg.delta_values) {
      for (const double tau : cfg.tau_values) {
        for (const int gamma : cfg.gamma_values) {
          DecodeConfig dcfg;
          dcfg.gamma = gamma;
          dcfg.k = k;
          dcfg.bound = DivergenceBound(delta, cfg.metric);
          dcfg.tau = tau;
          dcfg.top_k = cfg.top_k;
          dcfg.top_p = cfg.top_p;
          dcfg.mode = cfg.mode;
          dcfg.min_target_len = cfg.min_target_len;
          const NeighborIndex* idx =
              cfg.mode == DecodeMode::kLantern ? &index_by_k.at(k) : nullptr;

          std::vector<DecodeTrace> traces;
          traces.reserve(static_cast<size_t>(cfg.trials));
          for (int trial = 0; trial < cfg.trials; ++trial) {
            traces.push_back(decode(target, drafter, {}, dcfg, idx,
                                    cfg.seed + static_cast<std::uint64_t>(trial)));
            if (sink) sink(cell_index, trial, traces.back());
            result.total_tokens +=
                static_cast<long>(traces.back().output.size()) -
                traces.back().prompt_len;
          }

          CellResult cell;
          cell.k = k;
          cell.delta = delta;
          cell.tau = tau;
          cell.gamma = gamma;
          cell.report.mean_accepted_length = mean_accepted_length(traces);
          cell.report.avg_accept_prob_first_draft =
              avg_accept_prob_first_draft(traces);
          cell.report.top1_mass_mean = top1_mean;
          cell.report.top10_mass_mean = top10_mean;
          cell.report.drafter_topk_accuracy = accuracy;
          if (cfg.mode == DecodeMode::kLantern) {
            cell.report.avg_set_size_by_position = set_size_profile(traces);
          }
          cell.report.num_steps = total_steps(traces);
          cell.report.num_sequences = cfg.trials;
          result.total_steps += cell.report.num_steps;

          csv += csv_row(cell, cfg);
          result.cells.push_back(std::move(cell));
          ++cell_index;
        }
      }
    }
  }
  result.stats_csv = std::move(csv);
  return result;
}

ExperimentResult run_cells(const ExperimentConfig& cfg) {
  return run_cells_impl(cfg, {});
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) {
    throw Error(Errc::kIoFailure, "cannot create " + cfg.out_dir.string());
  }

  TraceSink sink;
  int trace_number = 0;
  if (cfg.write_traces) {
    const std::filesystem::path trace_dir = cfg.out_dir / "traces";
    std::filesystem::create_directories(trace_dir, ec);
    if (ec) throw Error(Errc::kIoFailure, "cannot create " + trace_dir.string());
    sink = [&trace_number, trace_dir, &cfg](int, int, const DecodeTrace& trace) {
      std::ostringstream name;
      name << std::setfill('0') << std::setw(3) << trace_number++ << ".txt";
      write_file(trace_dir / name.str(), trace_text(trace, cfg));
    };
  }

  ExperimentResult result = run_cells_impl(cfg, sink);
  write_file(cfg.out_dir / "stats.csv", result.stats_csv);
  write_file(cfg.out_dir / "config.resolved", resolved_text(cfg));
  return result;
}

}  // namespace specdec
