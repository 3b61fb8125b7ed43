#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "specdec/codebook.hpp"
#include "specdec/decode.hpp"
#include "specdec/metrics.hpp"
#include "specdec/model.hpp"

namespace specdec {

// Fully resolved experiment description. Parsed from a line-oriented
// "key = value" document with [section] headers; every omitted key takes the
// default recorded here and echoed to config.resolved.
struct ExperimentConfig {
  // [model]
  bool synthesize_model = true;
  int vocab = 256;
  int order = 1;
  double concentration = 1.0;
  double drafter_noise = 0.3;
  int drafter_blur = 0;
  double drafter_sharpness = 1.0;
  std::uint64_t model_seed = 1;
  std::filesystem::path target_path;
  std::filesystem::path drafter_path;

  // [codebook]
  bool synthesize_codebook = true;
  int dim = 2;
  std::uint64_t codebook_seed = 2;
  bool correlated = true;
  std::filesystem::path codebook_path;

  // [sweep]
  std::vector<int> k_values;        // default: paper grid scaled to V
  std::vector<double> delta_values; // default: 0.05, 0.1, 0.2, 0.4
  std::vector<double> tau_values;   // default: 1
  std::vector<int> gamma_values;    // default: 4

  // [run]
  DecodeMode mode = DecodeMode::kLantern;
  DistanceMetricKind metric = DistanceMetricKind::kTvd;
  ProximityMeasure proximity = ProximityMeasure::l2();
  int trials = 16;
  int min_target_len = 64;
  int top_k = -1;  // -1 = full vocabulary
  double top_p = 1.0;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  bool write_traces = false;
};

const char* mode_name(DecodeMode m);
const char* metric_name(DistanceMetricKind m);
const char* proximity_name(ProximityMeasure::Kind k);

// Parses and validates a config document. Unknown sections/keys and syntax
// problems raise kParseError with line/column; invariant violations raise
// kRangeError naming the field. An empty document yields all defaults.
ExperimentConfig validate_config(const std::string& raw_text);

// The fully-defaulted config rendered back in its file format.
std::string resolved_text(const ExperimentConfig& cfg);

// Fixed stats.csv header.
std::string stats_csv_header();

// One sweep cell of the run: its coordinates plus the aggregated report.
struct CellResult {
  int k = 0;
  double delta = 0.0;
  double tau = 0.0;
  int gamma = 0;
  StatsReport report;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  std::string stats_csv;     // full file contents, header included
  long total_steps = 0;
  long total_tokens = 0;     // generated tokens across all decodes
};

// Runs every sweep cell (trial seeds are seed + trial_index) and returns the
// aggregated rows; deterministic byte-for-byte in the config.
ExperimentResult run_cells(const ExperimentConfig& cfg);

// run_cells plus file output: stats.csv, config.resolved and, when enabled,
// traces/NNN.txt under cfg.out_dir. Errors: kIoFailure.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace specdec
