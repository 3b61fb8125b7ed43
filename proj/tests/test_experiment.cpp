#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "specdec/experiment.hpp"

using namespace specdec;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg = validate_config(R"(
[model]
vocab = 32
order = 1
concentration = 1.0
drafter_noise = 0.4
seed = 3

[codebook]
dim = 2
seed = 5

[sweep]
k = 4
delta = 0.2
tau = 1
gamma = 3

[run]
trials = 3
min_target_len = 20
seed = 11
)");
  return cfg;
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (const char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("run_cells is deterministic") {
  const ExperimentConfig cfg = tiny_config();
  const ExperimentResult a = run_cells(cfg);
  const ExperimentResult b = run_cells(cfg);
  CHECK(a.stats_csv == b.stats_csv);
  CHECK(a.total_steps == b.total_steps);
  CHECK(a.cells.size() == 1);
  CHECK(a.cells[0].report.num_sequences == 3);
  CHECK(a.cells[0].report.mean_accepted_length >= 1.0);
  CHECK(a.cells[0].report.mean_accepted_length <= 4.0);
}

TEST_CASE("csv layout is identical across modes") {
  ExperimentConfig lantern = tiny_config();
  ExperimentConfig vanilla = tiny_config();
  vanilla.mode = DecodeMode::kVanilla;
  const std::string a = run_cells(lantern).stats_csv;
  const std::string b = run_cells(vanilla).stats_csv;
  CHECK(count_lines(a) == 2);  // header + one cell
  CHECK(count_lines(b) == 2);
  CHECK(a.substr(0, a.find('\n')) == b.substr(0, b.find('\n')));
  // Vanilla rows fill the set-size columns with 1.
  const std::string vanilla_row = b.substr(b.find('\n') + 1);
  CHECK(vanilla_row.find(",vanilla,") != std::string::npos);
  CHECK(vanilla_row.find(",1,1,1,1,1,1,1,1,1,1,") != std::string::npos);
}

TEST_CASE("sweep grid is the cross product in listed order") {
  ExperimentConfig cfg = tiny_config();
  cfg.k_values = {2, 4};
  cfg.delta_values = {0.1, 0.2};
  cfg.gamma_values = {1, 3};
  cfg.trials = 1;
  cfg.min_target_len = 8;
  const ExperimentResult result = run_cells(cfg);
  REQUIRE(result.cells.size() == 8);
  CHECK(result.cells[0].k == 2);
  CHECK(result.cells[0].delta == 0.1);
  CHECK(result.cells[0].gamma == 1);
  CHECK(result.cells[1].gamma == 3);
  CHECK(result.cells[2].delta == 0.2);
  CHECK(result.cells[4].k == 4);
  CHECK(count_lines(result.stats_csv) == 9);
}

TEST_CASE("lantern with a tiny delta matches vanilla cell for cell") {
  ExperimentConfig lantern = tiny_config();
  lantern.k_values = {1};
  lantern.delta_values = {1e-12};
  lantern.trials = 20;
  ExperimentConfig vanilla = lantern;
  vanilla.mode = DecodeMode::kVanilla;
  const ExperimentResult a = run_cells(lantern);
  const ExperimentResult b = run_cells(vanilla);
  // Identical rng stream and acceptance arithmetic: the traces coincide, so
  // the statistics do exactly.
  CHECK(a.cells[0].report.mean_accepted_length ==
        b.cells[0].report.mean_accepted_length);
  CHECK(a.cells[0].report.avg_accept_prob_first_draft ==
        b.cells[0].report.avg_accept_prob_first_draft);
}

TEST_CASE("run_experiment writes deterministic files") {
  const auto base = std::filesystem::temp_directory_path() / "specdec_exp_test";
  std::filesystem::remove_all(base);
  ExperimentConfig cfg = tiny_config();
  cfg.write_traces = true;

  cfg.out_dir = base / "a";
  const ExperimentResult first = run_experiment(cfg);
  cfg.out_dir = base / "b";
  const ExperimentResult second = run_experiment(cfg);

  const std::string csv_a = read_file(base / "a" / "stats.csv");
  const std::string csv_b = read_file(base / "b" / "stats.csv");
  CHECK(csv_a == csv_b);
  CHECK(csv_a == first.stats_csv);
  // The resolved echo differs only in its out_dir line.
  cfg.out_dir = base / "a";
  CHECK(read_file(base / "a" / "config.resolved") == resolved_text(cfg));
  CHECK(read_file(base / "a" / "traces" / "000.txt") ==
        read_file(base / "b" / "traces" / "000.txt"));
  CHECK(std::filesystem::exists(base / "a" / "traces" / "002.txt"));
  CHECK(second.total_steps == first.total_steps);

  // The trace file carries the structured step records.
  const std::string trace = read_file(base / "a" / "traces" / "000.txt");
  CHECK(trace.find("seed = 11") != std::string::npos);
  CHECK(trace.find("step 0: drafts =") != std::string::npos);
  CHECK(trace.find("set_sizes =") != std::string::npos);
  std::filesystem::remove_all(base);
}

TEST_CASE("per-trial seeds are seed plus trial index") {
  ExperimentConfig cfg = tiny_config();
  cfg.trials = 2;
  cfg.write_traces = true;
  const auto base = std::filesystem::temp_directory_path() / "specdec_seed_test";
  std::filesystem::remove_all(base);
  cfg.out_dir = base;
  run_experiment(cfg);
  CHECK(read_file(base / "traces" / "000.txt").find("seed = 11") !=
        std::string::npos);
  CHECK(read_file(base / "traces" / "001.txt").find("seed = 12") !=
        std::string::npos);
  std::filesystem::remove_all(base);
}

TEST_CASE("model and codebook vocabularies must agree") {
  ExperimentConfig cfg = tiny_config();
  const auto path =
      std::filesystem::temp_directory_path() / "specdec_mismatch.cdbk";
  Codebook::gaussian(16, 2, 1).save_binary(path);
  cfg.synthesize_codebook = false;
  cfg.codebook_path = path;
  try {
    run_cells(cfg);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kConfigInvalid);
  }
  std::filesystem::remove(path);
}

TEST_CASE("loaded models round-trip through the runner") {
  const auto base = std::filesystem::temp_directory_path() / "specdec_load_test";
  std::filesystem::create_directories(base);
  const ModelPair pair = synthesize_pair(24, 1, {1.0, 41}, 0.3);
  pair.target.save(base / "target.json");
  pair.drafter.save(base / "drafter.json");

  ExperimentConfig cfg = tiny_config();
  cfg.synthesize_model = false;
  cfg.target_path = base / "target.json";
  cfg.drafter_path = base / "drafter.json";
  cfg.k_values = {3};
  const ExperimentResult loaded = run_cells(cfg);

  ExperimentConfig synth = tiny_config();
  synth.vocab = 24;
  synth.model_seed = 41;
  synth.drafter_noise = 0.3;
  synth.k_values = {3};
  const ExperimentResult direct = run_cells(synth);
  CHECK(loaded.stats_csv == direct.stats_csv);
  std::filesystem::remove_all(base);
}

}  // TEST_SUITE
