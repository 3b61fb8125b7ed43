#include <doctest.h>

#include <string>

#include "specdec/experiment.hpp"

using namespace specdec;

namespace {

Errc code_of(const std::string& text) {
  try {
    validate_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a config error");
  return Errc::kConfigInvalid;
}

std::string message_of(const std::string& text) {
  try {
    validate_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("empty document populates every default") {
  const ExperimentConfig cfg = validate_config("");
  CHECK(cfg.synthesize_model);
  CHECK(cfg.vocab == 256);
  CHECK(cfg.order == 1);
  CHECK(cfg.tau_values == std::vector<double>{1.0});
  CHECK(cfg.top_k == -1);  // full vocabulary
  CHECK(cfg.top_p == 1.0);
  CHECK(cfg.metric == DistanceMetricKind::kTvd);
  CHECK(cfg.proximity.kind == ProximityMeasure::Kind::kL2);
  CHECK(cfg.mode == DecodeMode::kLantern);
  CHECK(cfg.delta_values == std::vector<double>{0.05, 0.1, 0.2, 0.4});
  CHECK(cfg.gamma_values == std::vector<int>{4});
  // Reference grid 100/300/1000 scaled to V = 256.
  CHECK(cfg.k_values == std::vector<int>{26, 77, 256});
}

TEST_CASE("k grid scaling respects small vocabularies") {
  const ExperimentConfig cfg = validate_config("[model]\nvocab = 8\n");
  for (const int k : cfg.k_values) {
    CHECK(k >= 1);
    CHECK(k <= 8);
  }
}

TEST_CASE("a full document parses") {
  const std::string text = R"(# comment line
[model]
source = synthesize
vocab = 64
order = 2
concentration = 0.5
drafter_noise = 0.25
drafter_blur = 3
drafter_sharpness = 2.5
seed = 17

[codebook]
dim = 4
seed = 3
correlated = false

[sweep]
k = 4, 8, 16
delta = 0.1, 0.2
tau = 0, 1
gamma = 2, 4

[run]
mode = vanilla
metric = jsd
proximity = random
proximity_seed = 99
trials = 7
min_target_len = 33
top_k = 32
top_p = 0.9
out_dir = /tmp/specdec_out
seed = 21
write_traces = true
)";
  const ExperimentConfig cfg = validate_config(text);
  CHECK(cfg.vocab == 64);
  CHECK(cfg.order == 2);
  CHECK(cfg.drafter_blur == 3);
  CHECK(cfg.drafter_sharpness == 2.5);
  CHECK_FALSE(cfg.correlated);
  CHECK(cfg.k_values == std::vector<int>{4, 8, 16});
  CHECK(cfg.delta_values == std::vector<double>{0.1, 0.2});
  CHECK(cfg.tau_values == std::vector<double>{0.0, 1.0});
  CHECK(cfg.mode == DecodeMode::kVanilla);
  CHECK(cfg.metric == DistanceMetricKind::kJsd);
  CHECK(cfg.proximity.kind == ProximityMeasure::Kind::kRandom);
  CHECK(cfg.proximity.seed == 99);
  CHECK(cfg.trials == 7);
  CHECK(cfg.top_k == 32);
  CHECK(cfg.write_traces);
}

TEST_CASE("unknown keys and sections are rejected with a location") {
  CHECK(code_of("[model]\nvocabulary = 3\n") == Errc::kParseError);
  CHECK(message_of("[model]\nvocabulary = 3\n").find("line 2") !=
        std::string::npos);
  CHECK(code_of("[models]\n") == Errc::kParseError);
  CHECK(code_of("vocab = 3\n") == Errc::kParseError);  // key outside a section
  CHECK(code_of("[model]\nvocab 3\n") == Errc::kParseError);
  CHECK(code_of("[model]\nvocab =\n") == Errc::kParseError);
  CHECK(code_of("[model]\nvocab = three\n") == Errc::kParseError);
  CHECK(code_of("[sweep]\nk = 1,,2\n") == Errc::kParseError);
}

TEST_CASE("range violations name the field") {
  CHECK(code_of("[sweep]\ndelta = 1.5\n") == Errc::kRangeError);
  CHECK(message_of("[sweep]\ndelta = 1.5\n").find("sweep.delta") !=
        std::string::npos);
  CHECK(code_of("[run]\ntrials = -3\n") == Errc::kRangeError);
  CHECK(message_of("[run]\ntrials = 0\n").find("run.trials") != std::string::npos);
  CHECK(code_of("[run]\nmetric = jsd\n[sweep]\ndelta = 0.7\n") ==
        Errc::kRangeError);
  CHECK_NOTHROW(validate_config("[run]\nmetric = jsd\n[sweep]\ndelta = 0.69\n"));
  CHECK(code_of("[model]\nvocab = 1\n") == Errc::kRangeError);
  CHECK(code_of("[model]\norder = 4\n") == Errc::kRangeError);
  CHECK(code_of("[model]\nconcentration = 0\n") == Errc::kRangeError);
  CHECK(code_of("[model]\ndrafter_noise = 1.5\n") == Errc::kRangeError);
  CHECK(code_of("[sweep]\nk = 0\n") == Errc::kRangeError);
  CHECK(code_of("[model]\nvocab = 16\n[sweep]\nk = 17\n") == Errc::kRangeError);
  CHECK(code_of("[sweep]\ngamma = 0\n") == Errc::kRangeError);
  CHECK(code_of("[sweep]\ntau = -1\n") == Errc::kRangeError);
  CHECK(code_of("[run]\ntop_p = 0\n") == Errc::kRangeError);
  CHECK(code_of("[run]\ntop_k = 0\n") == Errc::kRangeError);
  CHECK(code_of("[model]\nsource = load\n") == Errc::kRangeError);
}

TEST_CASE("resolved text is stable under re-parsing") {
  const ExperimentConfig cfg =
      validate_config("[model]\nvocab = 32\n[sweep]\nk = 4\ndelta = 0.1\n");
  const std::string resolved = resolved_text(cfg);
  const ExperimentConfig back = validate_config(resolved);
  CHECK(resolved_text(back) == resolved);
}

TEST_CASE("csv header is fixed") {
  const std::string header = stats_csv_header();
  CHECK(header.find("k,delta,tau,gamma,mode,metric,proximity,") == 0);
  CHECK(header.find("set_size_pos9") != std::string::npos);
  CHECK(header.find("num_sequences") != std::string::npos);
}

}  // TEST_SUITE
