#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <string_view>

#include "specdec/experiment.hpp"
#include "specdec/textio.hpp"

namespace specdec {

namespace {

struct Cursor {
  int line = 0;
  int column = 1;
};

[[noreturn]] void parse_fail(const Cursor& at, const std::string& why) {
  std::ostringstream msg;
  msg << "line " << at.line << ", column " << at.column << ": " << why;
  throw Error(Errc::kParseError, msg.str());
}

[[noreturn]] void range_fail(const std::string& field, const std::string& why) {
  throw Error(Errc::kRangeError, field + ": " + why);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view v, const Cursor& at) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    parse_fail(at, "expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

long long parse_int(std::string_view v, const Cursor& at) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    parse_fail(at, "expected an integer, got '" + std::string(v) + "'");
  }
  return out;
}

std::uint64_t parse_u64(std::string_view v, const Cursor& at) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    parse_fail(at, "expected an unsigned integer, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view v, const Cursor& at) {
  if (v == "true") return true;
  if (v == "false") return false;
  parse_fail(at, "expected true or false, got '" + std::string(v) + "'");
}

template <typename T, typename Fn>
std::vector<T> parse_list(std::string_view v, const Cursor& at, Fn parse_one) {
  std::vector<T> out;
  size_t start = 0;
  while (start <= v.size()) {
    size_t comma = v.find(',', start);
    if (comma == std::string_view::npos) comma = v.size();
    const std::string_view item = trim(v.substr(start, comma - start));
    if (item.empty()) parse_fail(at, "empty list entry");
    out.push_back(parse_one(item, at));
    start = comma + 1;
    if (comma == v.size()) break;
  }
  return out;
}

constexpr double kLn2 = 0.6931471805599453;

}  // namespace

const char* mode_name(DecodeMode m) {
  return m == DecodeMode::kVanilla ? "vanilla" : "lantern";
}

const char* metric_name(DistanceMetricKind m) {
  return m == DistanceMetricKind::kTvd ? "tvd" : "jsd";
}

const char* proximity_name(ProximityMeasure::Kind k) {
  switch (k) {
    case ProximityMeasure::Kind::kL2: return "l2";
    case ProximityMeasure::Kind::kCosine: return "cosine";
    case ProximityMeasure::Kind::kRandom: return "random";
  }
  return "l2";
}

ExperimentConfig validate_config(const std::string& raw_text) {
  ExperimentConfig cfg;
  bool sweep_k_given = false;

  std::string section;
  std::istringstream in(raw_text);
  std::string raw_line;
  Cursor at;
  while (std::getline(in, raw_line)) {
    ++at.line;
    const std::string_view stripped = trim(raw_line);
    if (stripped.empty() || stripped.front() == '#') continue;
    at.column = static_cast<int>(raw_line.find_first_not_of(" \t")) + 1;

    if (stripped.front() == '[') {
      if (stripped.back() != ']') parse_fail(at, "unterminated section header");
      section = std::string(stripped.substr(1, stripped.size() - 2));
      if (section != "model" && section != "codebook" && section != "sweep" &&
          section != "run") {
        parse_fail(at, "unknown section [" + section + "]");
      }
      continue;
    }

    const size_t eq = stripped.find('=');
    if (eq == std::string_view::npos) parse_fail(at, "expected 'key = value'");
    const std::string key(trim(stripped.substr(0, eq)));
    const std::string_view value = trim(stripped.substr(eq + 1));
    if (key.empty()) parse_fail(at, "missing key before '='");
    if (section.empty()) parse_fail(at, "key '" + key + "' outside any section");
    Cursor val_at = at;
    val_at.column += static_cast<int>(eq) + 1;
    if (value.empty()) parse_fail(val_at, "missing value for '" + key + "'");

    if (section == "model") {
      if (key == "source") {
        if (value == "synthesize") cfg.synthesize_model = true;
        else if (value == "load") cfg.synthesize_model = false;
        else parse_fail(val_at, "model source must be synthesize or load");
      } else if (key == "vocab") {
        cfg.vocab = static_cast<int>(parse_int(value, val_at));
      } else if (key == "order") {
        cfg.order = static_cast<int>(parse_int(value, val_at));
      } else if (key == "concentration") {
        cfg.concentration = parse_double(value, val_at);
      } else if (key == "drafter_noise") {
        cfg.drafter_noise = parse_double(value, val_at);
      } else if (key == "drafter_blur") {
        cfg.drafter_blur = static_cast<int>(parse_int(value, val_at));
      } else if (key == "drafter_sharpness") {
        cfg.drafter_sharpness = parse_double(value, val_at);
      } else if (key == "seed") {
        cfg.model_seed = parse_u64(value, val_at);
      } else if (key == "target_path") {
        cfg.target_path = std::string(value);
      } else if (key == "drafter_path") {
        cfg.drafter_path = std::string(value);
      } else {
        parse_fail(at, "unknown key '" + key + "' in [model]");
      }
    } else if (section == "codebook") {
      if (key == "source") {
        if (value == "synthesize") cfg.synthesize_codebook = true;
        else if (value == "load") cfg.synthesize_codebook = false;
        else parse_fail(val_at, "codebook source must be synthesize or load");
      } else if (key == "dim") {
        cfg.dim = static_cast<int>(parse_int(value, val_at));
      } else if (key == "seed") {
        cfg.codebook_seed = parse_u64(value, val_at);
      } else if (key == "correlated") {
        cfg.correlated = parse_bool(value, val_at);
      } else if (key == "path") {
        cfg.codebook_path = std::string(value);
      } else {
        parse_fail(at, "unknown key '" + key + "' in [codebook]");
      }
    } else if (section == "sweep") {
      if (key == "k") {
        cfg.k_values = parse_list<int>(value, val_at, [](auto v, auto c) {
          return static_cast<int>(parse_int(v, c));
        });
        sweep_k_given = true;
      } else if (key == "delta") {
        cfg.delta_values = parse_list<double>(value, val_at, [](auto v, auto c) {
          return parse_double(v, c);
        });
      } else if (key == "tau") {
        cfg.tau_values = parse_list<double>(value, val_at, [](auto v, auto c) {
          return parse_double(v, c);
        });
      } else if (key == "gamma") {
        cfg.gamma_values = parse_list<int>(value, val_at, [](auto v, auto c) {
          return static_cast<int>(parse_int(v, c));
        });
      } else {
        parse_fail(at, "unknown key '" + key + "' in [sweep]");
      }
    } else {  // run
      if (key == "mode") {
        if (value == "vanilla") cfg.mode = DecodeMode::kVanilla;
        else if (value == "lantern") cfg.mode = DecodeMode::kLantern;
        else parse_fail(val_at, "mode must be vanilla or lantern");
      } else if (key == "metric") {
        if (value == "tvd") cfg.metric = DistanceMetricKind::kTvd;
        else if (value == "jsd") cfg.metric = DistanceMetricKind::kJsd;
        else parse_fail(val_at, "metric must be tvd or jsd");
      } else if (key == "proximity") {
        if (value == "l2") cfg.proximity.kind = ProximityMeasure::Kind::kL2;
        else if (value == "cosine") cfg.proximity.kind = ProximityMeasure::Kind::kCosine;
        else if (value == "random") cfg.proximity.kind = ProximityMeasure::Kind::kRandom;
        else parse_fail(val_at, "proximity must be l2, cosine or random");
      } else if (key == "proximity_seed") {
        cfg.proximity.seed = parse_u64(value, val_at);
      } else if (key == "trials") {
        cfg.trials = static_cast<int>(parse_int(value, val_at));
      } else if (key == "min_target_len") {
        cfg.min_target_len = static_cast<int>(parse_int(value, val_at));
      } else if (key == "top_k") {
        cfg.top_k = static_cast<int>(parse_int(value, val_at));
      } else if (key == "top_p") {
        cfg.top_p = parse_double(value, val_at);
      } else if (key == "out_dir") {
        cfg.out_dir = std::string(value);
      } else if (key == "seed") {
        cfg.seed = parse_u64(value, val_at);
      } else if (key == "write_traces") {
        cfg.write_traces = parse_bool(value, val_at);
      } else {
        parse_fail(at, "unknown key '" + key + "' in [run]");
      }
    }
  }

  // Field-level invariants.
  if (cfg.synthesize_model) {
    if (cfg.vocab < 2) range_fail("model.vocab", "must be >= 2");
    if (cfg.order < 0 || cfg.order > 3) range_fail("model.order", "must be in [0, 3]");
    if (!(cfg.concentration > 0.0)) range_fail("model.concentration", "must be > 0");
    if (cfg.drafter_noise < 0.0 || cfg.drafter_noise > 1.0) {
      range_fail("model.drafter_noise", "must be in [0, 1]");
    }
    if (cfg.drafter_blur < 0) range_fail("model.drafter_blur", "must be >= 0");
    if (!(cfg.drafter_sharpness > 0.0)) {
      range_fail("model.drafter_sharpness", "must be > 0");
    }
  } else {
    if (cfg.target_path.empty()) range_fail("model.target_path", "required for load");
    if (cfg.drafter_path.empty()) range_fail("model.drafter_path", "required for load");
  }
  if (cfg.synthesize_codebook) {
    if (cfg.dim < 1) range_fail("codebook.dim", "must be >= 1");
  } else if (cfg.codebook_path.empty()) {
    range_fail("codebook.path", "required for load");
  }

  // Default sweep grid: the reference k in {100, 300, 1000} scaled down
  // proportionally when V < 1000.
  if (!sweep_k_given) {
    for (const int reference : {100, 300, 1000}) {
      int k = reference;
      if (cfg.synthesize_model && cfg.vocab < 1000) {
        k = std::max(1, static_cast<int>(std::llround(
                            reference * static_cast<double>(cfg.vocab) / 1000.0)));
        k = std::min(k, cfg.vocab);
      }
      if (std::find(cfg.k_values.begin(), cfg.k_values.end(), k) ==
          cfg.k_values.end()) {
        cfg.k_values.push_back(k);
      }
    }
  }
  if (cfg.delta_values.empty()) cfg.delta_values = {0.05, 0.1, 0.2, 0.4};
  if (cfg.tau_values.empty()) cfg.tau_values = {1.0};
  if (cfg.gamma_values.empty()) cfg.gamma_values = {4};

  if (cfg.k_values.empty()) range_fail("sweep.k", "must be nonempty");
  for (const int k : cfg.k_values) {
    if (k < 1) range_fail("sweep.k", "entries must be >= 1");
    if (cfg.synthesize_model && k > cfg.vocab) {
      range_fail("sweep.k", "entries must not exceed vocab");
    }
  }
  const double delta_cap = cfg.metric == DistanceMetricKind::kTvd ? 1.0 : kLn2;
  for (const double d : cfg.delta_values) {
    if (!(d > 0.0) || d > delta_cap) {
      range_fail("sweep.delta", "entries must lie in (0, " +
                                    format_double(delta_cap) + "] for this metric");
    }
  }
  for (const double t : cfg.tau_values) {
    if (t < 0.0) range_fail("sweep.tau", "entries must be >= 0");
  }
  for (const int g : cfg.gamma_values) {
    if (g < 1) range_fail("sweep.gamma", "entries must be >= 1");
  }
  if (cfg.trials < 1) range_fail("run.trials", "must be >= 1");
  if (cfg.min_target_len < 1) range_fail("run.min_target_len", "must be >= 1");
  if (cfg.top_k != -1) {
    if (cfg.top_k < 1) range_fail("run.top_k", "must be >= 1 (or -1 for full vocab)");
    if (cfg.synthesize_model && cfg.top_k > cfg.vocab) {
      range_fail("run.top_k", "must not exceed vocab");
    }
  }
  if (!(cfg.top_p > 0.0) || cfg.top_p > 1.0) {
    range_fail("run.top_p", "must be in (0, 1]");
  }
  return cfg;
}

std::string resolved_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[model]\n";
  out << "source = " << (cfg.synthesize_model ? "synthesize" : "load") << "\n";
  if (cfg.synthesize_model) {
    out << "vocab = " << cfg.vocab << "\n";
    out << "order = " << cfg.order << "\n";
    out << "concentration = " << format_double(cfg.concentration) << "\n";
    out << "drafter_noise = " << format_double(cfg.drafter_noise) << "\n";
    out << "drafter_blur = " << cfg.drafter_blur << "\n";
    out << "drafter_sharpness = " << format_double(cfg.drafter_sharpness) << "\n";
    out << "seed = " << cfg.model_seed << "\n";
  } else {
    out << "target_path = " << cfg.target_path.string() << "\n";
    out << "drafter_path = " << cfg.drafter_path.string() << "\n";
  }
  out << "\n[codebook]\n";
  out << "source = " << (cfg.synthesize_codebook ? "synthesize" : "load") << "\n";
  if (cfg.synthesize_codebook) {
    out << "dim = " << cfg.dim << "\n";
    out << "seed = " << cfg.codebook_seed << "\n";
    out << "correlated = " << (cfg.correlated ? "true" : "false") << "\n";
  } else {
    out << "path = " << cfg.codebook_path.string() << "\n";
  }
  out << "\n[sweep]\n";
  const auto join_ints = [&out](const char* key, const std::vector<int>& xs) {
    out << key << " =";
    for (size_t i = 0; i < xs.size(); ++i) out << (i ? ", " : " ") << xs[i];
    out << "\n";
  };
  const auto join_doubles = [&out](const char* key, const std::vector<double>& xs) {
    out << key << " =";
    for (size_t i = 0; i < xs.size(); ++i) {
      out << (i ? ", " : " ") << format_double(xs[i]);
    }
    out << "\n";
  };
  join_ints("k", cfg.k_values);
  join_doubles("delta", cfg.delta_values);
  join_doubles("tau", cfg.tau_values);
  join_ints("gamma", cfg.gamma_values);
  out << "\n[run]\n";
  out << "mode = " << mode_name(cfg.mode) << "\n";
  out << "metric = " << metric_name(cfg.metric) << "\n";
  out << "proximity = " << proximity_name(cfg.proximity.kind) << "\n";
  out << "proximity_seed = " << cfg.proximity.seed << "\n";
  out << "trials = " << cfg.trials << "\n";
  out << "min_target_len = " << cfg.min_target_len << "\n";
  out << "top_k = " << cfg.top_k << "\n";
  out << "top_p = " << format_double(cfg.top_p) << "\n";
  out << "out_dir = " << cfg.out_dir.string() << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "write_traces = " << (cfg.write_traces ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace specdec
