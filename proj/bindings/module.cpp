#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "specdec/decode.hpp"
#include "specdec/experiment.hpp"
#include "specdec/metrics.hpp"
#include "specdec/oracle.hpp"

namespace py = pybind11;
using namespace specdec;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Speculative decoding engine with relaxed latent-neighbor acceptance";

  py::register_exception<Error>(m, "SpecdecError");

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next_unit", &Rng::next_unit)
      .def("next_below", &Rng::next_below)
      .def("next_gaussian", &Rng::next_gaussian);

  py::enum_<DistanceMetricKind>(m, "DistanceMetricKind")
      .value("TVD", DistanceMetricKind::kTvd)
      .value("JSD", DistanceMetricKind::kJsd);

  py::class_<ProbDist>(m, "ProbDist")
      .def(py::init<std::vector<double>>(), py::arg("mass"))
      .def_property_readonly("mass", &ProbDist::mass)
      .def("__len__", &ProbDist::size)
      .def("__getitem__",
           [](const ProbDist& d, TokenId t) {
             if (t < 0 || t >= d.size()) throw py::index_error();
             return d[t];
           })
      .def("argmax", &ProbDist::argmax);

  m.def("normalize", &normalize, py::arg("raw"));
  m.def("residual_plus", &residual_plus, py::arg("q"), py::arg("p"));
  m.def("tvd", &tvd, py::arg("a"), py::arg("b"));
  m.def("jsd", &jsd, py::arg("a"), py::arg("b"));
  m.def("apply_temperature", &apply_temperature, py::arg("d"), py::arg("tau"));
  m.def("truncate_top_k_p", &truncate_top_k_p, py::arg("d"), py::arg("top_k"),
        py::arg("top_p"));
  m.def("sample", &sample, py::arg("d"), py::arg("rng"));

  py::class_<ProximityMeasure> measure(m, "ProximityMeasure");
  py::enum_<ProximityMeasure::Kind>(measure, "Kind")
      .value("L2", ProximityMeasure::Kind::kL2)
      .value("COSINE", ProximityMeasure::Kind::kCosine)
      .value("RANDOM", ProximityMeasure::Kind::kRandom);
  measure.def_static("l2", &ProximityMeasure::l2)
      .def_static("cosine", &ProximityMeasure::cosine)
      .def_static("random", &ProximityMeasure::random, py::arg("seed"))
      .def_readonly("kind", &ProximityMeasure::kind)
      .def_readonly("seed", &ProximityMeasure::seed);

  py::class_<Codebook>(m, "Codebook")
      .def(py::init<int, int, std::vector<float>>(), py::arg("vocab"),
           py::arg("dim"), py::arg("data"))
      .def_property_readonly("vocab", &Codebook::vocab)
      .def_property_readonly("dim", &Codebook::dim)
      .def("row",
           [](const Codebook& cb, TokenId t) {
             if (t < 0 || t >= cb.vocab()) throw py::index_error();
             const auto r = cb.row(t);
             return std::vector<float>(r.begin(), r.end());
           })
      .def_static("gaussian", &Codebook::gaussian, py::arg("vocab"),
                  py::arg("dim"), py::arg("seed"))
      .def_static("gaussian_correlated", &Codebook::gaussian_correlated,
                  py::arg("vocab"), py::arg("dim"), py::arg("seed"))
      .def("save_binary", &Codebook::save_binary, py::arg("path"))
      .def_static("load_binary", &Codebook::load_binary, py::arg("path"))
      .def_static("load_csv", &Codebook::load_csv, py::arg("path"));

  m.def("pairwise_distance", &pairwise_distance, py::arg("codebook"),
        py::arg("a"), py::arg("b"), py::arg("measure"));

  py::class_<NeighborIndex>(m, "NeighborIndex")
      .def_property_readonly("vocab", &NeighborIndex::vocab)
      .def_property_readonly("k", &NeighborIndex::k)
      .def("neighbors",
           [](const NeighborIndex& idx, TokenId t) {
             if (t < 0 || t >= idx.vocab()) throw py::index_error();
             const auto n = idx.neighbors(t);
             return std::vector<TokenId>(n.begin(), n.end());
           })
      .def("distances", [](const NeighborIndex& idx, TokenId t) {
        if (t < 0 || t >= idx.vocab()) throw py::index_error();
        const auto d = idx.distances(t);
        return std::vector<double>(d.begin(), d.end());
      });

  m.def("build_neighbor_index", &build_neighbor_index, py::arg("codebook"),
        py::arg("k"), py::arg("measure"));
  m.def("replace_with_uniform_neighbor", &replace_with_uniform_neighbor,
        py::arg("t"), py::arg("index"), py::arg("rng"));

  py::class_<DivergenceBound>(m, "DivergenceBound")
      .def(py::init<double, DistanceMetricKind>(), py::arg("delta"),
           py::arg("metric") = DistanceMetricKind::kTvd)
      .def_readonly("delta", &DivergenceBound::delta)
      .def_readonly("metric", &DivergenceBound::metric);

  py::class_<ProximitySet>(m, "ProximitySet")
      .def_readonly("candidate", &ProximitySet::candidate)
      .def_readonly("members", &ProximitySet::members)
      .def_readonly("aggregated_mass", &ProximitySet::aggregated_mass)
      .def_readonly("realized_divergence", &ProximitySet::realized_divergence);

  py::class_<DistortedTarget>(m, "DistortedTarget")
      .def_readonly("dist", &DistortedTarget::dist)
      .def_readonly("source_set", &DistortedTarget::source_set);

  m.def("build_proximity_set", &build_proximity_set, py::arg("q"),
        py::arg("candidate"), py::arg("index"), py::arg("bound"));
  m.def("distort_target", &distort_target, py::arg("q"), py::arg("set"));

  py::class_<AmbiguityProfile>(m, "AmbiguityProfile")
      .def(py::init([](double concentration, std::uint64_t seed) {
             return AmbiguityProfile{concentration, seed};
           }),
           py::arg("concentration"), py::arg("seed"))
      .def_readonly("concentration", &AmbiguityProfile::concentration)
      .def_readonly("seed", &AmbiguityProfile::seed);

  py::class_<TableModel>(m, "TableModel")
      .def(py::init<int, int, std::map<Context, ProbDist>, ProbDist>(),
           py::arg("vocab"), py::arg("order"), py::arg("tables"),
           py::arg("fallback"))
      .def_property_readonly("vocab", &TableModel::vocab)
      .def_property_readonly("order", &TableModel::order)
      .def("next_dist", &TableModel::next_dist, py::arg("ctx"),
           py::return_value_policy::copy)
      .def("greedy_token", &TableModel::greedy_token, py::arg("ctx"))
      .def("to_text", &TableModel::to_text)
      .def_static("from_text", &TableModel::from_text, py::arg("text"))
      .def("save", &TableModel::save, py::arg("path"))
      .def_static("load", &TableModel::load, py::arg("path"));

  py::class_<DrafterShape>(m, "DrafterShape")
      .def(py::init([](int blur, double sharpness) {
             return DrafterShape{blur, sharpness};
           }),
           py::arg("blur") = 0, py::arg("sharpness") = 1.0)
      .def_readonly("blur", &DrafterShape::blur)
      .def_readonly("sharpness", &DrafterShape::sharpness);

  m.def(
      "synthesize_pair",
      [](int vocab, int order, const AmbiguityProfile& profile,
         double drafter_noise, const DrafterShape& shape) {
        ModelPair pair = synthesize_pair(vocab, order, profile, drafter_noise, shape);
        return py::make_tuple(std::move(pair.target), std::move(pair.drafter));
      },
      py::arg("vocab"), py::arg("order"), py::arg("profile"),
      py::arg("drafter_noise"), py::arg("shape") = DrafterShape{});

  py::enum_<DecodeMode>(m, "DecodeMode")
      .value("VANILLA", DecodeMode::kVanilla)
      .value("LANTERN", DecodeMode::kLantern);

  py::class_<DecodeConfig>(m, "DecodeConfig")
      .def(py::init<>())
      .def_readwrite("gamma", &DecodeConfig::gamma)
      .def_readwrite("k", &DecodeConfig::k)
      .def_readwrite("bound", &DecodeConfig::bound)
      .def_readwrite("tau", &DecodeConfig::tau)
      .def_readwrite("top_k", &DecodeConfig::top_k)
      .def_readwrite("top_p", &DecodeConfig::top_p)
      .def_readwrite("mode", &DecodeConfig::mode)
      .def_readwrite("min_target_len", &DecodeConfig::min_target_len);

  py::class_<StepOutcome>(m, "StepOutcome")
      .def_readonly("drafts", &StepOutcome::drafts)
      .def_readonly("accept_probs", &StepOutcome::accept_probs)
      .def_readonly("accepted_count", &StepOutcome::accepted_count)
      .def_readonly("resampled", &StepOutcome::resampled)
      .def_readonly("bonus", &StepOutcome::bonus)
      .def_readonly("proximity_sets", &StepOutcome::proximity_sets);

  py::class_<DecodeTrace>(m, "DecodeTrace")
      .def_readonly("steps", &DecodeTrace::steps)
      .def_readonly("output", &DecodeTrace::output)
      .def_readonly("prompt_len", &DecodeTrace::prompt_len)
      .def_readonly("rng_seed", &DecodeTrace::rng_seed);

  m.def("adjusted_next", &adjusted_next, py::arg("model"), py::arg("ctx"),
        py::arg("cfg"));
  m.def("draft_chain", &draft_chain, py::arg("drafter"), py::arg("ctx"),
        py::arg("gamma"), py::arg("cfg"), py::arg("rng"));
  m.def("verify_vanilla", &verify_vanilla, py::arg("target"), py::arg("drafter"),
        py::arg("ctx"), py::arg("drafts"), py::arg("cfg"), py::arg("rng"));
  m.def("verify_lantern", &verify_lantern, py::arg("target"), py::arg("drafter"),
        py::arg("ctx"), py::arg("drafts"), py::arg("index"), py::arg("cfg"),
        py::arg("rng"));
  m.def("verify_lantern_greedy", &verify_lantern_greedy, py::arg("target"),
        py::arg("drafter"), py::arg("ctx"), py::arg("drafts"), py::arg("index"),
        py::arg("cfg"));
  m.def(
      "decode",
      [](const TableModel& target, const TableModel& drafter, const Context& prompt,
         const DecodeConfig& cfg, const NeighborIndex* idx, std::uint64_t seed) {
        return decode(target, drafter, prompt, cfg, idx, seed);
      },
      py::arg("target"), py::arg("drafter"), py::arg("prompt"), py::arg("cfg"),
      py::arg("index").none(true), py::arg("seed"));

  py::class_<StepLaw>(m, "StepLaw")
      .def_readonly("law", &StepLaw::law)
      .def_readonly("conditional_laws", &StepLaw::conditional_laws);

  m.def("enumerate_vanilla_step", &enumerate_vanilla_step, py::arg("q"),
        py::arg("p"), py::arg("cap") = 64);
  m.def("enumerate_lantern_step", &enumerate_lantern_step, py::arg("q"),
        py::arg("p"), py::arg("index"), py::arg("bound"), py::arg("cap") = 64);
  m.def("empirical_step_law", &empirical_step_law, py::arg("step"),
        py::arg("trials"), py::arg("seed"), py::arg("vocab"));

  m.def("mean_accepted_length", &mean_accepted_length, py::arg("traces"));
  m.def("avg_accept_prob_first_draft", &avg_accept_prob_first_draft,
        py::arg("traces"));
  m.def("ambiguity_stats", &ambiguity_stats, py::arg("model"), py::arg("contexts"),
        py::arg("top_n"));
  m.def("drafter_accuracy", &drafter_accuracy, py::arg("target"),
        py::arg("drafter"), py::arg("contexts"), py::arg("ks"));
  m.def("set_size_profile", &set_size_profile, py::arg("traces"));

  m.def(
      "run_config_text",
      [](const std::string& text) { return run_cells(validate_config(text)).stats_csv; },
      py::arg("text"),
      "Parse a config document, run every sweep cell and return stats.csv "
      "contents without touching the filesystem.");
  m.def("stats_csv_header", &stats_csv_header);
}
