#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "meeso/acquisition.hpp"
#include "meeso/engine.hpp"
#include "meeso/errors.hpp"
#include "meeso/evaluator.hpp"
#include "meeso/pareto.hpp"
#include "meeso/search_space.hpp"
#include "meeso/serialize.hpp"
#include "meeso/surrogate.hpp"

namespace py = pybind11;
using namespace meeso;

namespace {

template <typename T>
T from_json_text(const std::string& text) {
    return nlohmann::json::parse(text).get<T>();
}

template <typename T>
std::string to_json_text(const T& v) {
    return nlohmann::json(v).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multi-objective surrogate-assisted pipeline search (C++ core)";

    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
    py::register_exception<ExhaustedSpace>(m, "ExhaustedSpace", PyExc_RuntimeError);
    py::register_exception<InsufficientHistory>(m, "InsufficientHistory", PyExc_RuntimeError);
    py::register_exception<EmptySpace>(m, "EmptySpace", PyExc_RuntimeError);
    py::register_exception<NotFound>(m, "NotFound", PyExc_FileNotFoundError);

    py::enum_<BlockFamily>(m, "BlockFamily")
        .value("Plain", BlockFamily::Plain)
        .value("Residual", BlockFamily::Residual)
        .value("Bottleneck", BlockFamily::Bottleneck);
    py::enum_<Preprocessing>(m, "Preprocessing")
        .value("None_", Preprocessing::None)
        .value("Standardize", Preprocessing::Standardize)
        .value("NoiseAugment", Preprocessing::NoiseAugment);
    py::enum_<Optimizer>(m, "Optimizer")
        .value("PlainGradientDescent", Optimizer::PlainGradientDescent)
        .value("AdaptiveMoments", Optimizer::AdaptiveMoments);
    py::enum_<ObjectiveId>(m, "ObjectiveId").value("Error", ObjectiveId::Error).value("Uncertainty", ObjectiveId::Uncertainty);

    py::class_<ArchitectureSpec>(m, "ArchitectureSpec")
        .def(py::init<>())
        .def_readwrite("block_family", &ArchitectureSpec::block_family)
        .def_readwrite("blocks_per_layer", &ArchitectureSpec::blocks_per_layer)
        .def_readwrite("widths_per_layer", &ArchitectureSpec::widths_per_layer)
        .def_readwrite("dropout_rate", &ArchitectureSpec::dropout_rate)
        .def(py::self == py::self);

    py::class_<PipelineConfig>(m, "PipelineConfig")
        .def(py::init<>())
        .def_readwrite("preprocessing", &PipelineConfig::preprocessing)
        .def_readwrite("optimizer", &PipelineConfig::optimizer)
        .def_readwrite("epochs", &PipelineConfig::epochs)
        .def_readwrite("learning_rate", &PipelineConfig::learning_rate)
        .def_readwrite("batch_size", &PipelineConfig::batch_size)
        .def(py::self == py::self);

    py::class_<Candidate>(m, "Candidate")
        .def(py::init<>())
        .def(py::init<ArchitectureSpec, PipelineConfig>(), py::arg("arch"), py::arg("config"))
        .def_readwrite("arch", &Candidate::arch)
        .def_readwrite("config", &Candidate::config)
        .def("to_json", &to_json_text<Candidate>)
        .def_static("from_json", &from_json_text<Candidate>)
        .def(py::self == py::self);

    py::class_<ObjectiveVector>(m, "ObjectiveVector")
        .def(py::init<>())
        .def(py::init([](double e, double u) { return ObjectiveVector{e, u}; }), py::arg("error"), py::arg("uncertainty"))
        .def_readwrite("error", &ObjectiveVector::error)
        .def_readwrite("uncertainty", &ObjectiveVector::uncertainty)
        .def("__repr__", [](const ObjectiveVector& o) {
            return "ObjectiveVector(error=" + std::to_string(o.error) + ", uncertainty=" + std::to_string(o.uncertainty) + ")";
        })
        .def(py::self == py::self);

    py::class_<EvaluationRecord>(m, "EvaluationRecord")
        .def(py::init<>())
        .def_readwrite("candidate", &EvaluationRecord::candidate)
        .def_readwrite("objectives", &EvaluationRecord::objectives)
        .def_readwrite("wall_seconds", &EvaluationRecord::wall_seconds)
        .def_readwrite("seed", &EvaluationRecord::seed)
        .def_readwrite("iteration", &EvaluationRecord::iteration)
        .def_readwrite("heuristic_id", &EvaluationRecord::heuristic_id)
        .def_readwrite("warnings", &EvaluationRecord::warnings)
        .def("to_json", &to_json_text<EvaluationRecord>)
        .def_static("from_json", &from_json_text<EvaluationRecord>);

    py::class_<Heuristic>(m, "Heuristic")
        .def_readonly("id", &Heuristic::id)
        .def_readwrite("block_family", &Heuristic::block_family)
        .def("to_json", &to_json_text<Heuristic>)
        .def_static("from_json", &from_json_text<Heuristic>);
    m.def("builtin_heuristic", [](const std::string& name) { return builtin_heuristic(name); }, py::arg("name"));

    m.def("validate_candidate", [](const Candidate& c) { return validate_candidate(c).violations; },
          "List of violated invariants; empty when valid.");

    m.def("dominates", [](const std::vector<double>& h, const std::vector<double>& k) { return dominates(h, k); },
          py::arg("h"), py::arg("k"));
    m.def("pareto_front_indices", &non_dominated_indices, py::arg("points"),
          "Indices of the non-dominated points, ascending.");
    m.def("pareto_front",
          [](const std::vector<EvaluationRecord>& records, bool with_time) {
              return pareto_front(records, with_time ? ObjectiveSet::ErrorUncertaintyTime : ObjectiveSet::ErrorUncertainty);
          },
          py::arg("records"), py::arg("with_time") = false);
    m.def("hypervolume_2d",
          [](const std::vector<std::pair<double, double>>& front, std::pair<double, double> reference) {
              std::vector<ObjectiveVector> pts;
              for (auto [e, u] : front) pts.push_back({e, u});
              return hypervolume_2d(pts, {reference.first, reference.second});
          },
          py::arg("front"), py::arg("reference") = std::pair<double, double>{1.0, 1.0});

    m.def("generate",
          [](const Heuristic& h, std::size_t count, std::int64_t seed) { return generate(h, count, seed).candidates; },
          py::arg("heuristic"), py::arg("count"), py::arg("seed"));
    m.def("encode", [](const Candidate& c) {
        const auto f = encode(c);
        return std::vector<double>(f.begin(), f.end());
    });
    m.def("mutate_neighbors",
          [](const Candidate& c, const Heuristic& h, std::size_t k, std::int64_t seed) {
              auto n = mutate_neighbors(c, h, k, seed);
              return py::make_tuple(n.candidates, n.short_count);
          },
          py::arg("candidate"), py::arg("heuristic"), py::arg("k"), py::arg("seed"));

    m.def("oracle_evaluate", &oracle_evaluate, py::arg("candidate"), py::arg("noise_seed"),
          py::arg("noise_sigma") = kOracleNoiseSigma);
    m.def("mc_uncertainty",
          [](const std::vector<std::vector<double>>& passes) {
              Eigen::MatrixXd mat(static_cast<Eigen::Index>(passes.size()),
                                  passes.empty() ? 0 : static_cast<Eigen::Index>(passes.front().size()));
              for (std::size_t r = 0; r < passes.size(); ++r)
                  for (std::size_t c = 0; c < passes[r].size(); ++c)
                      mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = passes[r][c];
              return mc_statistics(mat).uncertainty;
          },
          py::arg("passes"), "MC-Dropout uncertainty of one probe from N passes (rows) x classes.");
    m.def("evaluate_synthetic",
          [](const Candidate& c, std::int64_t seed, int mc_passes, std::size_t probes) {
              EvalOptions opts;
              opts.mc_passes = mc_passes;
              opts.n_probes = probes;
              opts.record_time = false;
              py::gil_scoped_release release;
              return evaluate(c, make_two_blobs(0), opts, {seed, 0, "python"});
          },
          py::arg("candidate"), py::arg("seed") = 0, py::arg("mc_passes") = 20, py::arg("probes") = 32,
          "Trains and evaluates a candidate on the built-in two-blob dataset.");

    m.def("assign_groups",
          [](const std::vector<EvaluationRecord>& records, int n_groups, ObjectiveId objective) {
              std::vector<int> labels;
              for (const auto& s : assign_groups(records, n_groups, objective)) labels.push_back(s.label);
              return labels;
          },
          py::arg("records"), py::arg("n_groups"), py::arg("objective") = ObjectiveId::Error);

    m.def("run_search",
          [](const std::string& config_json) {
              const RunConfig rc = nlohmann::json::parse(config_json).get<RunConfig>();
              if (rc.evaluator_kind == EvaluatorKind::Trainer) throw ContractViolation("run_search: use the CLI for trainer runs");
              RunResult result;
              {
                  py::gil_scoped_release release;
                  result = run(rc, nullptr);
              }
              return py::make_tuple(result.archive.records(), result.history.records());
          },
          py::arg("config_json"), "Runs an oracle search from a RunConfig JSON; returns (pareto, history).");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
