#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "meeso/dataset.hpp"
#include "meeso/engine.hpp"
#include "meeso/errors.hpp"
#include "meeso/evaluator.hpp"
#include "meeso/pareto.hpp"
#include "meeso/report.hpp"
#include "meeso/serialize.hpp"

namespace meeso::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct DataFlags {
    std::string evaluator = "oracle";
    std::string dataset;
    bool synthetic = false;
    bool has_header = false;
    std::int64_t data_seed = 0;
};

void add_data_flags(CLI::App& cmd, DataFlags& f) {
    cmd.add_option("--evaluator", f.evaluator, "Objective source")
        ->check(CLI::IsMember({"trainer", "oracle"}))
        ->capture_default_str();
    cmd.add_option("--dataset", f.dataset, "CSV dataset: features then an integer label per row");
    cmd.add_flag("--synthetic", f.synthetic, "Use the built-in two-blob dataset");
    cmd.add_flag("--has-header", f.has_header, "Dataset CSV starts with a header row");
    cmd.add_option("--data-seed", f.data_seed, "Seed for the synthetic dataset and the train/test split")
        ->capture_default_str();
}

// Empty optional when no dataset is configured.
std::optional<Dataset> load_dataset(const DataFlags& f) {
    if (f.synthetic) return make_two_blobs(f.data_seed);
    if (!f.dataset.empty()) return load_csv(f.dataset, f.has_header, f.data_seed);
    return std::nullopt;
}

DatasetSource dataset_source(const DataFlags& f) {
    DatasetSource s;
    if (f.synthetic) s.kind = DatasetSource::Kind::Synthetic;
    else if (!f.dataset.empty()) s.kind = DatasetSource::Kind::Csv;
    s.path = f.dataset;
    s.has_header = f.has_header;
    s.seed = f.data_seed;
    return s;
}

std::optional<Dataset> load_dataset(const DatasetSource& s) {
    if (s.kind == DatasetSource::Kind::Synthetic) return make_two_blobs(s.seed);
    if (s.kind == DatasetSource::Kind::Csv) return load_csv(s.path, s.has_header, s.seed);
    return std::nullopt;
}

std::vector<Heuristic> parse_heuristics(const std::vector<std::string>& names) {
    std::vector<Heuristic> out;
    for (const auto& n : names) out.push_back(builtin_heuristic(n));
    return out;
}

void write_outputs(const fs::path& dir, const RunConfig& rc, const RunResult& result) {
    result.history.write_jsonl(dir / "history.jsonl");
    write_pareto_csv(dir / "pareto.csv", result.archive.records());
    std::ofstream(dir / "summary.json", std::ios::trunc) << run_summary(rc, result).dump(2) << '\n';
}

// --- search -------------------------------------------------------------------

struct SearchFlags {
    DataFlags data;
    std::vector<std::string> heuristics{"residual"};
    std::size_t init = 20;
    std::size_t k = 4;
    std::size_t iters = 5;
    int groups = 5;
    std::int64_t seed = 0;
    std::string out;
    std::size_t jobs = 1;
    std::optional<double> max_error;
    std::optional<double> max_uncertainty;
    bool with_time = false;
    bool dedupe = false;
    std::string selection = "surrogate";
    int mc_passes = 20;
    std::size_t probes = 32;
    bool no_timing = false;
    std::string config;
    bool resume = false;
};

int cmd_search(const SearchFlags& f, const CLI::App& cmd, std::ostream& out, std::ostream& err) {
    RunConfig rc;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) {
            err << "error: config not found: " << f.config << '\n';
            return kExitUsage;
        }
        try {
            rc = json::parse(in).get<RunConfig>();
        } catch (const std::exception& e) {
            err << "error: bad config " << f.config << ": " << e.what() << '\n';
            return kExitUsage;
        }
    } else {
        rc.heuristics = parse_heuristics(f.heuristics);
    }

    auto given = [&](const char* name) { return f.config.empty() || cmd.count(name) > 0; };
    if (!f.config.empty() && cmd.count("--heuristics")) rc.heuristics = parse_heuristics(f.heuristics);
    if (given("--init")) rc.initial_space_size = f.init;
    if (given("--k")) rc.arches_per_iter = f.k;
    if (given("--iters")) rc.inner_iterations = f.iters;
    if (given("--groups")) rc.n_groups = f.groups;
    if (given("--seed")) rc.run_seed = f.seed;
    if (given("--evaluator"))
        rc.evaluator_kind = f.data.evaluator == "trainer" ? EvaluatorKind::Trainer : EvaluatorKind::Oracle;
    if (given("--selection")) rc.selection = f.selection == "random" ? SelectionPolicy::Random : SelectionPolicy::Surrogate;
    if (given("--with-time")) rc.with_time = f.with_time;
    if (given("--dedupe")) rc.dedupe = f.dedupe;
    if (given("--mc-passes")) rc.eval.mc_passes = f.mc_passes;
    if (given("--probes")) rc.eval.n_probes = f.probes;
    if (given("--no-timing")) rc.eval.record_time = !f.no_timing;
    if (f.max_error || f.max_uncertainty)
        rc.satisfied_thresholds = Thresholds{f.max_error.value_or(1.0), f.max_uncertainty.value_or(1.0)};
    if (cmd.count("--dataset") || cmd.count("--synthetic") || f.config.empty()) rc.dataset = dataset_source(f.data);

    if (auto problems = validate_run_config(rc); !problems.empty()) {
        for (const auto& p : problems) err << "error: " << p << '\n';
        return kExitUsage;
    }

    const auto dataset = load_dataset(rc.dataset);
    if (rc.evaluator_kind == EvaluatorKind::Trainer && !dataset) {
        err << "error: --evaluator trainer needs --dataset PATH or --synthetic\n";
        return kExitUsage;
    }

    const fs::path dir = f.out;
    fs::create_directories(dir);
    const fs::path checkpoint = dir / "checkpoint.jsonl";

    RunOptions opts;
    opts.jobs = f.jobs;
    opts.checkpoint_path = checkpoint;
    const Dataset* data = dataset ? &*dataset : nullptr;

    RunResult result;
    if (f.resume && fs::exists(checkpoint)) {
        auto state = resume(checkpoint);
        if (state.truncated_tail) err << "warning: dropped a partial final line from " << checkpoint.string() << '\n';
        rc = state.config;
        const auto resumed_data = load_dataset(rc.dataset);
        result = continue_run(state, checkpoint, resumed_data ? &*resumed_data : nullptr, opts);
    } else {
        result = run(rc, data, opts);
    }

    write_outputs(dir, rc, result);
    out << "records: " << result.history.size() << ", pareto: " << result.archive.size() << ", out: " << dir.string()
        << '\n';
    return kExitOk;
}

// --- pareto -----------------------------------------------------------------------

struct ParetoFlags {
    std::string history;
    bool with_time = false;
    std::string out = ".";
};

int cmd_pareto(const ParetoFlags& f, std::ostream& out, std::ostream& err) {
    HistoryDB history;
    try {
        history = HistoryDB::load_jsonl(f.history);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    const auto set = f.with_time ? ObjectiveSet::ErrorUncertaintyTime : ObjectiveSet::ErrorUncertainty;
    const auto front = pareto_front(history.records(), set);
    fs::create_directories(f.out);
    write_pareto_csv(fs::path(f.out) / "pareto.csv", front);
    out << "records: " << history.size() << ", pareto: " << front.size() << '\n';
    return kExitOk;
}

// --- eval -----------------------------------------------------------------------------

struct EvalFlags {
    DataFlags data;
    std::string candidate;
    std::int64_t seed = 0;
    int mc_passes = 20;
    std::size_t probes = 32;
    bool no_timing = false;
    std::string out;
};

int cmd_eval(const EvalFlags& f, std::ostream& out, std::ostream& err) {
    Candidate c;
    {
        std::ifstream in(f.candidate);
        if (!in) {
            err << "error: candidate not found: " << f.candidate << '\n';
            return kExitUsage;
        }
        try {
            c = json::parse(in).get<Candidate>();
        } catch (const std::exception& e) {
            err << "error: bad candidate " << f.candidate << ": " << e.what() << '\n';
            return kExitUsage;
        }
    }
    if (auto v = validate_candidate(c); !v.ok()) {
        err << "error: invalid candidate\n";
        for (const auto& s : v.violations) err << "  - " << s << '\n';
        return kExitUsage;
    }

    const EvalContext ctx{f.seed, 0, "eval"};
    EvaluationRecord record;
    if (f.data.evaluator == "oracle") {
        record = oracle_record(c, ctx);
    } else {
        if (f.data.dataset.empty() && !f.data.synthetic) {
            err << "error: --evaluator trainer needs --dataset PATH or --synthetic\n";
            return kExitUsage;
        }
        if (!f.data.dataset.empty() && !fs::exists(f.data.dataset)) {
            err << "error: dataset not found: " << f.data.dataset << '\n';
            return kExitUsage;
        }
        const auto dataset = load_dataset(f.data);
        EvalOptions opts;
        opts.mc_passes = f.mc_passes;
        opts.n_probes = f.probes;
        opts.record_time = !f.no_timing;
        record = evaluate(c, *dataset, opts, ctx);
    }

    const std::string text = json(record).dump();
    out << text << '\n';
    if (!f.out.empty()) {
        fs::create_directories(f.out);
        std::ofstream(fs::path(f.out) / "record.json", std::ios::trunc) << text << '\n';
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-objective surrogate-assisted pipeline search"};
    app.require_subcommand(1);

    SearchFlags search;
    auto* search_cmd = app.add_subcommand("search", "Run the self-optimizing search");
    add_data_flags(*search_cmd, search.data);
    search_cmd->add_option("--heuristics", search.heuristics, "Built-in heuristics in order: plain, residual, bottleneck")
        ->delimiter(',')
        ->check(CLI::IsMember(builtin_heuristic_names()))
        ->capture_default_str();
    search_cmd->add_option("--init", search.init, "Initial space size")->check(CLI::PositiveNumber)->capture_default_str();
    search_cmd->add_option("--k", search.k, "Candidates evaluated per iteration")->check(CLI::PositiveNumber)->capture_default_str();
    search_cmd->add_option("--iters", search.iters, "Inner iterations per heuristic")->check(CLI::PositiveNumber)->capture_default_str();
    search_cmd->add_option("--groups", search.groups, "Rank groups")->check(CLI::PositiveNumber)->capture_default_str();
    search_cmd->add_option("--seed", search.seed, "Run seed")->capture_default_str();
    search_cmd->add_option("--out", search.out, "Output directory")->required();
    search_cmd->add_option("--jobs", search.jobs, "Parallel evaluations")->check(CLI::PositiveNumber)->capture_default_str();
    search_cmd->add_option("--max-error", search.max_error, "Stop once an archive member reaches this error")
        ->check(CLI::Range(0.0, 1.0));
    search_cmd->add_option("--max-uncertainty", search.max_uncertainty, "... and this uncertainty")
        ->check(CLI::Range(0.0, 1.0));
    search_cmd->add_flag("--with-time", search.with_time, "Add wall_seconds as an archive objective");
    search_cmd->add_flag("--dedupe", search.dedupe, "Reject objective-equal archive entries");
    search_cmd->add_option("--selection", search.selection, "Acquisition policy")
        ->check(CLI::IsMember({"surrogate", "random"}))
        ->capture_default_str();
    search_cmd->add_option("--mc-passes", search.mc_passes, "MC-Dropout passes")->check(CLI::Range(2, 1 << 20))->capture_default_str();
    search_cmd->add_option("--probes", search.probes, "Uncertainty probes")->check(CLI::PositiveNumber)->capture_default_str();
    search_cmd->add_flag("--no-timing", search.no_timing, "Record wall_seconds as 0");
    search_cmd->add_option("--config", search.config, "run.json; explicit flags override it");
    search_cmd->add_flag("--resume", search.resume, "Continue from OUT/checkpoint.jsonl if present");

    ParetoFlags pareto;
    auto* pareto_cmd = app.add_subcommand("pareto", "Recompute the Pareto front of a history file");
    pareto_cmd->add_option("history", pareto.history, "history.jsonl")->required();
    pareto_cmd->add_flag("--with-time", pareto.with_time, "Include wall_seconds as an objective");
    pareto_cmd->add_option("--out", pareto.out, "Directory for pareto.csv")->capture_default_str();

    EvalFlags eval;
    eval.data.evaluator = "trainer";
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate one candidate and print its record");
    eval_cmd->add_option("candidate", eval.candidate, "Candidate JSON file")->required();
    add_data_flags(*eval_cmd, eval.data);
    eval_cmd->add_option("--seed", eval.seed, "Evaluation seed")->capture_default_str();
    eval_cmd->add_option("--mc-passes", eval.mc_passes, "MC-Dropout passes")->check(CLI::Range(2, 1 << 20))->capture_default_str();
    eval_cmd->add_option("--probes", eval.probes, "Uncertainty probes")->check(CLI::PositiveNumber)->capture_default_str();
    eval_cmd->add_flag("--no-timing", eval.no_timing, "Record wall_seconds as 0");
    eval_cmd->add_option("--out", eval.out, "Also write record.json here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    configure_logging();
    try {
        if (*search_cmd) return cmd_search(search, *search_cmd, out, err);
        if (*pareto_cmd) return cmd_pareto(pareto, out, err);
        if (*eval_cmd) return cmd_eval(eval, out, err);
    } catch (const ContractViolation& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace meeso::cli
