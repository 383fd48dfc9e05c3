#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "meeso/dataset.hpp"
#include "meeso/evaluator.hpp"
#include "meeso/pareto.hpp"
#include "meeso/types.hpp"

namespace meeso {

enum class EvaluatorKind { Trainer, Oracle };
enum class SelectionPolicy { Surrogate, Random };

struct Thresholds {
    double max_error = 1.0;
    double max_uncertainty = 1.0;

    bool operator==(const Thresholds&) const = default;
};

/// Where the dataset of a trainer run came from, so a checkpoint can be resumed.
struct DatasetSource {
    enum class Kind { None, Synthetic, Csv } kind = Kind::None;
    std::string path;
    bool has_header = false;
    std::int64_t seed = 0;

    bool operator==(const DatasetSource&) const = default;
};

struct RunConfig {
    std::vector<Heuristic> heuristics;
    std::size_t arches_per_iter = 4;
    std::size_t inner_iterations = 5;
    std::size_t initial_space_size = 20;
    int n_groups = 5;
    std::optional<Thresholds> satisfied_thresholds;
    std::int64_t run_seed = 0;
    EvaluatorKind evaluator_kind = EvaluatorKind::Oracle;
    SelectionPolicy selection = SelectionPolicy::Surrogate;
    /// Add wall_seconds as a third archive objective.
    bool with_time = false;
    bool dedupe = false;
    /// Cap on mutate_neighbors draws per archive member when building the acquisition pool.
    std::size_t neighbors_per_member = 5;
    double oracle_noise_sigma = kOracleNoiseSigma;
    EvalOptions eval;
    DatasetSource dataset;

    ObjectiveSet objective_set() const noexcept {
        return with_time ? ObjectiveSet::ErrorUncertaintyTime : ObjectiveSet::ErrorUncertainty;
    }
};

/// Violated RunConfig invariants; empty when valid.
std::vector<std::string> validate_run_config(const RunConfig& rc);

/// Append-only evaluation log H.
class HistoryDB {
public:
    HistoryDB() = default;
    explicit HistoryDB(std::filesystem::path path) : path_(std::move(path)) {}

    /// Appends in memory and, when a path is set, as one line of the file.
    void append(const EvaluationRecord& r);

    const std::vector<EvaluationRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

    /// Writes every record as JSON lines, replacing `path`.
    void write_jsonl(const std::filesystem::path& path) const;
    /// Strict loader; throws ParseError naming the first bad line.
    static HistoryDB load_jsonl(const std::filesystem::path& path);

private:
    std::optional<std::filesystem::path> path_;
    std::vector<EvaluationRecord> records_;
};

struct RunOptions {
    std::optional<std::filesystem::path> checkpoint_path;
    /// Worker threads for the evaluations of one batch. Results commit in selection order.
    std::size_t jobs = 1;
    /// Check P == pareto_front(H) after every commit (throws std::logic_error otherwise).
    bool verify_archive = false;
    /// Stop after this many records are committed, leaving the checkpoint incomplete.
    std::optional<std::size_t> max_records;
    /// Records already evaluated by an interrupted run; reused instead of re-evaluated.
    std::vector<EvaluationRecord> replay;
};

struct RunResult {
    ParetoArchive archive;
    HistoryDB history;
    bool satisfied = false;
    /// Every heuristic ran without meeting the thresholds.
    bool exhausted = false;
    bool interrupted = false;
    std::size_t short_acquisitions = 0;
    std::vector<std::string> log;
};

/// The self-optimization loop. `d` is required iff rc.evaluator_kind == Trainer.
RunResult run(const RunConfig& rc, const Dataset* d, const RunOptions& opts = {});

struct Cursor {
    std::size_t records = 0;
    bool completed = false;
};

struct ResumeState {
    RunConfig config;
    HistoryDB history;
    ParetoArchive archive;
    Cursor cursor;
    /// A partial or corrupt final line was dropped.
    bool truncated_tail = false;
};

/// Loads a checkpoint. Throws NotFound when missing, ParseError when the header
/// or a non-final line is corrupt.
ResumeState resume(const std::filesystem::path& checkpoint);

/// Continues a resumed run to completion, appending to the same checkpoint.
RunResult continue_run(const ResumeState& state, const std::filesystem::path& checkpoint, const Dataset* d,
                       RunOptions opts = {});

/// K records with the lowest error, ties by insertion order. K > |H| returns all.
std::vector<EvaluationRecord> best_k_by_accuracy(const HistoryDB& h, std::size_t k);

void to_json(nlohmann::json& j, const RunConfig& rc);
void from_json(const nlohmann::json& j, RunConfig& rc);

}  // namespace meeso
