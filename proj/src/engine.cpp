#include "meeso/engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <memory>
#include <set>
#include <thread>

#include <spdlog/sinks/null_sink.h>
#include <spdlog/spdlog.h>

#include "meeso/acquisition.hpp"
#include "meeso/errors.hpp"
#include "meeso/rng.hpp"
#include "meeso/search_space.hpp"
#include "meeso/serialize.hpp"
#include "meeso/surrogate.hpp"

namespace meeso {

using nlohmann::json;

// --- RunConfig ---------------------------------------------------------------

std::vector<std::string> validate_run_config(const RunConfig& rc) {
    std::vector<std::string> out;
    if (rc.heuristics.empty()) out.emplace_back("no heuristics");
    for (const auto& h : rc.heuristics)
        for (const auto& v : validate_heuristic(h).violations) out.push_back("heuristic '" + h.id + "': " + v);
    if (rc.arches_per_iter < 1) out.emplace_back("arches_per_iter must be >= 1");
    if (rc.inner_iterations < 1) out.emplace_back("inner_iterations must be >= 1");
    if (rc.initial_space_size < 1) out.emplace_back("initial_space_size must be >= 1");
    if (rc.n_groups < 1) out.emplace_back("n_groups must be >= 1");
    if (rc.selection == SelectionPolicy::Surrogate && rc.n_groups >= 1 &&
        rc.initial_space_size < minimum_training_size(rc.n_groups))
        out.emplace_back("initial_space_size must be >= " + std::to_string(minimum_training_size(rc.n_groups)) +
                         " to train the surrogate");
    if (rc.satisfied_thresholds) {
        const auto& t = *rc.satisfied_thresholds;
        if (!(t.max_error >= 0.0 && t.max_error <= 1.0) || !(t.max_uncertainty >= 0.0 && t.max_uncertainty <= 1.0))
            out.emplace_back("thresholds must lie in [0,1]");
    }
    if (rc.eval.mc_passes < 2) out.emplace_back("mc_passes must be >= 2");
    if (rc.eval.n_probes < 1) out.emplace_back("n_probes must be >= 1");
    return out;
}

namespace {

std::string kind_name(EvaluatorKind k) { return k == EvaluatorKind::Trainer ? "trainer" : "oracle"; }
std::string selection_name(SelectionPolicy s) { return s == SelectionPolicy::Surrogate ? "surrogate" : "random"; }

std::string source_name(DatasetSource::Kind k) {
    switch (k) {
        case DatasetSource::Kind::Synthetic: return "synthetic";
        case DatasetSource::Kind::Csv: return "csv";
        default: return "none";
    }
}

}  // namespace

void to_json(json& j, const RunConfig& rc) {
    j = json{{"heuristics", rc.heuristics},
             {"arches_per_iter", rc.arches_per_iter},
             {"inner_iterations", rc.inner_iterations},
             {"initial_space_size", rc.initial_space_size},
             {"n_groups", rc.n_groups},
             {"satisfied_thresholds", nullptr},
             {"run_seed", rc.run_seed},
             {"evaluator_kind", kind_name(rc.evaluator_kind)},
             {"selection", selection_name(rc.selection)},
             {"with_time", rc.with_time},
             {"dedupe", rc.dedupe},
             {"neighbors_per_member", rc.neighbors_per_member},
             {"oracle_noise_sigma", rc.oracle_noise_sigma},
             {"eval",
              {{"mc_passes", rc.eval.mc_passes},
               {"n_probes", rc.eval.n_probes},
               {"penalty_error", rc.eval.penalty_error},
               {"penalty_uncertainty", rc.eval.penalty_uncertainty},
               {"record_time", rc.eval.record_time}}},
             {"dataset",
              {{"kind", source_name(rc.dataset.kind)},
               {"path", rc.dataset.path},
               {"has_header", rc.dataset.has_header},
               {"seed", rc.dataset.seed}}}};
    if (rc.satisfied_thresholds)
        j["satisfied_thresholds"] = json::array({rc.satisfied_thresholds->max_error, rc.satisfied_thresholds->max_uncertainty});
}

void from_json(const json& j, RunConfig& rc) {
    const RunConfig d;
    rc = RunConfig{};
    if (j.contains("heuristics")) {
        rc.heuristics.clear();
        for (const auto& h : j.at("heuristics")) {
            if (h.is_string())
                rc.heuristics.push_back(builtin_heuristic(h.get<std::string>()));
            else
                rc.heuristics.push_back(h.get<Heuristic>());
        }
    }
    rc.arches_per_iter = j.value("arches_per_iter", d.arches_per_iter);
    rc.inner_iterations = j.value("inner_iterations", d.inner_iterations);
    rc.initial_space_size = j.value("initial_space_size", d.initial_space_size);
    rc.n_groups = j.value("n_groups", d.n_groups);
    if (auto it = j.find("satisfied_thresholds"); it != j.end() && !it->is_null())
        rc.satisfied_thresholds = Thresholds{it->at(0).get<double>(), it->at(1).get<double>()};
    rc.run_seed = j.value("run_seed", d.run_seed);
    const auto kind = j.value("evaluator_kind", kind_name(d.evaluator_kind));
    if (kind != "trainer" && kind != "oracle") throw ContractViolation("unknown evaluator_kind '" + kind + "'");
    rc.evaluator_kind = kind == "trainer" ? EvaluatorKind::Trainer : EvaluatorKind::Oracle;
    const auto sel = j.value("selection", selection_name(d.selection));
    if (sel != "surrogate" && sel != "random") throw ContractViolation("unknown selection '" + sel + "'");
    rc.selection = sel == "surrogate" ? SelectionPolicy::Surrogate : SelectionPolicy::Random;
    rc.with_time = j.value("with_time", d.with_time);
    rc.dedupe = j.value("dedupe", d.dedupe);
    rc.neighbors_per_member = j.value("neighbors_per_member", d.neighbors_per_member);
    rc.oracle_noise_sigma = j.value("oracle_noise_sigma", d.oracle_noise_sigma);
    if (auto it = j.find("eval"); it != j.end()) {
        rc.eval.mc_passes = it->value("mc_passes", d.eval.mc_passes);
        rc.eval.n_probes = it->value("n_probes", d.eval.n_probes);
        rc.eval.penalty_error = it->value("penalty_error", d.eval.penalty_error);
        rc.eval.penalty_uncertainty = it->value("penalty_uncertainty", d.eval.penalty_uncertainty);
        rc.eval.record_time = it->value("record_time", d.eval.record_time);
    }
    if (auto it = j.find("dataset"); it != j.end()) {
        const auto k = it->value("kind", std::string("none"));
        rc.dataset.kind = k == "synthetic" ? DatasetSource::Kind::Synthetic
                          : k == "csv"     ? DatasetSource::Kind::Csv
                                           : DatasetSource::Kind::None;
        rc.dataset.path = it->value("path", std::string());
        rc.dataset.has_header = it->value("has_header", false);
        rc.dataset.seed = it->value("seed", std::int64_t{0});
    }
}

// --- HistoryDB -----------------------------------------------------------------

void HistoryDB::append(const EvaluationRecord& r) {
    records_.push_back(r);
    if (path_) {
        std::ofstream out(*path_, std::ios::app | std::ios::binary);
        out << json(r).dump() << '\n';
    }
}

void HistoryDB::write_jsonl(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw NotFound("cannot write " + path.string());
    for (const auto& r : records_) out << json(r).dump() << '\n';
}

HistoryDB HistoryDB::load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("history not found: " + path.string());
    HistoryDB h;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            h.records_.push_back(json::parse(line).get<EvaluationRecord>());
        } catch (const json::exception& e) {
            throw ParseError("history line " + std::to_string(line_no) + ": " + e.what(), line_no);
        }
    }
    return h;
}

// --- Checkpoint ------------------------------------------------------------------

namespace {

constexpr const char* kCheckpointFormat = "meeso-checkpoint";

json checkpoint_header(const RunConfig& rc, const Cursor& cursor) {
    return json{{"format", kCheckpointFormat},
                {"version", 1},
                {"config", rc},
                {"cursor", {{"records", cursor.records}, {"completed", cursor.completed}}}};
}

void write_checkpoint(const std::filesystem::path& path, const RunConfig& rc, const Cursor& cursor,
                      std::span<const EvaluationRecord> records) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw NotFound("cannot write checkpoint " + tmp.string());
        out << checkpoint_header(rc, cursor).dump() << '\n';
        for (const auto& r : records) out << json(r).dump() << '\n';
    }
    std::filesystem::rename(tmp, path);
}

// Appends committed records; rewritten whole at completion.
class CheckpointWriter {
public:
    CheckpointWriter(std::optional<std::filesystem::path> path, const RunConfig& rc,
                     std::span<const EvaluationRecord> existing, bool fresh)
        : path_(std::move(path)) {
        if (!path_) return;
        if (fresh) write_checkpoint(*path_, rc, {0, false}, existing);
        out_.open(*path_, std::ios::app | std::ios::binary);
        if (!out_) throw NotFound("cannot open checkpoint " + path_->string());
    }

    void append(const EvaluationRecord& r) {
        if (!path_) return;
        out_ << json(r).dump() << '\n';
        out_.flush();
    }

    void finish(const RunConfig& rc, std::span<const EvaluationRecord> records) {
        if (!path_) return;
        out_.close();
        write_checkpoint(*path_, rc, {records.size(), true}, records);
    }

private:
    std::optional<std::filesystem::path> path_;
    std::ofstream out_;
};

// --- Evaluation batches --------------------------------------------------------------

struct Job {
    Candidate candidate;
    EvalContext context;
};

std::vector<EvaluationRecord> evaluate_jobs(const RunConfig& rc, const Dataset* d, std::vector<Job> jobs,
                                            std::size_t first_index, std::span<const EvaluationRecord> replay,
                                            std::size_t workers) {
    std::vector<EvaluationRecord> out(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());

    auto evaluate_one = [&](std::size_t i) {
        try {
            const std::size_t h_index = first_index + i;
            if (h_index < replay.size()) {
                if (!(replay[h_index].candidate == jobs[i].candidate))
                    throw ParseError("checkpoint record " + std::to_string(h_index + 1) +
                                         " does not match the candidate this configuration selects",
                                     h_index + 2);
                out[i] = replay[h_index];
                return;
            }
            if (rc.evaluator_kind == EvaluatorKind::Oracle)
                out[i] = oracle_record(jobs[i].candidate, jobs[i].context, rc.oracle_noise_sigma);
            else
                out[i] = evaluate(jobs[i].candidate, *d, rc.eval, jobs[i].context);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    const std::size_t n_threads = std::min(std::max<std::size_t>(workers, 1), jobs.size());
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) evaluate_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < jobs.size(); i = next++) evaluate_one(i);
            });
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

bool same_record_sets(const std::vector<EvaluationRecord>& a, const std::vector<EvaluationRecord>& b) {
    std::multiset<std::string> sa, sb;
    for (const auto& r : a) sa.insert(json(r).dump());
    for (const auto& r : b) sb.insert(json(r).dump());
    return sa == sb;
}

// Progress goes to the logger set up by configure_logging; library callers that
// never configured one stay quiet.
std::shared_ptr<spdlog::logger> run_logger() {
    if (auto l = spdlog::get("meeso")) return l;
    static const auto quiet = std::make_shared<spdlog::logger>("meeso-quiet", std::make_shared<spdlog::sinks::null_sink_mt>());
    return quiet;
}

class Engine {
public:
    Engine(const RunConfig& rc, const Dataset* d, const RunOptions& opts, bool fresh_checkpoint)
        : rc_(rc), d_(d), opts_(opts), result_{ParetoArchive(rc.objective_set(), rc.dedupe), HistoryDB{}, false, false, false, 0, {}},
          checkpoint_(opts.checkpoint_path, rc, {}, fresh_checkpoint) {}

    RunResult run() {
        for (std::size_t hi = 0; hi < rc_.heuristics.size() && !stopped(); ++hi) {
            run_heuristic(hi);
            if (stopped()) break;
            if (satisfied()) {
                result_.satisfied = true;
                info("thresholds satisfied after heuristic '" + rc_.heuristics[hi].id + "'");
                break;
            }
            if (hi + 1 < rc_.heuristics.size()) info("switching to heuristic '" + rc_.heuristics[hi + 1].id + "'");
        }
        if (!stopped()) {
            result_.exhausted = !result_.satisfied;
            checkpoint_.finish(rc_, result_.history.records());
        }
        return std::move(result_);
    }

private:
    bool stopped() const { return result_.interrupted; }

    void info(std::string msg) {
        run_logger()->info("{}", msg);
        result_.log.push_back(std::move(msg));
    }

    bool satisfied() const {
        if (!rc_.satisfied_thresholds) return false;
        const auto& t = *rc_.satisfied_thresholds;
        for (const auto& m : result_.archive.members())
            if (m.record.objectives.error <= t.max_error && m.record.objectives.uncertainty <= t.max_uncertainty)
                return true;
        return false;
    }

    void run_heuristic(std::size_t hi) {
        const Heuristic& h = rc_.heuristics[hi];
        const std::int64_t space_seed = derive_seed(rc_.run_seed, {100, hi});
        std::size_t count = rc_.initial_space_size;
        if (const std::size_t admissible = admissible_count(h); count > admissible) {
            info("heuristic '" + h.id + "' admits only " + std::to_string(admissible) + " candidates");
            count = admissible;
        }
        SearchSpace space = generate(h, admissible_count(h), space_seed);

        std::vector<Candidate> initial;
        for (std::size_t i = 0; i < count; ++i)
            if (!evaluated_.contains(candidate_key(space.candidates[i]))) initial.push_back(space.candidates[i]);
        evaluate_and_commit(initial, 0, h.id);

        bool regenerated = false;
        for (std::size_t it = 1; it <= rc_.inner_iterations && !stopped(); ++it) {
            std::vector<Candidate> chosen;
            try {
                chosen = choose(h, hi, it, space);
            } catch (const EmptySpace&) {
                if (regenerated) {
                    info("heuristic '" + h.id + "': acquisition pool exhausted");
                    break;
                }
                regenerated = true;
                space = generate(h, admissible_count(h), space_seed + 1);
                info("heuristic '" + h.id + "': pool empty, regenerated space");
                try {
                    chosen = choose(h, hi, it, space);
                } catch (const EmptySpace&) {
                    info("heuristic '" + h.id + "': acquisition pool exhausted");
                    break;
                }
            }
            if (chosen.size() < rc_.arches_per_iter) {
                ++result_.short_acquisitions;
                info("heuristic '" + h.id + "' iteration " + std::to_string(it) + ": only " +
                     std::to_string(chosen.size()) + " candidates available");
            }
            evaluate_and_commit(chosen, static_cast<int>(it), h.id);
        }
    }

    std::vector<Candidate> pool_for(const Heuristic& h, std::size_t hi, std::size_t it, const SearchSpace& space) const {
        std::vector<Candidate> pool = space.candidates;
        for (const auto& m : result_.archive.members()) {
            if (!within_heuristic(m.record.candidate, h)) continue;
            const auto seed = derive_seed(rc_.run_seed, {200, hi, it, m.insertion_index});
            auto neighbors = mutate_neighbors(m.record.candidate, h, rc_.neighbors_per_member, seed);
            pool.insert(pool.end(), neighbors.candidates.begin(), neighbors.candidates.end());
        }
        return pool;
    }

    std::vector<Candidate> choose(const Heuristic& h, std::size_t hi, std::size_t it, const SearchSpace& space) {
        const auto pool = pool_for(h, hi, it, space);
        const auto& records = result_.history.records();
        const bool trainable = records.size() >= minimum_training_size(rc_.n_groups);
        if (rc_.selection == SelectionPolicy::Random || !trainable) {
            if (!trainable) info("heuristic '" + h.id + "': too little history for the surrogate, picking at random");
            std::vector<Candidate> open;
            std::set<std::string> seen;
            for (const auto& c : pool) {
                auto key = candidate_key(c);
                if (!evaluated_.contains(key) && seen.insert(std::move(key)).second) open.push_back(c);
            }
            if (open.empty()) throw EmptySpace("random selection: pool exhausted");
            auto rng = make_rng(derive_seed(rc_.run_seed, {300, hi, it}));
            std::shuffle(open.begin(), open.end(), rng);
            if (open.size() > rc_.arches_per_iter) open.resize(rc_.arches_per_iter);
            return open;
        }
        const RankModel models[] = {RankModel::train(records, rc_.n_groups, ObjectiveId::Error),
                                    RankModel::train(records, rc_.n_groups, ObjectiveId::Uncertainty)};
        return select(models, pool, evaluated_, rc_.arches_per_iter);
    }

    void evaluate_and_commit(const std::vector<Candidate>& batch, int iteration, const std::string& heuristic_id) {
        if (batch.empty()) return;
        const std::size_t first = result_.history.size();
        std::vector<Job> jobs;
        jobs.reserve(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i)
            jobs.push_back({batch[i], {derive_seed(rc_.run_seed, {first + i}), iteration, heuristic_id}});
        auto records = evaluate_jobs(rc_, d_, std::move(jobs), first, opts_.replay, opts_.jobs);

        for (auto& r : records) {
            if (opts_.max_records && result_.history.size() >= *opts_.max_records) {
                result_.interrupted = true;
                return;
            }
            evaluated_.insert(candidate_key(r.candidate));
            result_.archive.insert(r);
            if (result_.history.size() >= opts_.replay.size()) checkpoint_.append(r);
            result_.history.append(r);
            if (opts_.verify_archive &&
                !same_record_sets(result_.archive.records(),
                                  pareto_front(result_.history.records(), rc_.objective_set())))
                throw std::logic_error("archive diverged from pareto_front(H)");
        }
        if (opts_.max_records && result_.history.size() >= *opts_.max_records &&
            result_.history.size() > opts_.replay.size())
            result_.interrupted = true;
    }

    const RunConfig& rc_;
    const Dataset* d_;
    const RunOptions& opts_;
    RunResult result_;
    EvaluatedSet evaluated_;
    CheckpointWriter checkpoint_;
};

void require_runnable(const RunConfig& rc, const Dataset* d) {
    if (auto problems = validate_run_config(rc); !problems.empty()) {
        std::string msg = "invalid run config:";
        for (const auto& p : problems) msg += " " + p + ";";
        throw ContractViolation(msg);
    }
    if (rc.evaluator_kind == EvaluatorKind::Trainer && d == nullptr)
        throw ContractViolation("trainer evaluator requires a dataset");
}

}  // namespace

RunResult run(const RunConfig& rc, const Dataset* d, const RunOptions& opts) {
    require_runnable(rc, d);
    Engine engine(rc, d, opts, /*fresh_checkpoint=*/true);
    return engine.run();
}

ResumeState resume(const std::filesystem::path& checkpoint) {
    std::ifstream in(checkpoint, std::ios::binary);
    if (!in) throw NotFound("checkpoint not found: " + checkpoint.string());

    std::vector<std::string> lines;
    std::string line;
    bool last_terminated = true;
    while (std::getline(in, line)) {
        lines.push_back(line);
        last_terminated = !in.eof();
    }
    if (lines.empty()) throw ParseError("checkpoint " + checkpoint.string() + " is empty", 1);

    ResumeState state;
    try {
        const json header = json::parse(lines.front());
        if (header.value("format", std::string()) != kCheckpointFormat) throw ParseError("not a checkpoint file", 1);
        header.at("config").get_to(state.config);
        state.cursor.completed = header.at("cursor").value("completed", false);
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint header: ") + e.what(), 1);
    }

    HistoryDB history;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const bool final_line = i + 1 == lines.size();
        if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            if (final_line && !last_terminated) throw ParseError("unterminated final line", i + 1);
            history.append(json::parse(lines[i]).get<EvaluationRecord>());
        } catch (const std::exception& e) {
            if (!final_line) throw ParseError("checkpoint line " + std::to_string(i + 1) + ": " + e.what(), i + 1);
            spdlog::warn("checkpoint {}: dropping partial final line {} ({})", checkpoint.string(), i + 1, e.what());
            state.truncated_tail = true;
            state.cursor.completed = false;
        }
    }
    state.cursor.records = history.size();
    state.archive = ParetoArchive(state.config.objective_set(), state.config.dedupe);
    for (const auto& r : history.records()) state.archive.insert(r);
    state.history = std::move(history);
    return state;
}

RunResult continue_run(const ResumeState& state, const std::filesystem::path& checkpoint, const Dataset* d,
                       RunOptions opts) {
    if (state.cursor.completed) {
        RunResult done{state.archive, state.history, false, false, false, 0, {}};
        done.exhausted = true;
        if (state.config.satisfied_thresholds) {
            const auto& t = *state.config.satisfied_thresholds;
            for (const auto& m : state.archive.members())
                if (m.record.objectives.error <= t.max_error && m.record.objectives.uncertainty <= t.max_uncertainty)
                    done.satisfied = true;
            done.exhausted = !done.satisfied;
        }
        return done;
    }
    require_runnable(state.config, d);
    // Drop any partial tail; later appends follow the last complete record.
    write_checkpoint(checkpoint, state.config, {state.history.size(), false}, state.history.records());
    opts.checkpoint_path = checkpoint;
    opts.replay = state.history.records();
    Engine engine(state.config, d, opts, /*fresh_checkpoint=*/false);
    return engine.run();
}

std::vector<EvaluationRecord> best_k_by_accuracy(const HistoryDB& h, std::size_t k) {
    if (k < 1) throw ContractViolation("best_k_by_accuracy: K must be positive");
    std::vector<EvaluationRecord> sorted = h.records();
    std::stable_sort(sorted.begin(), sorted.end(), [](const EvaluationRecord& a, const EvaluationRecord& b) {
        return a.objectives.error < b.objectives.error;
    });
    if (sorted.size() > k) sorted.resize(k);
    return sorted;
}

}  // namespace meeso
