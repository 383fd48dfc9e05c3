#include "meeso/report.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "meeso/errors.hpp"
#include "meeso/pareto.hpp"
#include "meeso/serialize.hpp"

namespace meeso {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return "nan";
    return {buf, ptr};
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string pareto_csv(std::span<const EvaluationRecord> front) {
    std::ostringstream out;
    out << kParetoCsvHeader << '\n';
    for (const auto& r : front) {
        out << format_double(r.objectives.error) << ',' << format_double(r.objectives.uncertainty) << ','
            << format_double(r.wall_seconds) << ',' << csv_field(r.heuristic_id) << ',' << r.iteration << ','
            << csv_field(candidate_key(r.candidate)) << '\n';
    }
    return out.str();
}

void write_pareto_csv(const std::filesystem::path& path, std::span<const EvaluationRecord> front) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw NotFound("cannot write " + path.string());
    out << pareto_csv(front);
}

nlohmann::json run_summary(const RunConfig& rc, const RunResult& result) {
    const auto& records = result.history.records();
    double total_wall = 0.0;
    double best_error = 1.0;
    for (const auto& r : records) {
        total_wall += r.wall_seconds;
        best_error = std::min(best_error, r.objectives.error);
    }
    std::vector<ObjectiveVector> bounded;
    for (const auto& v : result.archive.objective_vectors())
        if (v.error <= 1.0 && v.uncertainty <= 1.0) bounded.push_back(v);

    std::vector<std::string> heuristics;
    for (const auto& h : rc.heuristics) heuristics.push_back(h.id);

    return nlohmann::json{{"records", records.size()},
                          {"pareto_size", result.archive.size()},
                          {"best_error", records.empty() ? nlohmann::json(nullptr) : nlohmann::json(best_error)},
                          {"hypervolume", hypervolume_2d(bounded, {1.0, 1.0})},
                          {"hypervolume_reference", {1.0, 1.0}},
                          {"total_wall_seconds", total_wall},
                          {"heuristics", heuristics},
                          {"satisfied", result.satisfied},
                          {"exhausted", result.exhausted},
                          {"short_acquisitions", result.short_acquisitions}};
}

void configure_logging() {
    auto logger = spdlog::get("meeso");
    if (!logger) logger = spdlog::stderr_color_mt("meeso");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");

    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("MEESO_LOG")) {
        const std::string v = env;
        if (v == "error") level = spdlog::level::err;
        else if (v == "info") level = spdlog::level::info;
        else if (v == "debug") level = spdlog::level::debug;
    }
    spdlog::set_level(level);
}

}  // namespace meeso
