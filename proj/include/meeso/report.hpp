#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "meeso/engine.hpp"
#include "meeso/types.hpp"

namespace meeso {

inline constexpr const char* kParetoCsvHeader = "error,uncertainty,wall_seconds,heuristic_id,iteration,candidate_json";

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// RFC 4180 quoting when the field contains a comma, quote or newline.
std::string csv_field(const std::string& s);

std::string pareto_csv(std::span<const EvaluationRecord> front);
void write_pareto_csv(const std::filesystem::path& path, std::span<const EvaluationRecord> front);

/// Counts, best error, front hypervolume against (1,1), and summed wall time.
nlohmann::json run_summary(const RunConfig& rc, const RunResult& result);

/// Sets the log level from MEESO_LOG (error, info, debug; default warn). Logs go to stderr.
void configure_logging();

}  // namespace meeso
