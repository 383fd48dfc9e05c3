#pragma once

#include <nlohmann/json.hpp>

#include "meeso/types.hpp"

// JSON schemas for the domain types. Field names match the struct members.
namespace meeso {

using json = nlohmann::json;

void to_json(json& j, BlockFamily v);
void from_json(const json& j, BlockFamily& v);
void to_json(json& j, Preprocessing v);
void from_json(const json& j, Preprocessing& v);
void to_json(json& j, Optimizer v);
void from_json(const json& j, Optimizer& v);
void to_json(json& j, GrowthPolicy v);
void from_json(const json& j, GrowthPolicy& v);

void to_json(json& j, const ArchitectureSpec& v);
void from_json(const json& j, ArchitectureSpec& v);
void to_json(json& j, const PipelineConfig& v);
void from_json(const json& j, PipelineConfig& v);
void to_json(json& j, const Candidate& v);
void from_json(const json& j, Candidate& v);
void to_json(json& j, const ObjectiveVector& v);
void from_json(const json& j, ObjectiveVector& v);
void to_json(json& j, const EvaluationRecord& v);
void from_json(const json& j, EvaluationRecord& v);
void to_json(json& j, const IntRange& v);
void from_json(const json& j, IntRange& v);
void to_json(json& j, const RealRange& v);
void from_json(const json& j, RealRange& v);
void to_json(json& j, const TrainingDefaults& v);
void from_json(const json& j, TrainingDefaults& v);
void to_json(json& j, const Heuristic& v);
void from_json(const json& j, Heuristic& v);

/// Compact single-line form; also the canonical identity key of a candidate.
std::string candidate_key(const Candidate& c);

}  // namespace meeso
