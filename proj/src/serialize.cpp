#include "meeso/serialize.hpp"

#include <array>
#include <string>
#include <utility>

namespace meeso {
namespace {

template <typename E, std::size_t N>
void enum_from_json(const json& j, E& v, const std::array<E, N>& values, const char* type_name) {
    const auto& s = j.get_ref<const std::string&>();
    for (E candidate : values) {
        if (to_string(candidate) == s) {
            v = candidate;
            return;
        }
    }
    throw json::other_error::create(501, std::string("unknown ") + type_name + " '" + s + "'", &j);
}

}  // namespace

void to_json(json& j, BlockFamily v) { j = std::string(to_string(v)); }
void from_json(const json& j, BlockFamily& v) {
    enum_from_json(j, v, std::array{BlockFamily::Plain, BlockFamily::Residual, BlockFamily::Bottleneck},
                   "block_family");
}
void to_json(json& j, Preprocessing v) { j = std::string(to_string(v)); }
void from_json(const json& j, Preprocessing& v) {
    enum_from_json(j, v,
                   std::array{Preprocessing::None, Preprocessing::Standardize, Preprocessing::NoiseAugment},
                   "preprocessing");
}
void to_json(json& j, Optimizer v) { j = std::string(to_string(v)); }
void from_json(const json& j, Optimizer& v) {
    enum_from_json(j, v, std::array{Optimizer::PlainGradientDescent, Optimizer::AdaptiveMoments}, "optimizer");
}
void to_json(json& j, GrowthPolicy v) { j = std::string(to_string(v)); }
void from_json(const json& j, GrowthPolicy& v) {
    enum_from_json(j, v,
                   std::array{GrowthPolicy::BalancedScale, GrowthPolicy::DepthFirst, GrowthPolicy::WidthFirst},
                   "growth_policy");
}

void to_json(json& j, const ArchitectureSpec& v) {
    j = json{{"block_family", v.block_family},
             {"blocks_per_layer", v.blocks_per_layer},
             {"widths_per_layer", v.widths_per_layer},
             {"dropout_rate", v.dropout_rate}};
}
void from_json(const json& j, ArchitectureSpec& v) {
    j.at("block_family").get_to(v.block_family);
    j.at("blocks_per_layer").get_to(v.blocks_per_layer);
    j.at("widths_per_layer").get_to(v.widths_per_layer);
    j.at("dropout_rate").get_to(v.dropout_rate);
}

void to_json(json& j, const PipelineConfig& v) {
    j = json{{"preprocessing", v.preprocessing},
             {"optimizer", v.optimizer},
             {"epochs", v.epochs},
             {"learning_rate", v.learning_rate},
             {"batch_size", v.batch_size}};
}
void from_json(const json& j, PipelineConfig& v) {
    j.at("preprocessing").get_to(v.preprocessing);
    j.at("optimizer").get_to(v.optimizer);
    j.at("epochs").get_to(v.epochs);
    j.at("learning_rate").get_to(v.learning_rate);
    j.at("batch_size").get_to(v.batch_size);
}

void to_json(json& j, const Candidate& v) { j = json{{"arch", v.arch}, {"config", v.config}}; }
void from_json(const json& j, Candidate& v) {
    j.at("arch").get_to(v.arch);
    j.at("config").get_to(v.config);
}

void to_json(json& j, const ObjectiveVector& v) { j = json{{"error", v.error}, {"uncertainty", v.uncertainty}}; }
void from_json(const json& j, ObjectiveVector& v) {
    j.at("error").get_to(v.error);
    j.at("uncertainty").get_to(v.uncertainty);
}

void to_json(json& j, const EvaluationRecord& v) {
    j = json{{"candidate", v.candidate},   {"objectives", v.objectives},     {"wall_seconds", v.wall_seconds},
             {"seed", v.seed},             {"iteration", v.iteration},       {"heuristic_id", v.heuristic_id}};
    if (!v.warnings.empty()) j["warnings"] = v.warnings;
}
void from_json(const json& j, EvaluationRecord& v) {
    j.at("candidate").get_to(v.candidate);
    j.at("objectives").get_to(v.objectives);
    j.at("wall_seconds").get_to(v.wall_seconds);
    j.at("seed").get_to(v.seed);
    j.at("iteration").get_to(v.iteration);
    j.at("heuristic_id").get_to(v.heuristic_id);
    v.warnings.clear();
    if (auto it = j.find("warnings"); it != j.end()) it->get_to(v.warnings);
}

void to_json(json& j, const IntRange& v) { j = json::array({v.min, v.max}); }
void from_json(const json& j, IntRange& v) {
    v.min = j.at(0).get<int>();
    v.max = j.at(1).get<int>();
}
void to_json(json& j, const RealRange& v) { j = json::array({v.min, v.max}); }
void from_json(const json& j, RealRange& v) {
    v.min = j.at(0).get<double>();
    v.max = j.at(1).get<double>();
}

void to_json(json& j, const TrainingDefaults& v) {
    j = json{{"epochs", v.epochs},
             {"batch_size", v.batch_size},
             {"sgd_learning_rate", v.sgd_learning_rate},
             {"adam_learning_rate", v.adam_learning_rate}};
}
void from_json(const json& j, TrainingDefaults& v) {
    TrainingDefaults d;
    v.epochs = j.value("epochs", d.epochs);
    v.batch_size = j.value("batch_size", d.batch_size);
    v.sgd_learning_rate = j.value("sgd_learning_rate", d.sgd_learning_rate);
    v.adam_learning_rate = j.value("adam_learning_rate", d.adam_learning_rate);
}

void to_json(json& j, const Heuristic& v) {
    j = json{{"id", v.id},
             {"block_family", v.block_family},
             {"depth_range", v.depth_range},
             {"width_range", v.width_range},
             {"growth_policy", v.growth_policy},
             {"dropout_rate", v.dropout_rate},
             {"dropout_range", v.dropout_range},
             {"training", v.training}};
}
void from_json(const json& j, Heuristic& v) {
    Heuristic d;
    j.at("id").get_to(v.id);
    j.at("block_family").get_to(v.block_family);
    j.at("depth_range").get_to(v.depth_range);
    j.at("width_range").get_to(v.width_range);
    v.growth_policy = j.contains("growth_policy") ? j.at("growth_policy").get<GrowthPolicy>() : d.growth_policy;
    v.dropout_rate = j.value("dropout_rate", d.dropout_rate);
    v.dropout_range = j.contains("dropout_range") ? j.at("dropout_range").get<RealRange>() : d.dropout_range;
    v.training = j.contains("training") ? j.at("training").get<TrainingDefaults>() : d.training;
}

std::string candidate_key(const Candidate& c) { return json(c).dump(); }

}  // namespace meeso
