#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace meeso {

enum class BlockFamily { Plain, Residual, Bottleneck };
enum class Preprocessing { None, Standardize, NoiseAugment };
enum class Optimizer { PlainGradientDescent, AdaptiveMoments };
enum class GrowthPolicy { BalancedScale, DepthFirst, WidthFirst };

inline constexpr int kPreprocessingCount = 3;
inline constexpr int kOptimizerCount = 2;

// Generator limits. Not enforced by the types themselves beyond validate_candidate.
inline constexpr int kMaxLayers = 8;
inline constexpr int kMinWidth = 4;
inline constexpr int kMaxWidth = 512;
inline constexpr double kMaxDropout = 0.9;

std::string_view to_string(BlockFamily v);
std::string_view to_string(Preprocessing v);
std::string_view to_string(Optimizer v);
std::string_view to_string(GrowthPolicy v);

struct ArchitectureSpec {
    BlockFamily block_family = BlockFamily::Plain;
    std::vector<int> blocks_per_layer;
    std::vector<int> widths_per_layer;
    double dropout_rate = 0.0;

    std::size_t layer_count() const noexcept { return blocks_per_layer.size(); }
    int total_blocks() const noexcept;

    bool operator==(const ArchitectureSpec&) const = default;
};

struct PipelineConfig {
    Preprocessing preprocessing = Preprocessing::None;
    Optimizer optimizer = Optimizer::AdaptiveMoments;
    int epochs = 1;
    double learning_rate = 1e-3;
    int batch_size = 32;

    /// Position within the preprocessing x optimizer product.
    int ordinal() const noexcept {
        return static_cast<int>(preprocessing) * kOptimizerCount + static_cast<int>(optimizer);
    }

    bool operator==(const PipelineConfig&) const = default;
};

struct Candidate {
    ArchitectureSpec arch;
    PipelineConfig config;

    bool operator==(const Candidate&) const = default;
};

/// Both components are minimized. error = 1 - accuracy.
struct ObjectiveVector {
    double error = 0.0;
    double uncertainty = 0.0;

    bool operator==(const ObjectiveVector&) const = default;
};

struct EvaluationRecord {
    Candidate candidate;
    ObjectiveVector objectives;
    double wall_seconds = 0.0;
    std::int64_t seed = 0;
    int iteration = 0;
    std::string heuristic_id;
    /// Evaluator notes (e.g. uninformative uncertainty). Omitted from JSON when empty.
    std::vector<std::string> warnings;

    bool operator==(const EvaluationRecord&) const = default;
};

struct IntRange {
    int min = 0;
    int max = 0;

    bool contains(int v) const noexcept { return v >= min && v <= max; }
    bool operator==(const IntRange&) const = default;
};

struct RealRange {
    double min = 0.0;
    double max = 0.0;

    bool contains(double v) const noexcept { return v >= min && v <= max; }
    bool operator==(const RealRange&) const = default;
};

/// Training settings the generator stamps onto every candidate of a heuristic.
struct TrainingDefaults {
    int epochs = 30;
    int batch_size = 32;
    double sgd_learning_rate = 0.05;
    double adam_learning_rate = 0.005;

    double learning_rate_for(Optimizer o) const noexcept {
        return o == Optimizer::PlainGradientDescent ? sgd_learning_rate : adam_learning_rate;
    }

    bool operator==(const TrainingDefaults&) const = default;
};

/// A recipe for growing an initial architecture space from one unit block family.
///
/// Depth is measured in total unit blocks (sum of blocks_per_layer); width is a
/// per-layer unit count and must be a power of two.
struct Heuristic {
    std::string id;
    BlockFamily block_family = BlockFamily::Plain;
    IntRange depth_range{2, 6};
    IntRange width_range{8, 64};
    GrowthPolicy growth_policy = GrowthPolicy::BalancedScale;
    /// Dropout stamped on generated architectures.
    double dropout_rate = 0.2;
    /// Range neighbors may move dropout within.
    RealRange dropout_range{0.1, 0.5};
    TrainingDefaults training;

    bool operator==(const Heuristic&) const = default;
};

/// Violated invariants, empty when the candidate is valid.
struct ValidationResult {
    std::vector<std::string> violations;

    bool ok() const noexcept { return violations.empty(); }
    explicit operator bool() const noexcept { return ok(); }
};

ValidationResult validate_candidate(const Candidate& c);
ValidationResult validate_objectives(const ObjectiveVector& o);
ValidationResult validate_heuristic(const Heuristic& h);

bool is_power_of_two(int v) noexcept;

/// Built-in heuristics, one per block family: "plain", "residual", "bottleneck".
Heuristic builtin_heuristic(std::string_view name);
std::vector<std::string> builtin_heuristic_names();

}  // namespace meeso
