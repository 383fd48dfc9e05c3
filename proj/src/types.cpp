#include "meeso/types.hpp"

#include <cmath>
#include <numeric>

#include "meeso/errors.hpp"

namespace meeso {

std::string_view to_string(BlockFamily v) {
    switch (v) {
        case BlockFamily::Plain: return "Plain";
        case BlockFamily::Residual: return "Residual";
        case BlockFamily::Bottleneck: return "Bottleneck";
    }
    return "?";
}

std::string_view to_string(Preprocessing v) {
    switch (v) {
        case Preprocessing::None: return "None";
        case Preprocessing::Standardize: return "Standardize";
        case Preprocessing::NoiseAugment: return "NoiseAugment";
    }
    return "?";
}

std::string_view to_string(Optimizer v) {
    switch (v) {
        case Optimizer::PlainGradientDescent: return "PlainGradientDescent";
        case Optimizer::AdaptiveMoments: return "AdaptiveMoments";
    }
    return "?";
}

std::string_view to_string(GrowthPolicy v) {
    switch (v) {
        case GrowthPolicy::BalancedScale: return "BalancedScale";
        case GrowthPolicy::DepthFirst: return "DepthFirst";
        case GrowthPolicy::WidthFirst: return "WidthFirst";
    }
    return "?";
}

int ArchitectureSpec::total_blocks() const noexcept {
    return std::accumulate(blocks_per_layer.begin(), blocks_per_layer.end(), 0);
}

bool is_power_of_two(int v) noexcept { return v > 0 && (v & (v - 1)) == 0; }

ValidationResult validate_candidate(const Candidate& c) {
    ValidationResult r;
    auto& out = r.violations;
    const auto& a = c.arch;

    if (a.blocks_per_layer.size() != a.widths_per_layer.size()) out.emplace_back("length mismatch");
    if (a.blocks_per_layer.empty()) out.emplace_back("no layers");
    if (a.blocks_per_layer.size() > static_cast<std::size_t>(kMaxLayers) ||
        a.widths_per_layer.size() > static_cast<std::size_t>(kMaxLayers))
        out.emplace_back("too many layers");
    for (int b : a.blocks_per_layer) {
        if (b < 1) {
            out.emplace_back("non-positive block count");
            break;
        }
    }
    for (int w : a.widths_per_layer) {
        if (w < kMinWidth || w > kMaxWidth) {
            out.emplace_back("width out of range");
            break;
        }
    }
    for (int w : a.widths_per_layer) {
        if (!is_power_of_two(w)) {
            out.emplace_back("width not a power of two");
            break;
        }
    }
    if (!(a.dropout_rate >= 0.0 && a.dropout_rate <= kMaxDropout)) out.emplace_back("dropout out of range");

    const auto& cfg = c.config;
    if (cfg.epochs < 1) out.emplace_back("epochs must be positive");
    if (cfg.batch_size < 1) out.emplace_back("batch_size must be positive");
    if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
        out.emplace_back("learning_rate must be positive");
    return r;
}

ValidationResult validate_objectives(const ObjectiveVector& o) {
    ValidationResult r;
    if (!std::isfinite(o.error) || o.error < 0.0 || o.error > 1.0) r.violations.emplace_back("error out of range");
    if (!std::isfinite(o.uncertainty) || o.uncertainty < 0.0)
        r.violations.emplace_back("uncertainty out of range");
    return r;
}

ValidationResult validate_heuristic(const Heuristic& h) {
    ValidationResult r;
    auto& out = r.violations;
    if (h.depth_range.min < 1 || h.depth_range.min > h.depth_range.max) out.emplace_back("invalid depth range");
    if (h.depth_range.max > kMaxLayers) out.emplace_back("depth range exceeds layer cap");
    if (h.width_range.min < kMinWidth || h.width_range.max > kMaxWidth || h.width_range.min > h.width_range.max)
        out.emplace_back("invalid width range");
    if (!(h.dropout_range.min >= 0.0 && h.dropout_range.min <= h.dropout_range.max &&
          h.dropout_range.max <= kMaxDropout))
        out.emplace_back("invalid dropout range");
    if (!h.dropout_range.contains(h.dropout_rate)) out.emplace_back("dropout outside dropout range");
    if (h.training.epochs < 1 || h.training.batch_size < 1 || !(h.training.sgd_learning_rate > 0.0) ||
        !(h.training.adam_learning_rate > 0.0))
        out.emplace_back("invalid training defaults");
    return r;
}

Heuristic builtin_heuristic(std::string_view name) {
    Heuristic h;
    h.id = std::string(name);
    if (name == "plain") {
        h.block_family = BlockFamily::Plain;
    } else if (name == "residual") {
        h.block_family = BlockFamily::Residual;
    } else if (name == "bottleneck") {
        h.block_family = BlockFamily::Bottleneck;
        h.width_range = {16, 128};
    } else {
        throw NotFound("unknown heuristic '" + std::string(name) + "'");
    }
    return h;
}

std::vector<std::string> builtin_heuristic_names() { return {"plain", "residual", "bottleneck"}; }

}  // namespace meeso
