#include "meeso/search_space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <string>

#include "meeso/errors.hpp"
#include "meeso/rng.hpp"
#include "meeso/serialize.hpp"

namespace meeso {
namespace {

std::vector<int> power_of_two_widths(const IntRange& r) {
    std::vector<int> out;
    for (int w = kMinWidth; w <= kMaxWidth; w *= 2)
        if (r.contains(w)) out.push_back(w);
    return out;
}

void require_valid(const Heuristic& h) {
    auto v = validate_heuristic(h);
    if (power_of_two_widths(h.width_range).empty()) v.violations.emplace_back("no power-of-two width in range");
    if (!v.ok()) {
        std::string msg = "invalid heuristic '" + h.id + "':";
        for (const auto& s : v.violations) msg += " " + s + ";";
        throw ContractViolation(msg);
    }
}

bool admitted(GrowthPolicy p, double depth_index, double width_index) {
    switch (p) {
        case GrowthPolicy::BalancedScale: return std::abs(depth_index - width_index) <= kBalanceTolerance;
        case GrowthPolicy::DepthFirst: return depth_index >= width_index;
        case GrowthPolicy::WidthFirst: return width_index >= depth_index;
    }
    return false;
}

// Steps of 0.1 are kept on the decimal grid so repeated mutation stays exact.
double snap_tenth(double v) {
    const double scaled = v * 10.0;
    const double rounded = std::round(scaled);
    return std::abs(scaled - rounded) < 1e-9 ? rounded / 10.0 : v;
}

}  // namespace

std::vector<ArchShape> admissible_shapes(const Heuristic& h) {
    require_valid(h);
    const auto widths = power_of_two_widths(h.width_range);
    const int depth_span = h.depth_range.max - h.depth_range.min;
    const int width_span = static_cast<int>(widths.size()) - 1;

    std::vector<ArchShape> out;
    for (int d = h.depth_range.min; d <= h.depth_range.max; ++d) {
        const double di = depth_span == 0 ? 0.0 : static_cast<double>(d - h.depth_range.min) / depth_span;
        for (int j = 0; j <= width_span; ++j) {
            const double wi = width_span == 0 ? 0.0 : static_cast<double>(j) / width_span;
            if (admitted(h.growth_policy, di, wi)) out.push_back({d, widths[j], di, wi});
        }
    }
    return out;
}

std::size_t admissible_count(const Heuristic& h) {
    return admissible_shapes(h).size() * static_cast<std::size_t>(kPreprocessingCount * kOptimizerCount);
}

ArchitectureSpec make_architecture(const Heuristic& h, int depth, int width) {
    ArchitectureSpec a;
    a.block_family = h.block_family;
    a.blocks_per_layer.assign(static_cast<std::size_t>(depth), 1);
    a.widths_per_layer.assign(static_cast<std::size_t>(depth), width);
    a.dropout_rate = h.dropout_rate;
    return a;
}

PipelineConfig make_config(const Heuristic& h, int ordinal) {
    PipelineConfig cfg;
    cfg.preprocessing = static_cast<Preprocessing>(ordinal / kOptimizerCount);
    cfg.optimizer = static_cast<Optimizer>(ordinal % kOptimizerCount);
    cfg.epochs = h.training.epochs;
    cfg.batch_size = h.training.batch_size;
    cfg.learning_rate = h.training.learning_rate_for(cfg.optimizer);
    return cfg;
}

SearchSpace generate(const Heuristic& h, std::size_t count, std::int64_t seed) {
    if (count < 1) throw ContractViolation("generate: count must be positive");
    auto shapes = admissible_shapes(h);
    constexpr std::size_t configs = kPreprocessingCount * kOptimizerCount;
    const std::size_t admissible = shapes.size() * configs;
    if (count > admissible) throw ExhaustedSpace(count, admissible);

    auto rng = make_rng(seed);
    std::shuffle(shapes.begin(), shapes.end(), rng);

    SearchSpace space;
    space.heuristic_id = h.id;
    space.generated_seed = seed;
    space.candidates.reserve(count);
    const std::size_t n_shapes = shapes.size();
    // (shape, round) -> config (round + shape) mod 6 is a bijection onto shapes x configs.
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t a = i % n_shapes;
        const std::size_t round = i / n_shapes;
        const int ordinal = static_cast<int>((round + a) % configs);
        space.candidates.push_back({make_architecture(h, shapes[a].depth, shapes[a].width), make_config(h, ordinal)});
    }
    return space;
}

FeatureVector encode(const Candidate& c) {
    FeatureVector f{};
    const auto& a = c.arch;
    const std::size_t layers = std::min<std::size_t>(a.layer_count(), kMaxLayers);
    f[0] = static_cast<double>(a.layer_count());
    for (std::size_t l = 0; l < layers; ++l) {
        f[1 + l] = a.widths_per_layer.size() > l ? a.widths_per_layer[l] : 0.0;
        f[9 + l] = a.blocks_per_layer[l];
    }
    f[17] = a.dropout_rate;
    f[18] = c.config.ordinal();
    return f;
}

bool within_heuristic(const Candidate& c, const Heuristic& h) {
    const auto& a = c.arch;
    if (!validate_candidate(c).ok()) return false;
    if (a.block_family != h.block_family) return false;
    if (!h.depth_range.contains(a.total_blocks())) return false;
    for (int w : a.widths_per_layer)
        if (!h.width_range.contains(w)) return false;
    return h.dropout_range.contains(a.dropout_rate);
}

NeighborSet mutate_neighbors(const Candidate& c, const Heuristic& h, std::size_t k, std::int64_t seed) {
    if (!within_heuristic(c, h)) throw ContractViolation("mutate_neighbors: candidate outside heuristic '" + h.id + "'");

    std::vector<Candidate> all;
    std::set<std::string> seen{candidate_key(c)};
    auto offer = [&](Candidate n) {
        if (!within_heuristic(n, h)) return;
        if (seen.insert(candidate_key(n)).second) all.push_back(std::move(n));
    };

    const std::size_t layers = c.arch.layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
        for (int delta : {+1, -1}) {
            Candidate n = c;
            n.arch.blocks_per_layer[l] += delta;
            offer(std::move(n));
        }
    }
    for (std::size_t l = 0; l < layers; ++l) {
        Candidate wider = c;
        wider.arch.widths_per_layer[l] *= 2;
        offer(std::move(wider));
        Candidate narrower = c;
        narrower.arch.widths_per_layer[l] /= 2;
        offer(std::move(narrower));
    }
    for (double delta : {+0.1, -0.1}) {
        Candidate n = c;
        n.arch.dropout_rate =
            std::clamp(snap_tenth(c.arch.dropout_rate + delta), h.dropout_range.min, h.dropout_range.max);
        offer(std::move(n));
    }
    const int prep = static_cast<int>(c.config.preprocessing);
    for (int delta : {+1, -1}) {
        const int stepped = prep + delta;
        if (stepped < 0 || stepped >= kPreprocessingCount) continue;
        Candidate n = c;
        n.config.preprocessing = static_cast<Preprocessing>(stepped);
        offer(std::move(n));
    }
    {
        Candidate n = c;
        n.config.optimizer = c.config.optimizer == Optimizer::AdaptiveMoments ? Optimizer::PlainGradientDescent
                                                                              : Optimizer::AdaptiveMoments;
        n.config.learning_rate = h.training.learning_rate_for(n.config.optimizer);
        offer(std::move(n));
    }

    auto rng = make_rng(seed);
    std::shuffle(all.begin(), all.end(), rng);

    NeighborSet out;
    out.short_count = all.size() < k;
    if (all.size() > k) all.resize(k);
    out.candidates = std::move(all);
    return out;
}

}  // namespace meeso
