#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "meeso/types.hpp"

namespace meeso {

inline constexpr std::size_t kFeatureCount = 19;

/// Fixed numeric layout of a candidate:
///   [0] layer count, [1..8] widths (zero padded), [9..16] blocks (zero padded),
///   [17] dropout rate, [18] preprocessing * 2 + optimizer.
using FeatureVector = std::array<double, kFeatureCount>;

struct SearchSpace {
    std::string heuristic_id;
    std::vector<Candidate> candidates;
    std::int64_t generated_seed = 0;

    bool operator==(const SearchSpace&) const = default;
};

/// One (depth, width) point of a heuristic's grid.
struct ArchShape {
    int depth;
    int width;
    double depth_index;  ///< position in depth_range, normalized to [0,1]
    double width_index;  ///< position in the log2 width grid, normalized to [0,1]
};

/// Largest normalized depth/width index gap BalancedScale admits.
inline constexpr double kBalanceTolerance = 0.34;

/// Grid points admitted by the heuristic's growth policy, in grid order.
std::vector<ArchShape> admissible_shapes(const Heuristic& h);

/// Number of distinct candidates generate() can emit for `h`.
std::size_t admissible_count(const Heuristic& h);

/// Architecture grown from `depth` unit blocks, one per layer, all of width `width`.
ArchitectureSpec make_architecture(const Heuristic& h, int depth, int width);

/// Config for position `ordinal` of the preprocessing x optimizer product.
PipelineConfig make_config(const Heuristic& h, int ordinal);

/// Draws `count` distinct candidates. Shapes are shuffled by `seed`; configs are
/// assigned round-robin so each shape visits the product in turn.
/// Throws ExhaustedSpace when count > admissible_count(h).
SearchSpace generate(const Heuristic& h, std::size_t count, std::int64_t seed);

FeatureVector encode(const Candidate& c);

/// True when the candidate lies inside the heuristic's family, depth, width and dropout ranges.
bool within_heuristic(const Candidate& c, const Heuristic& h);

struct NeighborSet {
    std::vector<Candidate> candidates;
    /// Fewer than the requested number of distinct neighbors exist.
    bool short_count = false;
};

/// Up to k distinct candidates at edit distance one from `c` that stay within
/// `h`: one layer's blocks +-1, one layer's width doubled or halved, dropout
/// +-0.1 clamped, preprocessing stepped, or optimizer switched (its learning
/// rate follows the heuristic default).
NeighborSet mutate_neighbors(const Candidate& c, const Heuristic& h, std::size_t k, std::int64_t seed);

}  // namespace meeso
