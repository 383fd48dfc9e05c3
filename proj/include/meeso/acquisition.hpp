#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "meeso/surrogate.hpp"
#include "meeso/types.hpp"

namespace meeso {

/// Candidate keys (see candidate_key) already truly evaluated.
using EvaluatedSet = std::set<std::string>;

struct ScoredCandidate {
    Candidate candidate;
    std::vector<double> scores;  ///< one per model, in model order
    std::size_t front = 0;       ///< non-dominated rank of `scores`
};

/// Front-filling order over predicted score vectors: indices of the first
/// min(k, n) entries after non-dominated sorting, ordered within a front by
/// scores[i][primary] then by features[i] lexicographically.
std::vector<std::size_t> front_filling_order(const std::vector<std::vector<double>>& scores,
                                             const std::vector<FeatureVector>& features, std::size_t primary,
                                             std::size_t k);

/// Scores every unevaluated, distinct member of `pool` with each model, sorts
/// the score vectors into non-dominated fronts and fills the result from F0
/// upward. Within a front: ascending error-model score (first model if none
/// targets error), then lexicographic feature encoding.
/// Returns min(k, #unevaluated) candidates; throws EmptySpace when none remain.
std::vector<ScoredCandidate> rank_candidates(std::span<const RankModel> models, std::span<const Candidate> pool,
                                             const EvaluatedSet& evaluated, std::size_t k);

std::vector<Candidate> select(std::span<const RankModel> models, std::span<const Candidate> pool,
                              const EvaluatedSet& evaluated, std::size_t k);

}  // namespace meeso
