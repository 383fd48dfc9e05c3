#include "meeso/acquisition.hpp"

#include <algorithm>
#include <numeric>

#include "meeso/errors.hpp"
#include "meeso/pareto.hpp"
#include "meeso/search_space.hpp"
#include "meeso/serialize.hpp"

namespace meeso {

std::vector<std::size_t> front_filling_order(const std::vector<std::vector<double>>& scores,
                                             const std::vector<FeatureVector>& features, std::size_t primary,
                                             std::size_t k) {
    const auto fronts = non_dominated_sort(scores);
    std::vector<std::size_t> out;
    const std::size_t want = std::min(k, scores.size());
    for (const auto& front : fronts) {
        if (out.size() == want) break;
        std::vector<std::size_t> members = front;
        std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a][primary] != scores[b][primary]) return scores[a][primary] < scores[b][primary];
            return features[a] < features[b];
        });
        for (std::size_t idx : members) {
            if (out.size() == want) break;
            out.push_back(idx);
        }
    }
    return out;
}

std::vector<ScoredCandidate> rank_candidates(std::span<const RankModel> models, std::span<const Candidate> pool,
                                             const EvaluatedSet& evaluated, std::size_t k) {
    if (models.empty()) throw ContractViolation("select: at least one model is required");
    if (k < 1) throw ContractViolation("select: k must be positive");

    std::vector<Candidate> open;
    std::set<std::string> seen;
    for (const auto& c : pool) {
        auto key = candidate_key(c);
        if (evaluated.contains(key)) continue;
        if (seen.insert(std::move(key)).second) open.push_back(c);
    }
    if (open.empty()) throw EmptySpace("select: no unevaluated candidates in the pool");

    std::size_t primary = 0;
    for (std::size_t m = 0; m < models.size(); ++m) {
        if (models[m].objective() == ObjectiveId::Error) {
            primary = m;
            break;
        }
    }

    std::vector<FeatureVector> features;
    std::vector<std::vector<double>> scores;
    features.reserve(open.size());
    scores.reserve(open.size());
    for (const auto& c : open) {
        features.push_back(encode(c));
        std::vector<double> s;
        s.reserve(models.size());
        for (const auto& m : models) s.push_back(m.predict_group(features.back()));
        scores.push_back(std::move(s));
    }

    const auto fronts = non_dominated_sort(scores);
    std::vector<std::size_t> ranks(open.size(), 0);
    for (std::size_t f = 0; f < fronts.size(); ++f)
        for (std::size_t i : fronts[f]) ranks[i] = f;

    std::vector<ScoredCandidate> out;
    for (std::size_t idx : front_filling_order(scores, features, primary, k))
        out.push_back({open[idx], scores[idx], ranks[idx]});
    return out;
}

std::vector<Candidate> select(std::span<const RankModel> models, std::span<const Candidate> pool,
                              const EvaluatedSet& evaluated, std::size_t k) {
    std::vector<Candidate> out;
    for (auto& s : rank_candidates(models, pool, evaluated, k)) out.push_back(std::move(s.candidate));
    return out;
}

}  // namespace meeso
