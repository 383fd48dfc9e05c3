#include <doctest.h>

#include <algorithm>
#include <set>

#include "meeso/acquisition.hpp"
#include "meeso/errors.hpp"
#include "meeso/evaluator.hpp"
#include "meeso/pareto.hpp"
#include "meeso/search_space.hpp"
#include "meeso/serialize.hpp"

using namespace meeso;

namespace {

FeatureVector feature(double tag) {
    FeatureVector f{};
    f[0] = tag;
    return f;
}

struct Fixture {
    Heuristic h = builtin_heuristic("residual");
    std::vector<Candidate> space;
    std::vector<EvaluationRecord> history;
    EvaluatedSet evaluated;

    explicit Fixture(std::size_t evaluated_count = 20) {
        space = generate(h, admissible_count(h), 4).candidates;
        for (std::size_t i = 0; i < evaluated_count; ++i) {
            history.push_back(oracle_record(space[i], {static_cast<std::int64_t>(i), 0, h.id}));
            evaluated.insert(candidate_key(space[i]));
        }
    }
};

}  // namespace

TEST_CASE("single score: plain ascending sort") {
    // a:0.1 b:0.5 c:0.2 d:0.9, k=3 -> a, c, b
    const std::vector<std::vector<double>> scores{{0.1}, {0.5}, {0.2}, {0.9}};
    const std::vector<FeatureVector> f{feature(0), feature(1), feature(2), feature(3)};
    CHECK(front_filling_order(scores, f, 0, 3) == std::vector<std::size_t>{0, 2, 1});
}

TEST_CASE("two scores: first front fills first") {
    // a=(0,1) b=(1,0) c=(2,2), k=2 -> {a,b}
    const std::vector<std::vector<double>> scores{{0, 1}, {1, 0}, {2, 2}};
    const std::vector<FeatureVector> f{feature(0), feature(1), feature(2)};
    const auto out = front_filling_order(scores, f, 0, 2);
    CHECK(std::set<std::size_t>(out.begin(), out.end()) == std::set<std::size_t>{0, 1});
    CHECK(out == std::vector<std::size_t>{0, 1});  // error score breaks the tie
    CHECK(front_filling_order(scores, f, 0, 10) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("equal primary scores fall back to the encoding order") {
    const std::vector<std::vector<double>> scores{{0.3, 0.3}, {0.3, 0.3}, {0.3, 0.3}};
    const std::vector<FeatureVector> f{feature(5), feature(1), feature(3)};
    CHECK(front_filling_order(scores, f, 0, 3) == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("select never returns evaluated or duplicate candidates") {
    Fixture fx;
    const RankModel models[] = {RankModel::train(fx.history, 5, ObjectiveId::Error),
                                RankModel::train(fx.history, 5, ObjectiveId::Uncertainty)};
    auto pool = fx.space;
    pool.insert(pool.end(), fx.space.begin(), fx.space.begin() + 30);  // duplicates
    const auto chosen = select(models, pool, fx.evaluated, 8);
    CHECK(chosen.size() == 8);
    std::set<std::string> keys;
    for (const auto& c : chosen) {
        CHECK_FALSE(fx.evaluated.contains(candidate_key(c)));
        keys.insert(candidate_key(c));
    }
    CHECK(keys.size() == chosen.size());
    CHECK(select(models, pool, fx.evaluated, 8) == chosen);
}

TEST_CASE("k beyond the unevaluated pool returns all of it") {
    Fixture fx;
    const RankModel models[] = {RankModel::train(fx.history, 5, ObjectiveId::Error)};
    const auto chosen = select(models, fx.space, fx.evaluated, 1000);
    CHECK(chosen.size() == fx.space.size() - fx.evaluated.size());
}

TEST_CASE("single model output is ascending score order") {
    Fixture fx;
    const RankModel models[] = {RankModel::train(fx.history, 5, ObjectiveId::Error)};
    const auto ranked = rank_candidates(models, fx.space, fx.evaluated, 10);
    REQUIRE(ranked.size() == 10);
    for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].scores[0] <= ranked[i].scores[0]);
    std::set<std::string> picked;
    for (const auto& r : ranked) picked.insert(candidate_key(r.candidate));
    for (const auto& c : fx.space) {
        const auto key = candidate_key(c);
        if (fx.evaluated.contains(key) || picked.contains(key)) continue;
        CHECK(models[0].predict_group(encode(c)) >= ranked.back().scores[0]);
    }
}

TEST_CASE("front filling: nothing returned is dominated by an unreturned earlier-front candidate") {
    Fixture fx;
    const RankModel models[] = {RankModel::train(fx.history, 5, ObjectiveId::Error),
                                RankModel::train(fx.history, 5, ObjectiveId::Uncertainty)};
    const auto all = rank_candidates(models, fx.space, fx.evaluated, 1000);
    for (std::size_t k : {1u, 3u, 7u, 15u}) {
        const auto ranked = rank_candidates(models, fx.space, fx.evaluated, k);
        std::set<std::string> picked;
        for (const auto& r : ranked) picked.insert(candidate_key(r.candidate));
        for (const auto& r : ranked)
            for (const auto& other : all) {
                if (picked.contains(candidate_key(other.candidate))) continue;
                CHECK(other.front >= r.front);
                if (other.front < r.front) CHECK_FALSE(dominates(other.scores, r.scores));
            }
    }
}

TEST_CASE("select errors") {
    Fixture fx;
    const RankModel models[] = {RankModel::train(fx.history, 5, ObjectiveId::Error)};
    EvaluatedSet everything;
    for (const auto& c : fx.space) everything.insert(candidate_key(c));
    CHECK_THROWS_AS(select(models, fx.space, everything, 4), EmptySpace);
    CHECK_THROWS_AS(select(std::span<const RankModel>{}, fx.space, fx.evaluated, 4), ContractViolation);
    CHECK_THROWS_AS(select(models, fx.space, fx.evaluated, 0), ContractViolation);
}
