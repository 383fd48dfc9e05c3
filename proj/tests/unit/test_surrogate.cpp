#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "meeso/errors.hpp"
#include "meeso/evaluator.hpp"
#include "meeso/serialize.hpp"
#include "meeso/surrogate.hpp"
#include "oracles.hpp"

using namespace meeso;

namespace {

std::vector<EvaluationRecord> with_errors(const std::vector<double>& errors) {
    std::vector<EvaluationRecord> out;
    for (double e : errors) out.push_back(oracle::record(e, 0.0));
    return out;
}

Candidate random_candidate(std::mt19937_64& rng) {
    Candidate c;
    c.arch.block_family = static_cast<BlockFamily>(rng() % 3);
    const std::size_t layers = 1 + rng() % 6;
    for (std::size_t l = 0; l < layers; ++l) {
        c.arch.blocks_per_layer.push_back(1 + static_cast<int>(rng() % 3));
        c.arch.widths_per_layer.push_back(1 << (3 + rng() % 5));
    }
    c.arch.dropout_rate = static_cast<double>(rng() % 7) / 10.0;
    c.config.preprocessing = static_cast<Preprocessing>(rng() % 3);
    c.config.optimizer = static_cast<Optimizer>(rng() % 2);
    c.config.epochs = 30;
    return c;
}

std::vector<EvaluationRecord> oracle_records(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<EvaluationRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = random_candidate(rng);
        out.push_back(oracle_record(c, {static_cast<std::int64_t>(rng()), 0, "oracle"}));
    }
    return out;
}

}  // namespace

TEST_CASE("assign_groups examples") {
    auto six = assign_groups(with_errors({0.1, 0.2, 0.3, 0.4, 0.5, 0.6}), 3, ObjectiveId::Error);
    std::vector<int> labels;
    for (const auto& s : six) labels.push_back(s.label);
    CHECK(labels == std::vector<int>{0, 0, 1, 1, 2, 2});

    for (const auto& s : assign_groups(with_errors({0.3, 0.1, 0.2}), 1, ObjectiveId::Error)) CHECK(s.label == 0);

    auto seven = assign_groups(with_errors({0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1}), 3, ObjectiveId::Error);
    std::map<int, int> sizes;
    for (const auto& s : seven) ++sizes[s.label];
    CHECK(sizes[0] == 3);
    CHECK(sizes[1] == 2);
    CHECK(sizes[2] == 2);
    // output follows input order: the last record has the lowest error
    CHECK(seven.back().label == 0);
    CHECK(seven.front().label == 2);

    CHECK_THROWS_AS(assign_groups(with_errors({0.1, 0.2}), 3, ObjectiveId::Error), InsufficientHistory);
}

TEST_CASE("assign_groups ties keep history order") {
    const auto g = assign_groups(with_errors({0.5, 0.5, 0.5, 0.5}), 2, ObjectiveId::Error);
    CHECK(g[0].label == 0);
    CHECK(g[1].label == 0);
    CHECK(g[2].label == 1);
    CHECK(g[3].label == 1);
}

TEST_CASE("assign_groups partition and monotonicity on fuzzed input") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 1000; ++t) {
        const int groups = 1 + static_cast<int>(rng() % 10);
        const std::size_t n = static_cast<std::size_t>(groups) + rng() % 120;
        std::vector<EvaluationRecord> rs;
        std::uniform_int_distribution<int> coarse(0, 5);
        for (std::size_t i = 0; i < n; ++i) {
            auto r = oracle::record(coarse(rng) / 5.0, static_cast<double>(rng() % 1000) / 1000.0);
            rs.push_back(r);
        }
        const auto objective = t % 2 ? ObjectiveId::Error : ObjectiveId::Uncertainty;
        const auto g = assign_groups(rs, groups, objective);
        REQUIRE(g.size() == n);

        std::vector<std::size_t> sizes(static_cast<std::size_t>(groups), 0);
        std::vector<double> lo(sizes.size(), 1e9), hi(sizes.size(), -1e9);
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(g[i].label >= 0);
            REQUIRE(g[i].label < groups);
            const auto b = static_cast<std::size_t>(g[i].label);
            ++sizes[b];
            const double v = objective_of(rs[i], objective);
            lo[b] = std::min(lo[b], v);
            hi[b] = std::max(hi[b], v);
        }
        const auto [mn, mx] = std::minmax_element(sizes.begin(), sizes.end());
        CHECK(*mx - *mn <= 1);
        CHECK(std::is_sorted(sizes.rbegin(), sizes.rend()));  // larger buckets first
        for (std::size_t b = 0; b + 1 < sizes.size(); ++b) CHECK(hi[b] <= lo[b + 1]);

        // ties straddle buckets only in history order
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (objective_of(rs[i], objective) == objective_of(rs[j], objective)) CHECK(g[i].label <= g[j].label);
    }
}

TEST_CASE("train needs enough history") {
    CHECK(minimum_training_size(5) == 10);
    CHECK(minimum_training_size(8) == 16);
    const auto rs = oracle_records(9, 1);
    CHECK_THROWS_AS(RankModel::train(rs, 3, ObjectiveId::Error), InsufficientHistory);
    CHECK_NOTHROW(RankModel::train(oracle_records(10, 1), 5, ObjectiveId::Error));
}

TEST_CASE("untrained model refuses to predict") {
    RankModel m;
    CHECK_FALSE(m.trained());
    CHECK_THROWS_AS(m.predict_group(FeatureVector{}), ContractViolation);
}

TEST_CASE("constant objective trains a degenerate constant model") {
    auto rs = oracle_records(20, 2);
    for (auto& r : rs) r.objectives.error = 0.4;
    const auto m = RankModel::train(rs, 5, ObjectiveId::Error);
    CHECK(m.degenerate());
    for (const auto& r : rs) CHECK(m.predict_group(encode(r.candidate)) == 0.0);
    CHECK(m.predict_group(FeatureVector{}) == 0.0);
}

TEST_CASE("monotone one-feature objective is recovered exactly on the training set") {
    std::vector<EvaluationRecord> rs;
    for (int i = 0; i < 40; ++i) {
        auto r = oracle::record(0.0, 0.0);
        r.candidate.arch.dropout_rate = i / 50.0;
        r.objectives.error = std::exp(r.candidate.arch.dropout_rate);  // monotone in feature 17
        rs.push_back(r);
    }
    const auto m = RankModel::train(rs, 5, ObjectiveId::Error);
    const auto groups = assign_groups(rs, 5, ObjectiveId::Error);
    for (std::size_t i = 0; i < rs.size(); ++i)
        CHECK(std::lround(m.predict_group(groups[i].features)) == groups[i].label);
}

TEST_CASE("training-set sanity and held-out order agreement") {
    const auto train = oracle_records(200, 3);
    const auto held = oracle_records(100, 4);
    for (auto objective : {ObjectiveId::Error, ObjectiveId::Uncertainty}) {
        const auto m = RankModel::train(train, 5, objective);
        CHECK_FALSE(m.degenerate());
        CHECK(m.training_size() == 200);
        const auto groups = assign_groups(train, 5, objective);
        std::size_t close = 0;
        double total = 0.0;
        for (const auto& s : groups) {
            const double gap = std::abs(m.predict_group(s.features) - s.label);
            close += gap <= 1.0;
            total += gap;
        }
        CHECK(static_cast<double>(close) / groups.size() >= 0.9);
        CHECK(total / groups.size() <= 1.0);

        std::vector<double> predicted, truth;
        for (const auto& r : held) {
            predicted.push_back(m.predict_group(encode(r.candidate)));
            truth.push_back(objective_of(r, objective));
        }
        CHECK(oracle::pairwise_agreement(predicted, truth) >= 0.70);
    }
}

TEST_CASE("training is deterministic and serializable") {
    const auto rs = oracle_records(60, 8);
    const auto a = RankModel::train(rs, 5, ObjectiveId::Error);
    const auto b = RankModel::train(rs, 5, ObjectiveId::Error);
    const RankModel c = json::parse(json(a).dump()).get<RankModel>();
    CHECK(c.trained());
    CHECK(c.n_groups() == 5);
    for (const auto& r : oracle_records(50, 9)) {
        const auto f = encode(r.candidate);
        CHECK(a.predict_group(f) == b.predict_group(f));
        CHECK(a.predict_group(f) == c.predict_group(f));
        CHECK(std::isfinite(a.predict_group(f)));
    }
}

TEST_CASE("boosted trees fit a step function") {
    std::vector<FeatureVector> x;
    std::vector<double> y;
    for (int i = 0; i < 30; ++i) {
        FeatureVector f{};
        f[3] = i;
        x.push_back(f);
        y.push_back(i < 15 ? 0.0 : 2.0);
    }
    const auto model = BoostedTrees::fit(x, y, {});
    CHECK(model.tree_count() <= 100);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(model.predict(x[i]) == doctest::Approx(y[i]).epsilon(1e-3));
}
