#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include "meeso/errors.hpp"
#include "meeso/evaluator.hpp"
#include "meeso/search_space.hpp"

using namespace meeso;

namespace {

Eigen::MatrixXd random_batch(int features, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd x(features, n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
    return x;
}

// Central differences on `count` random parameters; returns the worst relative error.
double gradient_check(Network net, const Eigen::MatrixXd& x, const std::vector<int>& y, std::int64_t mask_seed,
                      bool with_dropout, std::size_t count, std::uint64_t pick_seed) {
    auto loss_at = [&](const Network& n) {
        Eigen::VectorXd unused;
        auto rng = make_rng(mask_seed);
        return n.loss_and_gradient(x, y, with_dropout ? &rng : nullptr, unused);
    };
    Eigen::VectorXd analytic;
    {
        auto rng = make_rng(mask_seed);
        net.loss_and_gradient(x, y, with_dropout ? &rng : nullptr, analytic);
    }
    std::mt19937_64 pick(pick_seed);
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t t = 0; t < count; ++t) {
        const auto i = static_cast<Eigen::Index>(pick() % net.parameter_count());
        const double saved = net.parameters()(i);
        net.parameters()(i) = saved + h;
        const double up = loss_at(net);
        net.parameters()(i) = saved - h;
        const double down = loss_at(net);
        net.parameters()(i) = saved;
        const double numeric = (up - down) / (2 * h);
        const double denom = std::max(std::abs(numeric) + std::abs(analytic(i)), 1e-7);
        worst = std::max(worst, std::abs(numeric - analytic(i)) / denom);
    }
    return worst;
}

std::vector<int> labels_for(int n) {
    std::vector<int> y;
    for (int i = 0; i < n; ++i) y.push_back(i % 2);
    return y;
}

Candidate tiny_candidate(double dropout = 0.2) {
    Candidate c;
    c.arch = {BlockFamily::Plain, {1, 1}, {8, 8}, dropout};
    c.config = {Preprocessing::Standardize, Optimizer::AdaptiveMoments, 20, 0.005, 32};
    return c;
}

}  // namespace

TEST_CASE("gradient check: 2-layer width-8 net") {
    const ArchitectureSpec arch{BlockFamily::Plain, {1, 1}, {8, 8}, 0.0};
    const Network net(arch, 10, 2, 3);
    const auto x = random_batch(10, 16, 1);
    CHECK(gradient_check(net, x, labels_for(16), 0, false, 100, 7) <= 1e-4);
}

TEST_CASE("gradient check with dropout masks and every block family") {
    for (auto family : {BlockFamily::Plain, BlockFamily::Residual, BlockFamily::Bottleneck}) {
        const ArchitectureSpec arch{family, {2, 1, 3}, {8, 16, 8}, 0.3};
        Network net(arch, 5, 3, 11);
        // zero init biases leave fully dropped units exactly on the ReLU kink
        net.parameters() += 0.1 * random_batch(static_cast<int>(net.parameter_count()), 1, 9).col(0);
        const auto x = random_batch(5, 12, 2);
        std::vector<int> y;
        for (int i = 0; i < 12; ++i) y.push_back(i % 3);
        CHECK(gradient_check(net, x, y, 42, true, 200, 8) <= 1e-4);
    }
}

TEST_CASE("network shapes follow the block family") {
    const ArchitectureSpec res{BlockFamily::Residual, {2, 1}, {16, 8}, 0.0};
    const Network r(res, 10, 2, 0);
    REQUIRE(r.layers().size() == 4);
    CHECK_FALSE(r.layers()[0].residual);  // 10 -> 16
    CHECK(r.layers()[1].residual);        // 16 -> 16
    CHECK_FALSE(r.layers()[2].residual);  // 16 -> 8
    CHECK(r.layers()[3].outputs == 2);

    const ArchitectureSpec bott{BlockFamily::Bottleneck, {3}, {16}, 0.0};
    const Network b(bott, 10, 2, 0);
    CHECK(b.layers()[0].outputs == 8);
    CHECK(b.layers()[1].outputs == 8);
    CHECK(b.layers()[2].outputs == 16);

    const ArchitectureSpec plain{BlockFamily::Plain, {1, 1}, {8, 8}, 0.0};
    CHECK(Network(plain, 10, 2, 0).parameter_count() == (10 * 8 + 8) + (8 * 8 + 8) + (8 * 2 + 2));
}

TEST_CASE("softmax outputs are distributions") {
    const ArchitectureSpec arch{BlockFamily::Residual, {1, 2}, {32, 32}, 0.4};
    const Network net(arch, 10, 4, 5);
    const auto x = random_batch(10, 50, 3) * 10.0;
    auto rng = make_rng(1);
    for (const Eigen::MatrixXd& p : {net.predict_proba(x), net.predict_proba_stochastic(x, rng)}) {
        CHECK(p.minCoeff() >= 0.0);
        for (Eigen::Index c = 0; c < p.cols(); ++c) CHECK(std::abs(p.col(c).sum() - 1.0) <= 1e-9);
    }
    Eigen::MatrixXd extreme(2, 1);
    extreme << 1000.0, -1000.0;
    const auto s = softmax_columns(extreme);
    CHECK(s(0, 0) == 1.0);
    CHECK(std::isfinite(s(1, 0)));
}

TEST_CASE("mc_statistics hand cases") {
    Eigen::MatrixXd two(2, 1);
    two << 0.4, 0.6;
    const auto s = mc_statistics(two);
    CHECK(std::abs(s.mean(0) - 0.5) <= 1e-12);
    CHECK(std::abs(s.uncertainty - 0.01) <= 1e-12);

    Eigen::MatrixXd zero_one(2, 1);
    zero_one << 0.0, 1.0;
    CHECK(std::abs(mc_statistics(zero_one).uncertainty - 0.25) <= 1e-12);

    // per-class variances are averaged
    Eigen::MatrixXd two_class(2, 2);
    two_class << 0.4, 0.6, 0.6, 0.4;
    CHECK(std::abs(mc_statistics(two_class).uncertainty - 0.01) <= 1e-12);

    CHECK_THROWS_AS(mc_statistics(Eigen::MatrixXd(0, 2)), ContractViolation);
}

TEST_CASE("mc_statistics is invariant under pass permutation") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        Eigen::MatrixXd passes(20, 3);
        for (Eigen::Index i = 0; i < passes.size(); ++i) passes(i) = u(rng);
        const double base = mc_statistics(passes).uncertainty;
        std::vector<Eigen::Index> order(20);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        Eigen::MatrixXd shuffled(20, 3);
        for (Eigen::Index r = 0; r < 20; ++r) shuffled.row(r) = passes.row(order[static_cast<std::size_t>(r)]);
        CHECK(mc_statistics(shuffled).uncertainty == base);
        CHECK(base >= 0.0);
    }
}

TEST_CASE("deterministic model has zero uncertainty") {
    const auto d = make_two_blobs(0);
    const auto c = tiny_candidate(0.0);
    const auto m = build_and_train(c.arch, c.config, d, 1);
    const auto probes = bounding_box_probes(d, 16, 2);
    const auto u = mc_dropout_uncertainty(m, probes, 20, 3);
    CHECK(u.value == 0.0);
    CHECK(u.uninformative);
    CHECK_THROWS_AS(mc_dropout_uncertainty(m, probes, 1, 3), ContractViolation);
    CHECK_THROWS_AS(mc_dropout_uncertainty(m, Eigen::MatrixXd(0, 10), 5, 3), ContractViolation);
}

TEST_CASE("dropout model has positive uncertainty") {
    const auto d = make_two_blobs(0);
    const auto c = tiny_candidate(0.5);
    const auto m = build_and_train(c.arch, c.config, d, 1);
    const auto probes = bounding_box_probes(d, 16, 2);
    const auto u = mc_dropout_uncertainty(m, probes, 20, 3);
    CHECK(u.value > 0.0);
    CHECK_FALSE(u.uninformative);
    CHECK(mc_dropout_uncertainty(m, probes, 20, 3).value == u.value);
}

TEST_CASE("probes lie in the training bounding box") {
    const auto d = make_two_blobs(3);
    const auto p = bounding_box_probes(d, 64, 1);
    const Eigen::MatrixXd train = d.rows(d.train_indices);
    CHECK(p.rows() == 64);
    for (Eigen::Index f = 0; f < p.cols(); ++f) {
        CHECK(p.col(f).minCoeff() >= train.col(f).minCoeff());
        CHECK(p.col(f).maxCoeff() <= train.col(f).maxCoeff());
    }
}

TEST_CASE("one epoch runs ceil(n / batch) updates") {
    const auto d = make_two_blobs(0);
    auto c = tiny_candidate();
    c.config.epochs = 1;
    c.config.batch_size = 7;
    const auto m = build_and_train(c.arch, c.config, d, 1);
    CHECK(m.updates == (d.train_indices.size() + 6) / 7);
    CHECK(m.epochs == 1);
}

TEST_CASE("training is deterministic for a fixed seed") {
    const auto d = make_two_blobs(0);
    const auto c = tiny_candidate();
    const auto a = build_and_train(c.arch, c.config, d, 5);
    const auto b = build_and_train(c.arch, c.config, d, 5);
    CHECK(a.network.parameters() == b.network.parameters());
    CHECK(a.final_train_loss == b.final_train_loss);
    const auto other = build_and_train(c.arch, c.config, d, 6);
    CHECK_FALSE(other.network.parameters() == a.network.parameters());
}

TEST_CASE("non-finite training raises TrainingDiverged") {
    const auto d = make_two_blobs(0);
    auto c = tiny_candidate();
    c.config.optimizer = Optimizer::PlainGradientDescent;
    c.config.learning_rate = 1e300;
    CHECK_THROWS_AS(build_and_train(c.arch, c.config, d, 1), TrainingDiverged);

    const auto r = evaluate(c, d, {}, {1, 0, "x"});
    CHECK(r.objectives.error == 1.0);
    CHECK(r.objectives.uncertainty == 1.0);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("diverged") != std::string::npos);
}

TEST_CASE("accuracy") {
    const auto d = make_two_blobs(0);
    auto c = tiny_candidate(0.0);
    auto m = build_and_train(c.arch, c.config, d, 1);

    // constant class 0
    m.network.parameters().setZero();
    m.network.parameters()(static_cast<Eigen::Index>(m.network.layers().back().bias_offset)) = 1.0;
    CHECK(accuracy(m, d) == 0.5);

    BlobOptions easy;
    easy.mean_offset = 3.0;
    easy.sigma = 0.3;
    const auto e = make_two_blobs(2, easy);
    CHECK(accuracy(build_and_train(c.arch, c.config, e, 1), e) == 1.0);

    auto empty = d;
    empty.test_indices.clear();
    CHECK_THROWS_AS(accuracy(m, empty), ContractViolation);
}

TEST_CASE("evaluate end to end") {
    const auto d = make_two_blobs(0);
    const auto c = tiny_candidate();
    EvalOptions opts;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = evaluate(c, d, opts, {77, 2, "plain"});
    CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 5.0);
    CHECK(r.candidate == c);
    CHECK(r.seed == 77);
    CHECK(r.iteration == 2);
    CHECK(r.heuristic_id == "plain");
    CHECK(r.wall_seconds > 0.0);
    CHECK(validate_objectives(r.objectives).ok());
    CHECK(r.objectives.error <= 0.1);
    CHECK(r.warnings.empty());

    const auto again = evaluate(c, d, opts, {77, 2, "plain"});
    CHECK(again.objectives == r.objectives);

    opts.record_time = false;
    CHECK(evaluate(c, d, opts, {77, 2, "plain"}).wall_seconds == 0.0);

    auto none = c;
    none.config.preprocessing = Preprocessing::None;
    auto noisy = c;
    noisy.config.preprocessing = Preprocessing::NoiseAugment;
    CHECK_FALSE(evaluate(none, d, opts, {77, 2, "plain"}).objectives ==
                evaluate(noisy, d, opts, {77, 2, "plain"}).objectives);

    const auto zero = evaluate(tiny_candidate(0.0), d, opts, {1, 0, "p"});
    CHECK(zero.objectives.uncertainty == 0.0);
    REQUIRE(zero.warnings.size() == 1);

    auto invalid = c;
    invalid.arch.widths_per_layer = {8};
    CHECK_THROWS_AS(evaluate(invalid, d, opts, {}), ContractViolation);
}

TEST_CASE("oracle examples") {
    Candidate c;
    c.arch = {BlockFamily::Residual, {1, 1, 1, 1, 1, 1}, {32, 32, 32, 32, 32, 32}, 0.3};
    c.config = {Preprocessing::Standardize, Optimizer::AdaptiveMoments, 30, 0.005, 32};
    const auto best = oracle_evaluate(c, 0, 0.0);
    CHECK(best.error == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(best.uncertainty == doctest::Approx(0.02).epsilon(1e-12));

    auto sgd = c;
    sgd.config.optimizer = Optimizer::PlainGradientDescent;
    CHECK(oracle_evaluate(sgd, 0, 0.0).error - best.error == doctest::Approx(0.05).epsilon(1e-12));

    CHECK(oracle_evaluate(c, 9) == oracle_evaluate(c, 9));
    CHECK_FALSE(oracle_evaluate(c, 9) == oracle_evaluate(c, 10));

    // hand values: D=2 (b=2/3), widths 8 (W=3, w=0.4), dropout 0.1, SGD, None
    Candidate far;
    far.arch = {BlockFamily::Plain, {1, 1}, {8, 8}, 0.1};
    far.config = {Preprocessing::None, Optimizer::PlainGradientDescent, 30, 0.05, 32};
    const auto o = oracle_evaluate(far, 0, 0.0);
    const double b = 4.0 / 6.0, w = 2.0 / 5.0;
    CHECK(o.error == doctest::Approx(0.05 + 0.4 * b * b + 0.4 * w * w + 0.05 + 0.03).epsilon(1e-12));
    CHECK(o.uncertainty == doctest::Approx(0.02 + 0.3 * 0.2 + 0.1 * w).epsilon(1e-12));
}

TEST_CASE("oracle minimum by brute force") {
    double best_err = 2.0, best_unc = 2.0;
    std::vector<Candidate> err_argmin;
    for (int depth = 1; depth <= kMaxLayers; ++depth)
        for (int width = kMinWidth; width <= kMaxWidth; width *= 2)
            for (int drop = 0; drop <= 9; ++drop)
                for (int ordinal = 0; ordinal < 6; ++ordinal) {
                    Heuristic h;
                    h.dropout_rate = drop / 10.0;
                    Candidate c{make_architecture(h, depth, width), make_config(h, ordinal)};
                    const auto o = oracle_evaluate(c, 0, 0.0);
                    best_unc = std::min(best_unc, o.uncertainty);
                    if (o.error < best_err - 1e-15) {
                        best_err = o.error;
                        err_argmin.clear();
                    }
                    if (std::abs(o.error - best_err) <= 1e-15) err_argmin.push_back(c);
                }
    CHECK(best_err == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(best_unc == doctest::Approx(0.02).epsilon(1e-12));
    REQUIRE_FALSE(err_argmin.empty());
    for (const auto& c : err_argmin) {
        CHECK(c.arch.total_blocks() == 6);
        CHECK(c.arch.widths_per_layer[0] == 32);
        CHECK(c.config.optimizer == Optimizer::AdaptiveMoments);
        CHECK(c.config.preprocessing != Preprocessing::None);
    }
}

TEST_CASE("oracle record cost is deterministic") {
    const auto c = tiny_candidate();
    const auto a = oracle_record(c, {3, 1, "h"});
    CHECK(a == oracle_record(c, {3, 1, "h"}));
    CHECK(a.wall_seconds == oracle_cost_seconds(c));
    CHECK(a.wall_seconds > 0.0);
}
