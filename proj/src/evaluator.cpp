#include "meeso/evaluator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "meeso/errors.hpp"
#include "meeso/rng.hpp"

namespace meeso {
namespace {

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& source, std::span<const std::size_t> indices) {
    Eigen::MatrixXd out(source.rows(), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t i = 0; i < indices.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = source.col(static_cast<Eigen::Index>(indices[i]));
    return out;
}

}  // namespace

TrainedModel build_and_train(const ArchitectureSpec& arch, const PipelineConfig& cfg, const Dataset& d,
                             std::int64_t seed) {
    if (!validate_candidate({arch, cfg}).ok()) throw ContractViolation("build_and_train: invalid candidate");
    if (d.train_indices.empty()) throw ContractViolation("build_and_train: empty training split");

    TrainedModel m{Network(arch, static_cast<int>(d.n_features()), d.n_classes, derive_seed(seed, {0})), 0.0, seed,
                   0, cfg.epochs};
    auto& params = m.network.parameters();

    const Eigen::MatrixXd x = d.rows(d.train_indices).transpose();
    const std::vector<int> y = d.labels_of(d.train_indices);
    const std::size_t n = y.size();
    const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

    auto order_rng = make_rng(derive_seed(seed, {1}));
    auto dropout_rng = make_rng(derive_seed(seed, {2}));

    Eigen::VectorXd gradient(params.size());
    Eigen::VectorXd first_moment = Eigen::VectorXd::Zero(params.size());
    Eigen::VectorXd second_moment = Eigen::VectorXd::Zero(params.size());

    std::vector<std::size_t> order(n);
    std::vector<int> batch_labels;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), order_rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            const std::span<const std::size_t> idx(order.data() + start, stop - start);
            const Eigen::MatrixXd xb = gather_columns(x, idx);
            batch_labels.clear();
            for (std::size_t i : idx) batch_labels.push_back(y[i]);

            const double loss = m.network.loss_and_gradient(xb, batch_labels, &dropout_rng, gradient);
            if (!std::isfinite(loss) || !gradient.allFinite()) throw TrainingDiverged(epoch);
            epoch_loss += loss;
            ++batches;
            ++m.updates;

            if (cfg.optimizer == Optimizer::PlainGradientDescent) {
                params -= cfg.learning_rate * gradient;
            } else {
                const double t = static_cast<double>(m.updates);
                first_moment = kAdamBeta1 * first_moment + (1.0 - kAdamBeta1) * gradient;
                second_moment = kAdamBeta2 * second_moment + (1.0 - kAdamBeta2) * gradient.cwiseAbs2();
                const double c1 = 1.0 - std::pow(kAdamBeta1, t);
                const double c2 = 1.0 - std::pow(kAdamBeta2, t);
                params.array() -= cfg.learning_rate * (first_moment.array() / c1) /
                                  ((second_moment.array() / c2).sqrt() + kAdamEpsilon);
            }
        }
        m.final_train_loss = epoch_loss / static_cast<double>(batches);
        if (!std::isfinite(m.final_train_loss) || !params.allFinite()) throw TrainingDiverged(epoch);
    }
    return m;
}

double accuracy(const TrainedModel& m, const Dataset& d) {
    if (d.test_indices.empty()) throw ContractViolation("accuracy: empty test split");
    const Eigen::MatrixXd probs = m.network.predict_proba(d.rows(d.test_indices).transpose());
    std::size_t correct = 0;
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
        Eigen::Index best = 0;
        probs.col(c).maxCoeff(&best);
        if (static_cast<int>(best) == d.labels[d.test_indices[static_cast<std::size_t>(c)]]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(probs.cols());
}

McStatistics mc_statistics(const Eigen::MatrixXd& passes) {
    const Eigen::Index n = passes.rows();
    if (n < 1) throw ContractViolation("mc_statistics: no passes");
    McStatistics s;
    s.mean.resize(passes.cols());
    s.variance.resize(passes.cols());
    std::vector<double> column(static_cast<std::size_t>(n));
    std::vector<double> squares(static_cast<std::size_t>(n));
    for (Eigen::Index c = 0; c < passes.cols(); ++c) {
        for (Eigen::Index r = 0; r < n; ++r) column[static_cast<std::size_t>(r)] = passes(r, c);
        std::sort(column.begin(), column.end());
        const double mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(n);
        for (std::size_t r = 0; r < column.size(); ++r) squares[r] = (column[r] - mean) * (column[r] - mean);
        std::sort(squares.begin(), squares.end());
        s.mean(c) = mean;
        s.variance(c) = std::accumulate(squares.begin(), squares.end(), 0.0) / static_cast<double>(n);
    }
    s.uncertainty = s.variance.size() > 0 ? s.variance.mean() : 0.0;
    return s;
}

UncertaintyEstimate mc_dropout_uncertainty(const TrainedModel& m, const Eigen::MatrixXd& probes, int passes,
                                           std::int64_t seed) {
    if (passes < 2) throw ContractViolation("mc_dropout_uncertainty: need at least 2 passes");
    if (probes.rows() < 1) throw ContractViolation("mc_dropout_uncertainty: no probes");
    if (m.dropout_rate() == 0.0) return {0.0, true};

    auto rng = make_rng(seed);
    const Eigen::MatrixXd x = probes.transpose();
    std::vector<Eigen::MatrixXd> outputs;  // classes x probes, one per pass
    outputs.reserve(static_cast<std::size_t>(passes));
    for (int p = 0; p < passes; ++p) outputs.push_back(m.network.predict_proba_stochastic(x, rng));

    const Eigen::Index classes = outputs.front().rows();
    Eigen::MatrixXd per_probe(passes, classes);
    double total = 0.0;
    for (Eigen::Index t = 0; t < probes.rows(); ++t) {
        for (int p = 0; p < passes; ++p) per_probe.row(p) = outputs[static_cast<std::size_t>(p)].col(t).transpose();
        total += mc_statistics(per_probe).uncertainty;
    }
    return {total / static_cast<double>(probes.rows()), false};
}

Eigen::MatrixXd bounding_box_probes(const Dataset& d, std::size_t count, std::int64_t seed) {
    const Eigen::MatrixXd train = d.rows(d.train_indices);
    if (train.rows() == 0) throw ContractViolation("bounding_box_probes: empty training split");
    const Eigen::RowVectorXd lo = train.colwise().minCoeff();
    const Eigen::RowVectorXd hi = train.colwise().maxCoeff();
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(count), train.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index f = 0; f < out.cols(); ++f) out(i, f) = lo(f) + (hi(f) - lo(f)) * unit(rng);
    return out;
}

EvaluationRecord evaluate(const Candidate& c, const Dataset& d, const EvalOptions& opts, const EvalContext& ctx) {
    if (auto v = validate_candidate(c); !v.ok()) throw ContractViolation("evaluate: invalid candidate: " + v.violations.front());
    if (auto problems = validate_dataset(d); !problems.empty())
        throw ContractViolation("evaluate: invalid dataset: " + problems.front());

    const auto started = std::chrono::steady_clock::now();
    EvaluationRecord r;
    r.candidate = c;
    r.seed = ctx.seed;
    r.iteration = ctx.iteration;
    r.heuristic_id = ctx.heuristic_id;

    const Dataset prepared = preprocess(d, c.config.preprocessing, derive_seed(ctx.seed, {1}));
    try {
        const TrainedModel model = build_and_train(c.arch, c.config, prepared, derive_seed(ctx.seed, {2}));
        r.objectives.error = 1.0 - accuracy(model, prepared);
        const Eigen::MatrixXd probes = bounding_box_probes(prepared, opts.n_probes, derive_seed(ctx.seed, {3}));
        const auto u = mc_dropout_uncertainty(model, probes, opts.mc_passes, derive_seed(ctx.seed, {4}));
        r.objectives.uncertainty = u.value;
        if (u.uninformative) r.warnings.emplace_back(kWarnUninformativeUncertainty);
    } catch (const TrainingDiverged& e) {
        r.objectives = {opts.penalty_error, opts.penalty_uncertainty};
        r.warnings.emplace_back(std::string(kWarnDiverged) + " (epoch " + std::to_string(e.epoch()) + ")");
    }

    if (opts.record_time)
        r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return r;
}

ObjectiveVector oracle_evaluate(const Candidate& c, std::int64_t noise_seed, double noise_sigma) {
    const auto& a = c.arch;
    const double depth = static_cast<double>(a.total_blocks());
    double log_width = 0.0;
    for (int w : a.widths_per_layer) log_width += std::log2(static_cast<double>(w));
    log_width /= static_cast<double>(std::max<std::size_t>(a.widths_per_layer.size(), 1));

    const double b = std::abs(depth - 6.0) / 6.0;
    const double w = std::abs(log_width - 5.0) / 5.0;

    double eta = 0.0;
    double eta_u = 0.0;
    if (noise_sigma > 0.0) {
        auto rng = make_rng(noise_seed);
        std::normal_distribution<double> noise(0.0, noise_sigma);
        eta = noise(rng);
        eta_u = noise(rng);
    }

    const double plain_gd = c.config.optimizer == Optimizer::PlainGradientDescent ? 1.0 : 0.0;
    const double no_prep = c.config.preprocessing == Preprocessing::None ? 1.0 : 0.0;
    ObjectiveVector o;
    o.error = std::clamp(0.05 + 0.4 * b * b + 0.4 * w * w + 0.05 * plain_gd + 0.03 * no_prep + eta, 0.0, 1.0);
    o.uncertainty = std::clamp(0.02 + 0.3 * std::abs(a.dropout_rate - 0.3) + 0.1 * w + eta_u, 0.0, 1.0);
    return o;
}

double oracle_cost_seconds(const Candidate& c) {
    // Roughly proportional to multiply-adds per sample times epochs.
    double macs = 0.0;
    int width_in = 10;
    for (std::size_t l = 0; l < c.arch.layer_count(); ++l) {
        const int w = c.arch.widths_per_layer[l];
        for (int b = 0; b < c.arch.blocks_per_layer[l]; ++b) {
            macs += static_cast<double>(width_in) * w;
            width_in = w;
        }
    }
    return 1e-6 * macs * c.config.epochs;
}

EvaluationRecord oracle_record(const Candidate& c, const EvalContext& ctx, double noise_sigma) {
    EvaluationRecord r;
    r.candidate = c;
    r.objectives = oracle_evaluate(c, ctx.seed, noise_sigma);
    r.wall_seconds = oracle_cost_seconds(c);
    r.seed = ctx.seed;
    r.iteration = ctx.iteration;
    r.heuristic_id = ctx.heuristic_id;
    return r;
}

}  // namespace meeso
