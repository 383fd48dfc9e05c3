#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "meeso/dataset.hpp"
#include "meeso/network.hpp"
#include "meeso/types.hpp"

namespace meeso {

struct TrainedModel {
    Network network;
    double final_train_loss = 0.0;
    std::int64_t seed = 0;
    std::size_t updates = 0;  ///< optimizer steps taken
    int epochs = 0;

    double dropout_rate() const noexcept { return network.dropout_rate(); }
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

/// Mini-batch training with cross-entropy, ceil(n_train / batch_size) updates per
/// epoch. Throws TrainingDiverged when an epoch's loss is non-finite.
TrainedModel build_and_train(const ArchitectureSpec& arch, const PipelineConfig& cfg, const Dataset& d,
                             std::int64_t seed);

/// Test-split argmax accuracy with dropout disabled.
double accuracy(const TrainedModel& m, const Dataset& d);

/// Statistics of N stochastic passes over one probe (rows = passes, cols = classes).
struct McStatistics {
    Eigen::VectorXd mean;      ///< per-class predictive mean
    Eigen::VectorXd variance;  ///< per-class variance, 1/N normalizer
    double uncertainty = 0.0;  ///< mean of the per-class variances
};

/// Sums run over sorted values, so the result does not depend on pass order.
McStatistics mc_statistics(const Eigen::MatrixXd& passes);

struct UncertaintyEstimate {
    double value = 0.0;
    /// Dropout rate is zero, so every pass is identical and value is 0.
    bool uninformative = false;
};

/// Mean over probes (rows) of the MC-Dropout uncertainty from `passes` dropout-active
/// forward passes. Requires passes >= 2 and at least one probe.
UncertaintyEstimate mc_dropout_uncertainty(const TrainedModel& m, const Eigen::MatrixXd& probes, int passes,
                                           std::int64_t seed);

/// Uniform samples from the bounding box of the training rows.
Eigen::MatrixXd bounding_box_probes(const Dataset& d, std::size_t count, std::int64_t seed);

struct EvalOptions {
    int mc_passes = 20;
    std::size_t n_probes = 32;
    double penalty_error = 1.0;
    double penalty_uncertainty = 1.0;
    /// Record measured wall time; when false wall_seconds is 0 so histories are reproducible.
    bool record_time = true;
};

/// Where an evaluation sits in a run; copied into the record.
struct EvalContext {
    std::int64_t seed = 0;
    int iteration = 0;
    std::string heuristic_id;
};

inline constexpr const char* kWarnUninformativeUncertainty = "uncertainty uninformative: dropout rate is 0";
inline constexpr const char* kWarnDiverged = "training diverged; penalty objectives recorded";

/// preprocess -> build_and_train -> accuracy -> mc_dropout_uncertainty.
EvaluationRecord evaluate(const Candidate& c, const Dataset& d, const EvalOptions& opts, const EvalContext& ctx);

// --- Synthetic oracle -------------------------------------------------------

inline constexpr double kOracleNoiseSigma = 0.005;

/// Closed-form stand-in for training. Optimum at 6 total blocks, mean log2 width 5,
/// dropout 0.3, adaptive moments and any preprocessing other than None.
ObjectiveVector oracle_evaluate(const Candidate& c, std::int64_t noise_seed, double noise_sigma = kOracleNoiseSigma);

/// Deterministic training-cost proxy (seconds) used as wall time for oracle records.
double oracle_cost_seconds(const Candidate& c);

EvaluationRecord oracle_record(const Candidate& c, const EvalContext& ctx, double noise_sigma = kOracleNoiseSigma);

}  // namespace meeso
