#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "meeso/rng.hpp"
#include "meeso/types.hpp"

namespace meeso {

/// Fully-connected classifier grown from an ArchitectureSpec.
///
/// Each layer l contributes blocks_per_layer[l] rectified sub-layers of width
/// widths_per_layer[l], each followed by inverted dropout. Residual adds an
/// identity skip around every sub-layer whose input already has its width.
/// Bottleneck halves every sub-layer of a layer except its last. A linear
/// softmax head maps to the classes.
///
/// All parameters live in one flat vector; inputs are column-major batches
/// (one sample per column).
class Network {
public:
    struct Layer {
        int inputs;
        int outputs;
        bool residual;
        std::size_t weight_offset;  ///< outputs x inputs, column-major
        std::size_t bias_offset;
    };

    Network(const ArchitectureSpec& arch, int n_inputs, int n_classes, std::int64_t init_seed);

    /// Class probabilities (classes x batch), dropout disabled.
    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const;
    /// Class probabilities with a fresh dropout mask drawn from `rng`.
    Eigen::MatrixXd predict_proba_stochastic(const Eigen::MatrixXd& x, Rng& rng) const;

    /// Mean cross-entropy; fills `gradient` (same layout as parameters()).
    /// Dropout is applied iff `dropout_rng` is non-null.
    double loss_and_gradient(const Eigen::MatrixXd& x, std::span<const int> labels, Rng* dropout_rng,
                             Eigen::VectorXd& gradient) const;
    double loss(const Eigen::MatrixXd& x, std::span<const int> labels) const;

    Eigen::VectorXd& parameters() noexcept { return params_; }
    const Eigen::VectorXd& parameters() const noexcept { return params_; }
    std::size_t parameter_count() const noexcept { return static_cast<std::size_t>(params_.size()); }

    /// Hidden sub-layers followed by the output head.
    const std::vector<Layer>& layers() const noexcept { return layers_; }
    double dropout_rate() const noexcept { return dropout_; }
    int n_inputs() const noexcept { return n_inputs_; }
    int n_classes() const noexcept { return n_classes_; }

private:
    struct Trace {
        std::vector<Eigen::MatrixXd> inputs;
        std::vector<Eigen::MatrixXd> pre_activations;
        std::vector<Eigen::MatrixXd> masks;  ///< empty matrix when dropout is off
        Eigen::MatrixXd probabilities;
    };

    Eigen::Map<const Eigen::MatrixXd> weight(const Layer& l) const;
    Eigen::Map<const Eigen::VectorXd> bias(const Layer& l) const;
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Rng* dropout_rng, Trace* trace) const;

    std::vector<Layer> layers_;
    Eigen::VectorXd params_;
    double dropout_ = 0.0;
    int n_inputs_ = 0;
    int n_classes_ = 0;
};

/// Column-wise numerically stable softmax.
Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits);

}  // namespace meeso
