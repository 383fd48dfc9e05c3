#include "meeso/network.hpp"

#include <cmath>

#include "meeso/errors.hpp"

namespace meeso {

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out = logits;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        auto col = out.col(c);
        col.array() -= col.maxCoeff();
        col = col.array().exp().matrix();
        col /= col.sum();
    }
    return out;
}

Network::Network(const ArchitectureSpec& arch, int n_inputs, int n_classes, std::int64_t init_seed)
    : dropout_(arch.dropout_rate), n_inputs_(n_inputs), n_classes_(n_classes) {
    if (n_inputs < 1 || n_classes < 1) throw ContractViolation("Network: empty input or output dimension");
    if (arch.blocks_per_layer.size() != arch.widths_per_layer.size())
        throw ContractViolation("Network: blocks/widths length mismatch");

    std::size_t offset = 0;
    auto add_layer = [&](int in, int out, bool residual) {
        layers_.push_back({in, out, residual, offset, offset + static_cast<std::size_t>(in) * out});
        offset += static_cast<std::size_t>(in) * out + out;
    };

    int width_in = n_inputs;
    for (std::size_t l = 0; l < arch.blocks_per_layer.size(); ++l) {
        const int blocks = arch.blocks_per_layer[l];
        const int width = arch.widths_per_layer[l];
        for (int b = 0; b < blocks; ++b) {
            int w = width;
            if (arch.block_family == BlockFamily::Bottleneck && blocks >= 2 && b < blocks - 1) w = std::max(1, width / 2);
            const bool residual = arch.block_family == BlockFamily::Residual && width_in == w;
            add_layer(width_in, w, residual);
            width_in = w;
        }
    }
    add_layer(width_in, n_classes, false);

    params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(offset));
    auto rng = make_rng(init_seed);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& l = layers_[i];
        const bool head = i + 1 == layers_.size();
        const double scale = std::sqrt((head ? 1.0 : 2.0) / l.inputs);
        std::normal_distribution<double> init(0.0, scale);
        const std::size_t n = static_cast<std::size_t>(l.inputs) * l.outputs;
        for (std::size_t k = 0; k < n; ++k) params_[static_cast<Eigen::Index>(l.weight_offset + k)] = init(rng);
    }
}

Eigen::Map<const Eigen::MatrixXd> Network::weight(const Layer& l) const {
    return {params_.data() + l.weight_offset, l.outputs, l.inputs};
}

Eigen::Map<const Eigen::VectorXd> Network::bias(const Layer& l) const {
    return {params_.data() + l.bias_offset, l.outputs};
}

Eigen::MatrixXd Network::forward(const Eigen::MatrixXd& x, Rng* dropout_rng, Trace* trace) const {
    if (x.rows() != n_inputs_) throw ContractViolation("Network: input has wrong feature count");
    const bool drop = dropout_rng != nullptr && dropout_ > 0.0;
    std::bernoulli_distribution keep(1.0 - dropout_);
    const double keep_scale = drop ? 1.0 / (1.0 - dropout_) : 1.0;

    Eigen::MatrixXd h = x;
    const std::size_t hidden = layers_.size() - 1;
    for (std::size_t i = 0; i < hidden; ++i) {
        const auto& l = layers_[i];
        Eigen::MatrixXd z = (weight(l) * h).colwise() + bias(l);
        Eigen::MatrixXd a = z.cwiseMax(0.0);
        Eigen::MatrixXd mask;
        if (drop) {
            mask.resize(a.rows(), a.cols());
            for (Eigen::Index c = 0; c < mask.cols(); ++c)
                for (Eigen::Index r = 0; r < mask.rows(); ++r) mask(r, c) = keep(*dropout_rng) ? keep_scale : 0.0;
            a.array() *= mask.array();
        }
        if (l.residual) a += h;
        if (trace) {
            trace->inputs.push_back(std::move(h));
            trace->pre_activations.push_back(std::move(z));
            trace->masks.push_back(std::move(mask));
        }
        h = std::move(a);
    }
    const auto& head = layers_.back();
    Eigen::MatrixXd probs = softmax_columns((weight(head) * h).colwise() + bias(head));
    if (trace) trace->inputs.push_back(std::move(h));
    return probs;
}

Eigen::MatrixXd Network::predict_proba(const Eigen::MatrixXd& x) const { return forward(x, nullptr, nullptr); }

Eigen::MatrixXd Network::predict_proba_stochastic(const Eigen::MatrixXd& x, Rng& rng) const {
    return forward(x, &rng, nullptr);
}

namespace {

double cross_entropy(const Eigen::MatrixXd& probs, std::span<const int> labels) {
    double total = 0.0;
    for (Eigen::Index c = 0; c < probs.cols(); ++c)
        total -= std::log(std::max(probs(labels[static_cast<std::size_t>(c)], c), 1e-300));
    return total / static_cast<double>(probs.cols());
}

}  // namespace

double Network::loss(const Eigen::MatrixXd& x, std::span<const int> labels) const {
    return cross_entropy(predict_proba(x), labels);
}

double Network::loss_and_gradient(const Eigen::MatrixXd& x, std::span<const int> labels, Rng* dropout_rng,
                                  Eigen::VectorXd& gradient) const {
    if (static_cast<std::size_t>(x.cols()) != labels.size()) throw ContractViolation("Network: label count mismatch");
    Trace trace;
    const Eigen::MatrixXd probs = forward(x, dropout_rng, &trace);
    const double batch = static_cast<double>(x.cols());

    gradient.setZero(params_.size());
    Eigen::MatrixXd delta = probs;
    for (Eigen::Index c = 0; c < delta.cols(); ++c) delta(labels[static_cast<std::size_t>(c)], c) -= 1.0;
    delta /= batch;

    auto accumulate = [&](const Layer& l, const Eigen::MatrixXd& d, const Eigen::MatrixXd& input) {
        Eigen::Map<Eigen::MatrixXd>(gradient.data() + l.weight_offset, l.outputs, l.inputs) = d * input.transpose();
        Eigen::Map<Eigen::VectorXd>(gradient.data() + l.bias_offset, l.outputs) = d.rowwise().sum();
    };

    const auto& head = layers_.back();
    accumulate(head, delta, trace.inputs.back());
    Eigen::MatrixXd upstream = weight(head).transpose() * delta;

    for (std::size_t i = layers_.size() - 1; i-- > 0;) {
        const auto& l = layers_[i];
        Eigen::MatrixXd d = upstream;
        if (trace.masks[i].size() > 0) d.array() *= trace.masks[i].array();
        d.array() *= (trace.pre_activations[i].array() > 0.0).cast<double>();
        accumulate(l, d, trace.inputs[i]);
        Eigen::MatrixXd below = weight(l).transpose() * d;
        if (l.residual) below += upstream;
        upstream = std::move(below);
    }
    return cross_entropy(probs, labels);
}

}  // namespace meeso
