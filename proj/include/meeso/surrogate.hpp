#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "meeso/search_space.hpp"
#include "meeso/types.hpp"

namespace meeso {

enum class ObjectiveId { Error, Uncertainty };

std::string_view to_string(ObjectiveId v);
double objective_of(const EvaluationRecord& r, ObjectiveId id);

struct GroupedSample {
    FeatureVector features;
    int label;  ///< 0 = best group
};

/// Sorts by the objective (stable: ties keep history order) and cuts the sorted
/// list into `n_groups` contiguous buckets whose sizes differ by at most one,
/// larger buckets first. Output is in input order.
/// Throws InsufficientHistory when records.size() < n_groups.
std::vector<GroupedSample> assign_groups(std::span<const EvaluationRecord> records, int n_groups, ObjectiveId objective);

/// Least-squares boosted regression trees over feature vectors.
struct BoostingParams {
    int max_depth = 3;
    int n_trees = 100;
    double learning_rate = 0.1;
    int min_samples_leaf = 2;
};

class RegressionTree {
public:
    struct Node {
        int feature = -1;  ///< -1 for a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };

    static RegressionTree fit(std::span<const FeatureVector> x, std::span<const double> target, int max_depth,
                              int min_samples_leaf);
    double predict(const FeatureVector& f) const;
    const std::vector<Node>& nodes() const noexcept { return nodes_; }

    friend void to_json(nlohmann::json& j, const RegressionTree& t);
    friend void from_json(const nlohmann::json& j, RegressionTree& t);

private:
    std::vector<Node> nodes_;
};

class BoostedTrees {
public:
    static BoostedTrees fit(std::span<const FeatureVector> x, std::span<const double> target, const BoostingParams& p);
    double predict(const FeatureVector& f) const;
    std::size_t tree_count() const noexcept { return trees_.size(); }

    friend void to_json(nlohmann::json& j, const BoostedTrees& m);
    friend void from_json(const nlohmann::json& j, BoostedTrees& m);

private:
    double base_ = 0.0;
    double learning_rate_ = 0.1;
    std::vector<RegressionTree> trees_;
};

/// Per-objective learn-to-rank surrogate predicting a fractional rank group.
class RankModel {
public:
    RankModel() = default;

    /// Requires records.size() >= max(2 * n_groups, 10). An objective that is
    /// constant over the history yields a constant model predicting group 0 with
    /// the degenerate flag set.
    static RankModel train(std::span<const EvaluationRecord> records, int n_groups, ObjectiveId objective,
                           const BoostingParams& params = {});

    /// Lower is better. Throws ContractViolation when the model is untrained.
    double predict_group(const FeatureVector& f) const;

    bool trained() const noexcept { return trained_; }
    bool degenerate() const noexcept { return degenerate_; }
    ObjectiveId objective() const noexcept { return objective_; }
    int n_groups() const noexcept { return n_groups_; }
    std::size_t training_size() const noexcept { return training_size_; }

    friend void to_json(nlohmann::json& j, const RankModel& m);
    friend void from_json(const nlohmann::json& j, RankModel& m);

private:
    bool trained_ = false;
    bool degenerate_ = false;
    ObjectiveId objective_ = ObjectiveId::Error;
    int n_groups_ = 1;
    std::size_t training_size_ = 0;
    BoostedTrees ensemble_;
};

std::size_t minimum_training_size(int n_groups);

}  // namespace meeso
