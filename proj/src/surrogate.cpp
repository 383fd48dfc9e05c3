#include "meeso/surrogate.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "meeso/errors.hpp"

namespace meeso {

std::string_view to_string(ObjectiveId v) { return v == ObjectiveId::Error ? "error" : "uncertainty"; }

double objective_of(const EvaluationRecord& r, ObjectiveId id) {
    return id == ObjectiveId::Error ? r.objectives.error : r.objectives.uncertainty;
}

std::vector<GroupedSample> assign_groups(std::span<const EvaluationRecord> records, int n_groups,
                                         ObjectiveId objective) {
    if (n_groups < 1) throw ContractViolation("assign_groups: n_groups must be positive");
    if (records.size() < static_cast<std::size_t>(n_groups))
        throw InsufficientHistory("assign_groups: " + std::to_string(records.size()) + " records for " +
                                  std::to_string(n_groups) + " groups");

    const std::size_t n = records.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return objective_of(records[a], objective) < objective_of(records[b], objective);
    });

    const std::size_t groups = static_cast<std::size_t>(n_groups);
    const std::size_t base = n / groups;
    const std::size_t extra = n % groups;

    std::vector<GroupedSample> out(n);
    std::size_t pos = 0;
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t size = base + (g < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i, ++pos) {
            const std::size_t idx = order[pos];
            out[idx] = {encode(records[idx].candidate), static_cast<int>(g)};
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

Split best_split(std::span<const FeatureVector> x, std::span<const double> target,
                 const std::vector<std::size_t>& samples, int min_leaf) {
    Split best;
    const std::size_t n = samples.size();
    if (n < static_cast<std::size_t>(2 * min_leaf)) return best;

    double total = 0.0;
    for (std::size_t s : samples) total += target[s];
    const double parent_score = total * total / static_cast<double>(n);

    std::vector<std::size_t> sorted = samples;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
        double left_sum = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_sum += target[sorted[i]];
            const double here = x[sorted[i]][f];
            const double next = x[sorted[i + 1]][f];
            if (here == next) continue;
            const std::size_t n_left = i + 1;
            const std::size_t n_right = n - n_left;
            if (n_left < static_cast<std::size_t>(min_leaf) || n_right < static_cast<std::size_t>(min_leaf)) continue;
            const double right_sum = total - left_sum;
            const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                                right_sum * right_sum / static_cast<double>(n_right) - parent_score;
            if (gain > best.gain + 1e-12) best = {static_cast<int>(f), 0.5 * (here + next), gain};
        }
    }
    return best;
}

}  // namespace

RegressionTree RegressionTree::fit(std::span<const FeatureVector> x, std::span<const double> target, int max_depth,
                                   int min_samples_leaf) {
    RegressionTree tree;
    struct Pending {
        int node;
        int depth;
        std::vector<std::size_t> samples;
    };
    std::vector<std::size_t> all(x.size());
    std::iota(all.begin(), all.end(), std::size_t{0});

    tree.nodes_.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({0, 0, std::move(all)});
    while (!stack.empty()) {
        Pending job = std::move(stack.back());
        stack.pop_back();

        double sum = 0.0;
        for (std::size_t s : job.samples) sum += target[s];
        tree.nodes_[job.node].value = job.samples.empty() ? 0.0 : sum / static_cast<double>(job.samples.size());
        if (job.depth >= max_depth) continue;

        const Split split = best_split(x, target, job.samples, min_samples_leaf);
        if (split.feature < 0) continue;

        std::vector<std::size_t> left, right;
        for (std::size_t s : job.samples) (x[s][split.feature] <= split.threshold ? left : right).push_back(s);

        const int left_id = static_cast<int>(tree.nodes_.size());
        tree.nodes_.emplace_back();
        const int right_id = static_cast<int>(tree.nodes_.size());
        tree.nodes_.emplace_back();
        auto& node = tree.nodes_[job.node];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left_id;
        node.right = right_id;
        stack.push_back({right_id, job.depth + 1, std::move(right)});
        stack.push_back({left_id, job.depth + 1, std::move(left)});
    }
    return tree;
}

double RegressionTree::predict(const FeatureVector& f) const {
    int id = 0;
    while (nodes_[id].feature >= 0) id = f[nodes_[id].feature] <= nodes_[id].threshold ? nodes_[id].left : nodes_[id].right;
    return nodes_[id].value;
}

BoostedTrees BoostedTrees::fit(std::span<const FeatureVector> x, std::span<const double> target,
                               const BoostingParams& p) {
    BoostedTrees m;
    m.learning_rate_ = p.learning_rate;
    if (x.empty()) return m;
    m.base_ = std::accumulate(target.begin(), target.end(), 0.0) / static_cast<double>(target.size());

    std::vector<double> prediction(x.size(), m.base_);
    std::vector<double> residual(x.size());
    for (int t = 0; t < p.n_trees; ++t) {
        double sse = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            residual[i] = target[i] - prediction[i];
            sse += residual[i] * residual[i];
        }
        if (sse < 1e-18) break;
        auto tree = RegressionTree::fit(x, residual, p.max_depth, p.min_samples_leaf);
        for (std::size_t i = 0; i < x.size(); ++i) prediction[i] += p.learning_rate * tree.predict(x[i]);
        m.trees_.push_back(std::move(tree));
    }
    return m;
}

double BoostedTrees::predict(const FeatureVector& f) const {
    double out = base_;
    for (const auto& t : trees_) out += learning_rate_ * t.predict(f);
    return out;
}

// ---------------------------------------------------------------------------

std::size_t minimum_training_size(int n_groups) {
    return std::max<std::size_t>(2 * static_cast<std::size_t>(std::max(n_groups, 1)), 10);
}

RankModel RankModel::train(std::span<const EvaluationRecord> records, int n_groups, ObjectiveId objective,
                           const BoostingParams& params) {
    if (n_groups < 1) throw ContractViolation("train: n_groups must be positive");
    if (records.size() < minimum_training_size(n_groups))
        throw InsufficientHistory("train: need at least " + std::to_string(minimum_training_size(n_groups)) +
                                  " records, have " + std::to_string(records.size()));

    RankModel m;
    m.trained_ = true;
    m.objective_ = objective;
    m.n_groups_ = n_groups;
    m.training_size_ = records.size();

    const double first = objective_of(records.front(), objective);
    const bool constant = std::all_of(records.begin(), records.end(),
                                      [&](const EvaluationRecord& r) { return objective_of(r, objective) == first; });
    if (constant) {
        m.degenerate_ = true;
        return m;  // empty ensemble predicts 0
    }

    const auto samples = assign_groups(records, n_groups, objective);
    std::vector<FeatureVector> x;
    std::vector<double> y;
    x.reserve(samples.size());
    y.reserve(samples.size());
    for (const auto& s : samples) {
        x.push_back(s.features);
        y.push_back(static_cast<double>(s.label));
    }
    m.ensemble_ = BoostedTrees::fit(x, y, params);
    return m;
}

double RankModel::predict_group(const FeatureVector& f) const {
    if (!trained_) throw ContractViolation("predict_group: model is not trained");
    return ensemble_.predict(f);
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const RegressionTree& t) {
    j = nlohmann::json::array();
    for (const auto& n : t.nodes_) j.push_back({n.feature, n.threshold, n.left, n.right, n.value});
}

void from_json(const nlohmann::json& j, RegressionTree& t) {
    t.nodes_.clear();
    for (const auto& n : j)
        t.nodes_.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                            n.at(4).get<double>()});
}

void to_json(nlohmann::json& j, const BoostedTrees& m) {
    j = {{"base", m.base_}, {"learning_rate", m.learning_rate_}, {"trees", m.trees_}};
}

void from_json(const nlohmann::json& j, BoostedTrees& m) {
    j.at("base").get_to(m.base_);
    j.at("learning_rate").get_to(m.learning_rate_);
    j.at("trees").get_to(m.trees_);
}

void to_json(nlohmann::json& j, const RankModel& m) {
    j = {{"objective_id", std::string(to_string(m.objective_))},
         {"n_groups", m.n_groups_},
         {"training_size", m.training_size_},
         {"trained", m.trained_},
         {"degenerate", m.degenerate_},
         {"model_state", m.ensemble_}};
}

void from_json(const nlohmann::json& j, RankModel& m) {
    const auto id = j.at("objective_id").get<std::string>();
    if (id != "error" && id != "uncertainty") throw ContractViolation("unknown objective_id '" + id + "'");
    m.objective_ = id == "error" ? ObjectiveId::Error : ObjectiveId::Uncertainty;
    j.at("n_groups").get_to(m.n_groups_);
    j.at("training_size").get_to(m.training_size_);
    j.at("trained").get_to(m.trained_);
    j.at("degenerate").get_to(m.degenerate_);
    j.at("model_state").get_to(m.ensemble_);
}

}  // namespace meeso
