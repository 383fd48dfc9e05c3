#include "meeso/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "meeso/errors.hpp"

namespace meeso {

std::vector<double> objective_values(const EvaluationRecord& r, ObjectiveSet set) {
    if (set == ObjectiveSet::ErrorUncertaintyTime)
        return {r.objectives.error, r.objectives.uncertainty, r.wall_seconds};
    return {r.objectives.error, r.objectives.uncertainty};
}

bool dominates(std::span<const double> h, std::span<const double> k) {
    if (h.size() != k.size())
        throw ContractViolation("dominates: dimensionality mismatch (" + std::to_string(h.size()) + " vs " +
                                std::to_string(k.size()) + ")");
    bool strictly_better = false;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (h[i] > k[i]) return false;
        if (h[i] < k[i]) strictly_better = true;
    }
    return strictly_better;
}

bool dominates(const ObjectiveVector& h, const ObjectiveVector& k) {
    const double a[] = {h.error, h.uncertainty};
    const double b[] = {k.error, k.uncertainty};
    return dominates(std::span<const double>(a), std::span<const double>(b));
}

std::vector<std::size_t> non_dominated_indices(const std::vector<std::vector<double>>& points) {
    if (points.empty()) return {};
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) throw ContractViolation("pareto_front: mixed objective dimensionality");
        for (double v : p)
            if (!std::isfinite(v)) throw ContractViolation("pareto_front: non-finite objective");
    }

    // A dominator always precedes its victim lexicographically, and some non-dominated
    // point dominates every dominated one, so a single sweep against the front so far suffices.
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });

    std::vector<std::size_t> front;
    for (std::size_t idx : order) {
        const bool dominated = std::any_of(front.begin(), front.end(), [&](std::size_t f) {
            return dominates(points[f], points[idx]);
        });
        if (!dominated) front.push_back(idx);
    }
    std::sort(front.begin(), front.end());
    return front;
}

std::vector<EvaluationRecord> pareto_front(std::span<const EvaluationRecord> records, ObjectiveSet set) {
    std::vector<std::vector<double>> points;
    points.reserve(records.size());
    for (const auto& r : records) points.push_back(objective_values(r, set));

    std::vector<EvaluationRecord> out;
    for (std::size_t i : non_dominated_indices(points)) out.push_back(records[i]);
    return out;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<std::vector<double>>& points) {
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<std::size_t> domination_count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(points[i], points[j])) {
                dominated_by[i].push_back(j);
                ++domination_count[j];
            } else if (dominates(points[j], points[i])) {
                dominated_by[j].push_back(i);
                ++domination_count[i];
            }
        }
    }

    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (domination_count[i] == 0) current.push_back(i);
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current)
            for (std::size_t j : dominated_by[i])
                if (--domination_count[j] == 0) next.push_back(j);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

double hypervolume_2d(std::span<const ObjectiveVector> front, const ObjectiveVector& reference) {
    std::vector<ObjectiveVector> pts(front.begin(), front.end());
    for (const auto& p : pts) {
        if (!std::isfinite(p.error) || !std::isfinite(p.uncertainty))
            throw ContractViolation("hypervolume_2d: non-finite point");
        if (p.error > reference.error || p.uncertainty > reference.uncertainty)
            throw ContractViolation("hypervolume_2d: point exceeds reference");
    }
    std::sort(pts.begin(), pts.end(), [](const ObjectiveVector& a, const ObjectiveVector& b) {
        return a.error < b.error || (a.error == b.error && a.uncertainty < b.uncertainty);
    });

    double area = 0.0;
    double ceiling = reference.uncertainty;
    for (const auto& p : pts) {
        if (p.uncertainty >= ceiling) continue;
        area += (reference.error - p.error) * (ceiling - p.uncertainty);
        ceiling = p.uncertainty;
    }
    return area;
}

bool ParetoArchive::insert(const EvaluationRecord& r) {
    const std::size_t index = offered_++;
    const auto candidate = objective_values(r, set_);
    for (const auto& m : members_) {
        const auto existing = objective_values(m.record, set_);
        if (dominates(existing, candidate)) return false;
        if (dedupe_ && existing == candidate) return false;
    }
    std::erase_if(members_, [&](const Member& m) { return dominates(candidate, objective_values(m.record, set_)); });
    members_.push_back({index, r});
    return true;
}

std::vector<EvaluationRecord> ParetoArchive::records() const {
    std::vector<EvaluationRecord> out;
    out.reserve(members_.size());
    for (const auto& m : members_) out.push_back(m.record);
    return out;
}

std::vector<ObjectiveVector> ParetoArchive::objective_vectors() const {
    std::vector<ObjectiveVector> out;
    out.reserve(members_.size());
    for (const auto& m : members_) out.push_back(m.record.objectives);
    return out;
}

std::pair<ParetoArchive, bool> archive_insert(ParetoArchive a, const EvaluationRecord& r) {
    const bool accepted = a.insert(r);
    return {std::move(a), accepted};
}

}  // namespace meeso
