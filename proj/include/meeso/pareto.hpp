#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "meeso/types.hpp"

namespace meeso {

/// Which record fields take part in dominance.
enum class ObjectiveSet {
    ErrorUncertainty,         ///< (error, uncertainty)
    ErrorUncertaintyTime,     ///< (error, uncertainty, wall_seconds)
};

std::vector<double> objective_values(const EvaluationRecord& r, ObjectiveSet set = ObjectiveSet::ErrorUncertainty);

/// h dominates k iff h is no worse in every component and strictly better in one.
/// Exact float comparison; throws ContractViolation on dimensionality mismatch.
bool dominates(std::span<const double> h, std::span<const double> k);
bool dominates(const ObjectiveVector& h, const ObjectiveVector& k);

/// Indices (ascending) of the non-dominated points. Objective-equal points are all kept.
std::vector<std::size_t> non_dominated_indices(const std::vector<std::vector<double>>& points);

/// Records whose objectives are non-dominated within `records`, in input order.
std::vector<EvaluationRecord> pareto_front(std::span<const EvaluationRecord> records,
                                           ObjectiveSet set = ObjectiveSet::ErrorUncertainty);

/// Fronts F0, F1, ... of a non-dominated sort; each front lists indices ascending.
std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<std::vector<double>>& points);

/// Area dominated by `front` and bounded by `reference`. Dominated members of
/// `front` contribute nothing. Throws ContractViolation if a point exceeds the reference.
double hypervolume_2d(std::span<const ObjectiveVector> front, const ObjectiveVector& reference);

/// Unbounded non-dominated archive (the trade-off set P).
class ParetoArchive {
public:
    struct Member {
        std::size_t insertion_index;
        EvaluationRecord record;
    };

    explicit ParetoArchive(ObjectiveSet set = ObjectiveSet::ErrorUncertainty, bool dedupe = false)
        : set_(set), dedupe_(dedupe) {}

    /// Offers a record. Returns false (archive unchanged) when some member dominates it,
    /// or equals it in objective space while dedupe is on. Otherwise adds it and evicts
    /// every member it dominates.
    bool insert(const EvaluationRecord& r);

    const std::vector<Member>& members() const noexcept { return members_; }
    std::vector<EvaluationRecord> records() const;
    std::vector<ObjectiveVector> objective_vectors() const;
    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    std::size_t offered() const noexcept { return offered_; }
    ObjectiveSet objective_set() const noexcept { return set_; }
    bool dedupe() const noexcept { return dedupe_; }

private:
    ObjectiveSet set_;
    bool dedupe_;
    std::size_t offered_ = 0;
    std::vector<Member> members_;
};

/// Functional form of ParetoArchive::insert.
std::pair<ParetoArchive, bool> archive_insert(ParetoArchive a, const EvaluationRecord& r);

}  // namespace meeso
