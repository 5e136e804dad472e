#pragma once

#include "adagrid/core.hpp"

#include <cstdint>
#include <vector>

namespace adagrid {

enum class Certainty { CertainNegative, CertainPositive, Unknown };

const char* to_string(Certainty c);

/// Raised when an observation contradicts monotonicity. Carries both witnesses:
/// a negative point that dominates (componentwise >=) a positive point.
class NonMonotoneError : public Error {
public:
    NonMonotoneError(LabeledPoint negative, LabeledPoint positive);

    const LabeledPoint& negative_witness() const { return negative_; }
    const LabeledPoint& positive_witness() const { return positive_; }

private:
    LabeledPoint negative_;
    LabeledPoint positive_;
};

/// What insert() does with the candidate pool.
enum class CandidatePolicy {
    Prune,  // drop every candidate that became certain (fully adaptive)
    Keep,   // leave the pool untouched (grouped designs prune only on regeneration)
};

/// Evaluated points plus the two dominance frontiers that summarize them.
///
/// neg_frontier holds the maximal negative points, pos_frontier the minimal
/// positive points. Both are kept sorted lexicographically so that equal
/// observation multisets produce identical states regardless of order.
class DesignState {
public:
    explicit DesignState(std::size_t dimension);

    std::size_t dimension() const { return dimension_; }
    const std::vector<LabeledPoint>& evaluated() const { return evaluated_; }
    const std::vector<UnitPoint>& neg_frontier() const { return neg_frontier_; }
    const std::vector<UnitPoint>& pos_frontier() const { return pos_frontier_; }
    const std::vector<UnitPoint>& candidates() const { return candidates_; }
    std::uint32_t level() const { return level_; }

    std::size_t negative_count() const { return n_negative_; }
    std::size_t positive_count() const { return evaluated_.size() - n_negative_; }

    Certainty classify(const UnitPoint& q) const;
    /// Hot-path variant; q must already have the state's dimension.
    Certainty classify(std::span<const double> q) const;

    /// Appends the observation and updates the matching frontier.
    /// Returns the number of candidates removed (Prune policy only).
    /// Throws NonMonotoneError without modifying the state on a violation.
    std::size_t insert(const LabeledPoint& obs, CandidatePolicy policy = CandidatePolicy::Prune);

    void set_level(std::uint32_t level) { level_ = level; }
    /// Replaces the candidate pool; points are sorted and deduplicated.
    void set_candidates(std::vector<UnitPoint> candidates);
    void remove_candidate(const UnitPoint& x);
    void clear_candidates() { candidates_.clear(); }

    friend bool operator==(const DesignState&, const DesignState&) = default;

private:
    void require_dimension(const UnitPoint& q) const;

    std::size_t dimension_;
    std::vector<LabeledPoint> evaluated_;
    std::vector<UnitPoint> neg_frontier_;
    std::vector<UnitPoint> pos_frontier_;
    std::vector<UnitPoint> candidates_;
    std::uint32_t level_ = 0;
    std::size_t n_negative_ = 0;
};

/// Free-function forms of the state queries.
Certainty classify_certain(const DesignState& state, const UnitPoint& q);
DesignState insert_observation(DesignState state, const LabeledPoint& obs);

/// Unordered pairs {x, y} with x <= y or y <= x componentwise.
std::uint64_t count_comparable_pairs(const std::vector<UnitPoint>& points);

/// Maximal elements (no other element dominates them) under componentwise <=.
/// Duplicates collapse to one representative. Output sorted lexicographically.
std::vector<UnitPoint> maximal_elements(const std::vector<UnitPoint>& points);
/// Minimal elements, dual of maximal_elements.
std::vector<UnitPoint> minimal_elements(const std::vector<UnitPoint>& points);

}  // namespace adagrid
