#include "adagrid/monotone.hpp"

#include <algorithm>

namespace adagrid {

const char* to_string(Certainty c) {
    switch (c) {
        case Certainty::CertainNegative: return "CertainNegative";
        case Certainty::CertainPositive: return "CertainPositive";
        case Certainty::Unknown: return "Unknown";
    }
    return "Unknown";
}

NonMonotoneError::NonMonotoneError(LabeledPoint negative, LabeledPoint positive)
    : Error("non-monotone oracle: negative point " + negative.point.to_string() +
            " dominates positive point " + positive.point.to_string()),
      negative_(std::move(negative)),
      positive_(std::move(positive)) {}

DesignState::DesignState(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw UsageError("design dimension must be positive");
}

void DesignState::require_dimension(const UnitPoint& q) const {
    if (q.dimension() != dimension_) {
        throw UsageError("point " + q.to_string() + " has dimension " +
                         std::to_string(q.dimension()) + ", design has " +
                         std::to_string(dimension_));
    }
}

Certainty DesignState::classify(const UnitPoint& q) const {
    require_dimension(q);
    return classify(q.coords());
}

Certainty DesignState::classify(std::span<const double> q) const {
    bool negative = false;
    for (const auto& y : neg_frontier_) {
        if (leq(q, y.coords())) {
            negative = true;
            break;
        }
    }
    bool positive = false;
    for (const auto& y : pos_frontier_) {
        if (leq(y.coords(), q)) {
            positive = true;
            break;
        }
    }
    if (negative && positive) {
        throw CorruptedStateError("point is both certainly negative and certainly positive; "
                                  "the oracle is not monotone");
    }
    if (negative) return Certainty::CertainNegative;
    if (positive) return Certainty::CertainPositive;
    return Certainty::Unknown;
}

std::size_t DesignState::insert(const LabeledPoint& obs, CandidatePolicy policy) {
    require_dimension(obs.point);
    const auto x = obs.point.coords();

    if (obs.label == Label::Negative) {
        for (const auto& y : pos_frontier_) {
            if (leq(y.coords(), x)) {
                throw NonMonotoneError(obs, LabeledPoint{y, Label::Positive});
            }
        }
        const bool absorbed = std::any_of(neg_frontier_.begin(), neg_frontier_.end(),
                                           [&](const UnitPoint& y) { return leq(x, y.coords()); });
        if (!absorbed) {
            std::erase_if(neg_frontier_, [&](const UnitPoint& y) { return leq(y.coords(), x); });
            neg_frontier_.insert(std::upper_bound(neg_frontier_.begin(), neg_frontier_.end(), obs.point),
                                 obs.point);
        }
        ++n_negative_;
    } else {
        for (const auto& y : neg_frontier_) {
            if (leq(x, y.coords())) {
                throw NonMonotoneError(LabeledPoint{y, Label::Negative}, obs);
            }
        }
        const bool absorbed = std::any_of(pos_frontier_.begin(), pos_frontier_.end(),
                                           [&](const UnitPoint& y) { return leq(y.coords(), x); });
        if (!absorbed) {
            std::erase_if(pos_frontier_, [&](const UnitPoint& y) { return leq(x, y.coords()); });
            pos_frontier_.insert(std::upper_bound(pos_frontier_.begin(), pos_frontier_.end(), obs.point),
                                 obs.point);
        }
    }
    evaluated_.push_back(obs);

    if (policy == CandidatePolicy::Keep) return 0;
    const std::size_t before = candidates_.size();
    if (obs.label == Label::Negative) {
        std::erase_if(candidates_, [&](const UnitPoint& c) { return leq(c.coords(), x); });
    } else {
        std::erase_if(candidates_, [&](const UnitPoint& c) { return leq(x, c.coords()); });
    }
    return before - candidates_.size();
}

void DesignState::set_candidates(std::vector<UnitPoint> candidates) {
    for (const auto& c : candidates) require_dimension(c);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    candidates_ = std::move(candidates);
}

void DesignState::remove_candidate(const UnitPoint& x) {
    auto it = std::lower_bound(candidates_.begin(), candidates_.end(), x);
    if (it != candidates_.end() && *it == x) candidates_.erase(it);
}

Certainty classify_certain(const DesignState& state, const UnitPoint& q) {
    return state.classify(q);
}

DesignState insert_observation(DesignState state, const LabeledPoint& obs) {
    state.insert(obs, CandidatePolicy::Prune);
    return state;
}

std::uint64_t count_comparable_pairs(const std::vector<UnitPoint>& points) {
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (points[i].dimension() != points[j].dimension()) {
                throw UsageError("count_comparable_pairs: mixed dimensions");
            }
            const auto a = points[i].coords();
            const auto b = points[j].coords();
            if (leq(a, b) || leq(b, a)) ++count;
        }
    }
    return count;
}

std::vector<UnitPoint> maximal_elements(const std::vector<UnitPoint>& points) {
    std::vector<UnitPoint> sorted = points;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<UnitPoint> out;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        bool dominated = false;
        // Anything dominating sorted[i] is lexicographically larger.
        for (std::size_t j = i + 1; j < sorted.size() && !dominated; ++j) {
            dominated = leq(sorted[i].coords(), sorted[j].coords());
        }
        if (!dominated) out.push_back(sorted[i]);
    }
    return out;
}

std::vector<UnitPoint> minimal_elements(const std::vector<UnitPoint>& points) {
    std::vector<UnitPoint> sorted = points;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<UnitPoint> out;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < i && !dominated; ++j) {
            dominated = leq(sorted[j].coords(), sorted[i].coords());
        }
        if (!dominated) out.push_back(sorted[i]);
    }
    return out;
}

}  // namespace adagrid
