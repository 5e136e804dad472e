#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adagrid {

// ============================================================================
// Errors
// ============================================================================

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller broke a precondition (bad dimension, invalid run count, ...).
class UsageError : public Error {
public:
    using Error::Error;
};

/// A query hit a point outside the lawful domain of a mapping or table.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Internal state no longer satisfies its invariants.
class CorruptedStateError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// ============================================================================
// Points and labels
// ============================================================================

/// Coordinates in the closed unit cube [0,1]^p.
class UnitPoint {
public:
    UnitPoint() = default;
    explicit UnitPoint(std::vector<double> coords);
    UnitPoint(std::initializer_list<double> coords);

    std::size_t dimension() const { return coords_.size(); }
    double operator[](std::size_t k) const { return coords_[k]; }
    std::span<const double> coords() const { return coords_; }
    const std::vector<double>& vec() const { return coords_; }

    /// x -> 1 - x in every coordinate.
    UnitPoint reflected() const;

    std::string to_string() const;

    friend bool operator==(const UnitPoint&, const UnitPoint&) = default;
    friend auto operator<=>(const UnitPoint& a, const UnitPoint& b) {
        return a.coords_ <=> b.coords_;
    }

private:
    std::vector<double> coords_;
};

enum class Label : int { Negative = -1, Positive = 1 };

/// Accepts exactly -1 or +1.
Label label_from_int(long long v);
inline int to_int(Label l) { return static_cast<int>(l); }
inline Label opposite(Label l) { return l == Label::Negative ? Label::Positive : Label::Negative; }

struct LabeledPoint {
    UnitPoint point;
    Label label = Label::Negative;

    friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

/// Componentwise a <= b. Throws UsageError on dimension mismatch.
bool dominates_leq(const UnitPoint& a, const UnitPoint& b);

/// Unchecked componentwise a <= b for equal-length spans.
inline bool leq(std::span<const double> a, std::span<const double> b) {
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] > b[k]) return false;
    }
    return true;
}

}  // namespace adagrid
