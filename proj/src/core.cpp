#include "adagrid/core.hpp"

#include <cmath>
#include <sstream>

namespace adagrid {

namespace {

void validate_coords(const std::vector<double>& coords) {
    if (coords.empty()) {
        throw UsageError("unit point must have dimension >= 1");
    }
    for (std::size_t k = 0; k < coords.size(); ++k) {
        const double c = coords[k];
        if (!(c >= 0.0 && c <= 1.0)) {
            std::ostringstream os;
            os << "coordinate " << k << " = " << c << " lies outside [0,1]";
            throw UsageError(os.str());
        }
    }
}

}  // namespace

UnitPoint::UnitPoint(std::vector<double> coords) : coords_(std::move(coords)) {
    validate_coords(coords_);
}

UnitPoint::UnitPoint(std::initializer_list<double> coords) : coords_(coords) {
    validate_coords(coords_);
}

UnitPoint UnitPoint::reflected() const {
    std::vector<double> r(coords_.size());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = 1.0 - coords_[k];
    return UnitPoint(std::move(r));
}

std::string UnitPoint::to_string() const {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t k = 0; k < coords_.size(); ++k) {
        if (k) os << ", ";
        os << coords_[k];
    }
    os << ')';
    return os.str();
}

Label label_from_int(long long v) {
    if (v == -1) return Label::Negative;
    if (v == 1) return Label::Positive;
    throw UsageError("label must be -1 or 1, got " + std::to_string(v));
}

bool dominates_leq(const UnitPoint& a, const UnitPoint& b) {
    if (a.dimension() != b.dimension()) {
        throw UsageError("dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                         std::to_string(b.dimension()));
    }
    return leq(a.coords(), b.coords());
}

}  // namespace adagrid
