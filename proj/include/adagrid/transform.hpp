#pragma once

#include "adagrid/core.hpp"

#include "json.hpp"

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace adagrid {

/// physical = scale * u + offset, scale > 0.
struct AffineMap {
    double scale = 1.0;
    double offset = 0.0;
};

/// Breakpoints (unit value, physical value), strictly increasing in both.
/// A discrete table is defined only at its breakpoints; a continuous one
/// interpolates linearly between them.
struct PiecewiseMap {
    std::vector<std::pair<double, double>> breakpoints;
    bool discrete = true;
};

enum class Direction { Increasing, Decreasing };

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Mapping for one input. A Decreasing dimension flips u -> 1 - u before the
/// map is applied, so the wrapped oracle is non-decreasing in unit space.
struct DimensionTransform {
    std::string name;
    std::string units;
    std::variant<AffineMap, PiecewiseMap> map;
    Direction direction = Direction::Increasing;
    Interval bounds;
};

struct Transform {
    std::vector<DimensionTransform> dims;

    std::size_t dimension() const { return dims.size(); }
};

/// Checks injectivity, ordering and bounds. Throws UsageError.
void validate(const Transform& t);

/// Unit-cube point to physical coordinates.
std::vector<double> apply_transform(const Transform& t, const UnitPoint& x);
double apply_dimension(const DimensionTransform& d, double u);

/// Physical coordinates back to the unit cube (discrete tables match
/// breakpoints within tol).
UnitPoint inverse_transform(const Transform& t, const std::vector<double>& physical, double tol = 1e-9);
double inverse_dimension(const DimensionTransform& d, double physical, double tol = 1e-9);

/// Unit values at which a discrete dimension is defined; empty otherwise.
std::vector<double> lawful_values(const DimensionTransform& d);

/// Identity transform on [0,1]^p.
Transform identity_transform(std::size_t p);

// Mappings used in the worked applications.

/// Ice breaking: velocity 5..40 m/s (+), thickness 5..15 mm (-), modulus 1..5 GPa (-).
Transform ice_breaking_transform();

/// Road crash tables for the full-grid family: glance 0..6.6 s on the
/// {0, 1/128, k/64, 127/128, 1} lattice, deceleration -10.3..-3.3 on {0, k/16, 1}.
Transform crash_grid_transform();

/// Road crash tables for the inner-grid family.
Transform crash_inner_transform();

nlohmann::json to_json(const Transform& t);
Transform transform_from_json(const nlohmann::json& j);

}  // namespace adagrid
