#include "adagrid/transform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace adagrid {

namespace {

constexpr double kBoundsSlack = 1e-9;

std::string list_values(const std::vector<double>& values) {
    std::ostringstream os;
    os.precision(10);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) os << ", ";
        os << values[i];
    }
    return os.str();
}

double map_forward(const AffineMap& m, double u) { return m.scale * u + m.offset; }

double map_forward(const PiecewiseMap& m, double u, const std::string& name) {
    const auto& bp = m.breakpoints;
    if (m.discrete) {
        for (const auto& [unit, phys] : bp) {
            if (std::abs(unit - u) <= 1e-12) return phys;
        }
        std::vector<double> lawful;
        for (const auto& b : bp) lawful.push_back(b.first);
        std::ostringstream os;
        os.precision(17);
        os << "unit value " << u << " is not lawful for dimension '" << name
           << "'; lawful values: " << list_values(lawful);
        throw DomainError(os.str());
    }
    if (u < bp.front().first - 1e-12 || u > bp.back().first + 1e-12) {
        std::ostringstream os;
        os << "unit value " << u << " lies outside the table range of dimension '" << name << "'";
        throw DomainError(os.str());
    }
    auto hi = std::lower_bound(bp.begin(), bp.end(), u,
                               [](const auto& b, double v) { return b.first < v; });
    if (hi == bp.end()) return bp.back().second;
    if (hi == bp.begin() || hi->first == u) return hi->second;
    auto lo = hi - 1;
    const double w = (u - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
}

double map_inverse(const AffineMap& m, double y) { return (y - m.offset) / m.scale; }

double map_inverse(const PiecewiseMap& m, double y, double tol, const std::string& name) {
    const auto& bp = m.breakpoints;
    if (m.discrete) {
        for (const auto& [unit, phys] : bp) {
            if (std::abs(phys - y) <= tol) return unit;
        }
        std::vector<double> lawful;
        for (const auto& b : bp) lawful.push_back(b.second);
        std::ostringstream os;
        os.precision(10);
        os << "physical value " << y << " is not a level of dimension '" << name
           << "'; levels: " << list_values(lawful);
        throw DomainError(os.str());
    }
    if (y < bp.front().second - tol || y > bp.back().second + tol) {
        std::ostringstream os;
        os << "physical value " << y << " lies outside the table range of dimension '" << name << "'";
        throw DomainError(os.str());
    }
    auto hi = std::lower_bound(bp.begin(), bp.end(), y,
                               [](const auto& b, double v) { return b.second < v; });
    if (hi == bp.end()) return bp.back().first;
    if (hi == bp.begin() || hi->second == y) return hi->first;
    auto lo = hi - 1;
    const double w = (y - lo->second) / (hi->second - lo->second);
    return lo->first + w * (hi->first - lo->first);
}

double clamp_unit(double u) { return std::min(1.0, std::max(0.0, u)); }

}  // namespace

void validate(const Transform& t) {
    if (t.dims.empty()) throw UsageError("transform must have at least one dimension");
    for (const auto& d : t.dims) {
        if (!(d.bounds.lo <= d.bounds.hi)) {
            throw UsageError("dimension '" + d.name + "': empty physical bounds");
        }
        double lo_img = 0.0, hi_img = 0.0;
        if (const auto* a = std::get_if<AffineMap>(&d.map)) {
            if (!(a->scale > 0.0) || !std::isfinite(a->scale) || !std::isfinite(a->offset)) {
                throw UsageError("dimension '" + d.name +
                                 "': affine scale must be positive and finite (use direction for decreasing inputs)");
            }
            lo_img = map_forward(*a, 0.0);
            hi_img = map_forward(*a, 1.0);
        } else {
            const auto& pw = std::get<PiecewiseMap>(d.map);
            if (pw.breakpoints.empty()) throw UsageError("dimension '" + d.name + "': no breakpoints");
            for (std::size_t i = 0; i < pw.breakpoints.size(); ++i) {
                const auto& [u, y] = pw.breakpoints[i];
                if (!(u >= 0.0 && u <= 1.0)) {
                    throw UsageError("dimension '" + d.name + "': breakpoint unit value outside [0,1]");
                }
                if (i > 0 && !(u > pw.breakpoints[i - 1].first && y > pw.breakpoints[i - 1].second)) {
                    throw UsageError("dimension '" + d.name + "': breakpoints must be strictly increasing");
                }
            }
            if (!pw.discrete && pw.breakpoints.size() < 2) {
                throw UsageError("dimension '" + d.name + "': continuous table needs two breakpoints");
            }
            lo_img = pw.breakpoints.front().second;
            hi_img = pw.breakpoints.back().second;
        }
        if (lo_img < d.bounds.lo - kBoundsSlack || hi_img > d.bounds.hi + kBoundsSlack) {
            throw UsageError("dimension '" + d.name + "': mapped range exceeds physical bounds");
        }
    }
}

double apply_dimension(const DimensionTransform& d, double u) {
    const double v = d.direction == Direction::Decreasing ? 1.0 - u : u;
    if (const auto* a = std::get_if<AffineMap>(&d.map)) return map_forward(*a, v);
    return map_forward(std::get<PiecewiseMap>(d.map), v, d.name);
}

std::vector<double> apply_transform(const Transform& t, const UnitPoint& x) {
    if (x.dimension() != t.dimension()) {
        throw UsageError("transform has dimension " + std::to_string(t.dimension()) + ", point has " +
                         std::to_string(x.dimension()));
    }
    std::vector<double> out(x.dimension());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = apply_dimension(t.dims[k], x[k]);
    return out;
}

double inverse_dimension(const DimensionTransform& d, double physical, double tol) {
    double v;
    if (const auto* a = std::get_if<AffineMap>(&d.map)) {
        v = map_inverse(*a, physical);
        if (v < -tol || v > 1.0 + tol) {
            std::ostringstream os;
            os << "physical value " << physical << " lies outside the range of dimension '" << d.name << "'";
            throw DomainError(os.str());
        }
        v = clamp_unit(v);
    } else {
        v = map_inverse(std::get<PiecewiseMap>(d.map), physical, tol, d.name);
    }
    return d.direction == Direction::Decreasing ? 1.0 - v : v;
}

UnitPoint inverse_transform(const Transform& t, const std::vector<double>& physical, double tol) {
    if (physical.size() != t.dimension()) {
        throw UsageError("transform has dimension " + std::to_string(t.dimension()) + ", input has " +
                         std::to_string(physical.size()));
    }
    std::vector<double> u(physical.size());
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = inverse_dimension(t.dims[k], physical[k], tol);
    return UnitPoint(std::move(u));
}

std::vector<double> lawful_values(const DimensionTransform& d) {
    const auto* pw = std::get_if<PiecewiseMap>(&d.map);
    if (!pw || !pw->discrete) return {};
    std::vector<double> out;
    for (const auto& b : pw->breakpoints) {
        out.push_back(d.direction == Direction::Decreasing ? 1.0 - b.first : b.first);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Transform identity_transform(std::size_t p) {
    Transform t;
    for (std::size_t k = 0; k < p; ++k) {
        t.dims.push_back({"x" + std::to_string(k + 1), "", AffineMap{1.0, 0.0}, Direction::Increasing, {0.0, 1.0}});
    }
    return t;
}

Transform ice_breaking_transform() {
    Transform t;
    t.dims.push_back({"velocity", "m/s", AffineMap{35.0, 5.0}, Direction::Increasing, {5.0, 40.0}});
    t.dims.push_back({"thickness", "mm", AffineMap{10.0, 5.0}, Direction::Decreasing, {5.0, 15.0}});
    t.dims.push_back({"elastic_modulus", "GPa", AffineMap{4.0, 1.0}, Direction::Decreasing, {1.0, 5.0}});
    return t;
}

namespace {

// Glance levels 0.0, 0.1, ..., 6.6 s placed on dyadic unit values.
PiecewiseMap glance_map(double first_unit, double last_unit) {
    PiecewiseMap m;
    m.discrete = true;
    m.breakpoints.emplace_back(first_unit, 0.0);
    m.breakpoints.emplace_back(1.0 / 128.0, 0.1);
    for (int k = 1; k <= 63; ++k) {
        m.breakpoints.emplace_back(k / 64.0, (k + 1) / 10.0);
    }
    m.breakpoints.emplace_back(127.0 / 128.0, 6.5);
    m.breakpoints.emplace_back(last_unit, 6.6);
    return m;
}

}  // namespace

Transform crash_grid_transform() {
    Transform t;
    t.dims.push_back({"glance_duration", "s", glance_map(0.0, 1.0), Direction::Increasing, {0.0, 6.6}});
    PiecewiseMap decel;
    decel.breakpoints.emplace_back(0.0, -10.3);
    for (int k = 2; k <= 14; ++k) decel.breakpoints.emplace_back(k / 16.0, k / 2.0 - 10.8);
    decel.breakpoints.emplace_back(1.0, -3.3);
    t.dims.push_back({"deceleration", "m/s^2", decel, Direction::Increasing, {-10.3, -3.3}});
    return t;
}

Transform crash_inner_transform() {
    Transform t;
    t.dims.push_back(
        {"glance_duration", "s", glance_map(1.0 / 256.0, 255.0 / 256.0), Direction::Increasing, {0.0, 6.6}});
    PiecewiseMap decel;
    for (int k = 1; k <= 15; ++k) decel.breakpoints.emplace_back(k / 16.0, k / 2.0 - 10.8);
    t.dims.push_back({"deceleration", "m/s^2", decel, Direction::Increasing, {-10.3, -3.3}});
    return t;
}

nlohmann::json to_json(const Transform& t) {
    nlohmann::json dims = nlohmann::json::array();
    for (const auto& d : t.dims) {
        nlohmann::json jd;
        jd["name"] = d.name;
        jd["units"] = d.units;
        jd["direction"] = d.direction == Direction::Increasing ? "increasing" : "decreasing";
        jd["bounds"] = {d.bounds.lo, d.bounds.hi};
        if (const auto* a = std::get_if<AffineMap>(&d.map)) {
            jd["kind"] = "affine";
            jd["scale"] = a->scale;
            jd["offset"] = a->offset;
        } else {
            const auto& pw = std::get<PiecewiseMap>(d.map);
            jd["kind"] = pw.discrete ? "discrete" : "piecewise";
            nlohmann::json bp = nlohmann::json::array();
            for (const auto& [u, y] : pw.breakpoints) bp.push_back({u, y});
            jd["breakpoints"] = bp;
        }
        dims.push_back(jd);
    }
    return nlohmann::json{{"dims", dims}};
}

Transform transform_from_json(const nlohmann::json& j) {
    try {
        Transform t;
        for (const auto& jd : j.at("dims")) {
            DimensionTransform d;
            d.name = jd.value("name", "");
            d.units = jd.value("units", "");
            const std::string dir = jd.value("direction", "increasing");
            if (dir == "increasing") {
                d.direction = Direction::Increasing;
            } else if (dir == "decreasing") {
                d.direction = Direction::Decreasing;
            } else {
                throw UsageError("unknown direction '" + dir + "'");
            }
            const auto& b = jd.at("bounds");
            d.bounds = {b.at(0).get<double>(), b.at(1).get<double>()};
            const std::string kind = jd.at("kind").get<std::string>();
            if (kind == "affine") {
                d.map = AffineMap{jd.at("scale").get<double>(), jd.at("offset").get<double>()};
            } else if (kind == "discrete" || kind == "piecewise") {
                PiecewiseMap pw;
                pw.discrete = kind == "discrete";
                for (const auto& bp : jd.at("breakpoints")) {
                    pw.breakpoints.emplace_back(bp.at(0).get<double>(), bp.at(1).get<double>());
                }
                d.map = std::move(pw);
            } else {
                throw UsageError("unknown mapping kind '" + kind + "'");
            }
            t.dims.push_back(std::move(d));
        }
        validate(t);
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed transform JSON: ") + e.what());
    }
}

}  // namespace adagrid
