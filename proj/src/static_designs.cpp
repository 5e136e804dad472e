#include "adagrid/static_designs.hpp"

#include "adagrid/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adagrid {

const char* to_string(StaticKind k) {
    switch (k) {
        case StaticKind::SG: return "SG";
        case StaticKind::SI: return "SI";
        case StaticKind::MC: return "MC";
        case StaticKind::LHD: return "LHD";
    }
    return "SG";
}

StaticKind parse_static_kind(const std::string& s) {
    std::string u = s;
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
    if (u == "SG") return StaticKind::SG;
    if (u == "SI") return StaticKind::SI;
    if (u == "MC") return StaticKind::MC;
    if (u == "LHD") return StaticKind::LHD;
    throw UsageError("unknown static design kind '" + s + "' (expected sg, si, mc, lhd)");
}

namespace {

// m^p, saturating at UINT64_MAX.
std::uint64_t ipow_sat(std::uint64_t m, std::size_t p) {
    std::uint64_t r = 1;
    for (std::size_t k = 0; k < p; ++k) {
        if (m != 0 && r > UINT64_MAX / m) return UINT64_MAX;
        r *= m;
    }
    return r;
}

std::uint64_t floor_root(std::uint64_t n, std::size_t p) {
    auto m = static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(n), 1.0 / p)));
    while (m > 0 && ipow_sat(m, p) > n) --m;
    while (ipow_sat(m + 1, p) <= n) ++m;
    return m;
}

std::uint64_t grid_levels_or_throw(const char* name, std::size_t p, std::uint64_t n, std::uint64_t min_m) {
    if (p == 0) throw UsageError(std::string(name) + ": dimension must be positive");
    if (auto m = exact_root(n, p); m && *m >= min_m) return *m;
    const std::uint64_t lo = std::max(floor_root(n, p), min_m);
    std::uint64_t below = ipow_sat(lo, p);
    std::uint64_t above = ipow_sat(lo + 1, p);
    std::string hint;
    if (below < n && below >= ipow_sat(min_m, p)) {
        hint = "n=" + std::to_string(below) + " or n=" + std::to_string(above);
    } else {
        hint = "n=" + std::to_string(below == n ? above : below);
    }
    throw UsageError(std::string(name) + ": n=" + std::to_string(n) + " is not a " +
                     (p == 1 ? "valid run count" : "perfect power of dimension " + std::to_string(p)) +
                     "; nearest valid: " + hint);
}

}  // namespace

std::optional<std::uint64_t> exact_root(std::uint64_t n, std::size_t p) {
    if (p == 0) return std::nullopt;
    const std::uint64_t m = floor_root(n, p);
    if (ipow_sat(m, p) == n) return m;
    return std::nullopt;
}

std::vector<UnitPoint> cartesian_grid(const std::vector<double>& levels, std::size_t p) {
    std::vector<UnitPoint> out;
    if (levels.empty()) return out;
    const std::uint64_t total = ipow_sat(levels.size(), p);
    out.reserve(total);
    std::vector<std::size_t> idx(p, 0);
    std::vector<double> coords(p);
    for (std::uint64_t t = 0; t < total; ++t) {
        for (std::size_t k = 0; k < p; ++k) coords[k] = levels[idx[k]];
        out.emplace_back(coords);
        // Last coordinate varies fastest: lexicographic order.
        for (std::size_t k = p; k-- > 0;) {
            if (++idx[k] < levels.size()) break;
            idx[k] = 0;
        }
    }
    return out;
}

std::vector<UnitPoint> gen_sg(std::size_t p, std::uint64_t n) {
    const std::uint64_t m = grid_levels_or_throw("SG", p, n, 2);
    std::vector<double> levels(m);
    for (std::uint64_t z = 0; z < m; ++z) levels[z] = static_cast<double>(z) / static_cast<double>(m - 1);
    return cartesian_grid(levels, p);
}

std::vector<UnitPoint> gen_si(std::size_t p, std::uint64_t n) {
    const std::uint64_t m = grid_levels_or_throw("SI", p, n, 1);
    std::vector<double> levels(m);
    for (std::uint64_t z = 1; z <= m; ++z) levels[z - 1] = static_cast<double>(z) / static_cast<double>(m + 1);
    return cartesian_grid(levels, p);
}

std::vector<UnitPoint> gen_mc(std::size_t p, std::uint64_t n, std::uint64_t seed) {
    if (p == 0) throw UsageError("MC: dimension must be positive");
    Rng rng(seed);
    std::vector<UnitPoint> out;
    out.reserve(n);
    std::vector<double> coords(p);
    for (std::uint64_t i = 0; i < n; ++i) {
        for (auto& c : coords) c = rng.uniform01();
        out.emplace_back(coords);
    }
    return out;
}

std::vector<UnitPoint> gen_lhd(std::size_t p, std::uint64_t n, std::uint64_t seed) {
    if (p == 0) throw UsageError("LHD: dimension must be positive");
    if (n == 0) return {};
    Rng rng(seed);
    std::vector<std::vector<double>> coords(n, std::vector<double>(p));
    std::vector<std::uint64_t> perm(n);
    const double dn = static_cast<double>(n);
    for (std::size_t k = 0; k < p; ++k) {
        std::iota(perm.begin(), perm.end(), std::uint64_t{0});
        for (std::uint64_t i = n; i > 1; --i) {
            std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
        }
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto bin = static_cast<double>(perm[i]);
            double x = (bin + rng.uniform01()) / dn;
            // Rounding may push x onto the next bin's left edge.
            while (std::floor(x * dn) > bin) x = std::nextafter(x, 0.0);
            coords[i][k] = x;
        }
    }
    std::vector<UnitPoint> out;
    out.reserve(n);
    for (auto& c : coords) out.emplace_back(std::move(c));
    return out;
}

std::vector<UnitPoint> generate(const StaticDesignSpec& spec) {
    switch (spec.kind) {
        case StaticKind::SG: return gen_sg(spec.dimension, spec.n);
        case StaticKind::SI: return gen_si(spec.dimension, spec.n);
        case StaticKind::MC: return gen_mc(spec.dimension, spec.n, spec.seed);
        case StaticKind::LHD: return gen_lhd(spec.dimension, spec.n, spec.seed);
    }
    throw UsageError("unknown static design kind");
}

}  // namespace adagrid
