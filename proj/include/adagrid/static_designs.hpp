#pragma once

#include "adagrid/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace adagrid {

enum class StaticKind { SG, SI, MC, LHD };

const char* to_string(StaticKind k);
StaticKind parse_static_kind(const std::string& s);

struct StaticDesignSpec {
    StaticKind kind = StaticKind::SG;
    std::size_t dimension = 1;
    std::size_t n = 1;
    std::uint64_t seed = 0;  // MC / LHD only
};

/// Integer m with m^p == n, if any.
std::optional<std::uint64_t> exact_root(std::uint64_t n, std::size_t p);

/// Full grid {0, 1/(m-1), ..., 1}^p with m = n^(1/p) >= 2, lexicographic order.
std::vector<UnitPoint> gen_sg(std::size_t p, std::uint64_t n);

/// Inner grid {1/(m+1), ..., m/(m+1)}^p with m = n^(1/p) >= 1, lexicographic order.
std::vector<UnitPoint> gen_si(std::size_t p, std::uint64_t n);

/// n i.i.d. uniform points.
std::vector<UnitPoint> gen_mc(std::size_t p, std::uint64_t n, std::uint64_t seed);

/// Plain randomized Latin hypercube: one point per interval [k/n, (k+1)/n) in
/// every dimension, independent permutations, uniform placement within cells.
std::vector<UnitPoint> gen_lhd(std::size_t p, std::uint64_t n, std::uint64_t seed);

std::vector<UnitPoint> generate(const StaticDesignSpec& spec);

/// Cartesian product of per-dimension levels, lexicographic order.
std::vector<UnitPoint> cartesian_grid(const std::vector<double>& levels, std::size_t p);

}  // namespace adagrid
