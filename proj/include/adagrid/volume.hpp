#pragma once

#include "adagrid/monotone.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace adagrid {

enum class VolumeMethod { Exact, DyadicCells, MonteCarlo };

const char* to_string(VolumeMethod m);

struct VolumeReport {
    double v_negative = 0.0;
    double v_positive = 0.0;
    double v_uncertain = 1.0;
    VolumeMethod method = VolumeMethod::Exact;
    std::optional<std::uint64_t> mc_samples;
    std::optional<double> mc_stderr;
};

/// Exact measure of the union of origin-anchored boxes [0, x].
double volume_union_down(const std::vector<UnitPoint>& anchors);

/// Exact measure of the union of corner-anchored boxes [x, 1].
double volume_union_up(const std::vector<UnitPoint>& anchors);

/// Exact report from the state's frontiers.
VolumeReport uncertain_volume(const DesignState& state);

/// Fraction of uniform samples that classify as Unknown.
VolumeReport uncertain_volume_mc(const DesignState& state, std::uint64_t samples, std::uint64_t seed);

/// Counts fully certain cells of side 2^-level. Exact when every observed
/// coordinate lies on the dyadic grid of that level.
VolumeReport uncertain_volume_cells(const DesignState& state, unsigned level);

/// Limits above which the exact sweep is replaced by Monte Carlo.
struct VolumePolicy {
    std::size_t max_exact_dimension = 6;
    std::size_t max_exact_frontier = 500;
    std::uint64_t mc_samples = 1'000'000;
    std::uint64_t mc_seed = 0;
};

VolumeReport uncertain_volume_auto(const DesignState& state, const VolumePolicy& policy = {});

}  // namespace adagrid
