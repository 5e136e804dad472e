#include "adagrid/volume.hpp"

#include "adagrid/rng.hpp"

#include <algorithm>
#include <cmath>

namespace adagrid {

const char* to_string(VolumeMethod m) {
    switch (m) {
        case VolumeMethod::Exact: return "Exact";
        case VolumeMethod::DyadicCells: return "DyadicCells";
        case VolumeMethod::MonteCarlo: return "MonteCarlo";
    }
    return "Exact";
}

namespace {

using Anchor = const double*;

bool leq_prefix(Anchor a, Anchor b, std::size_t d) {
    for (std::size_t k = 0; k < d; ++k) {
        if (a[k] > b[k]) return false;
    }
    return true;
}

// Keeps anchors that are maximal in their first d coordinates; one copy of ties.
void reduce_to_maximal(std::vector<Anchor>& pts, std::size_t d) {
    std::vector<Anchor> kept;
    kept.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
            if (i == j || !leq_prefix(pts[i], pts[j], d)) continue;
            // Equal prefixes: keep the first occurrence only.
            dominated = !leq_prefix(pts[j], pts[i], d) || j < i;
        }
        if (!dominated) kept.push_back(pts[i]);
    }
    pts.swap(kept);
}

// Measure of the union of [0, a[0..d)] over the anchors, sweeping slabs of the
// last coordinate from the top down.
double union_down(std::vector<Anchor> pts, std::size_t d) {
    if (pts.empty()) return 0.0;
    if (d == 1) {
        double m = 0.0;
        for (Anchor a : pts) m = std::max(m, a[0]);
        return m;
    }
    if (pts.size() > 1) reduce_to_maximal(pts, d);
    const std::size_t last = d - 1;
    std::sort(pts.begin(), pts.end(), [last](Anchor a, Anchor b) { return a[last] > b[last]; });

    double total = 0.0;
    std::vector<Anchor> active;
    active.reserve(pts.size());
    double running_max = 0.0;  // d == 2 shortcut
    std::size_t i = 0;
    while (i < pts.size()) {
        const double level = pts[i][last];
        while (i < pts.size() && pts[i][last] == level) {
            active.push_back(pts[i]);
            running_max = std::max(running_max, pts[i][0]);
            ++i;
        }
        const double next = i < pts.size() ? pts[i][last] : 0.0;
        const double thickness = level - next;
        if (thickness <= 0.0) continue;
        const double section = d == 2 ? running_max : union_down(active, d - 1);
        total += thickness * section;
    }
    return total;
}

double union_down_points(const std::vector<UnitPoint>& anchors) {
    if (anchors.empty()) return 0.0;
    const std::size_t d = anchors.front().dimension();
    std::vector<Anchor> pts;
    pts.reserve(anchors.size());
    for (const auto& a : anchors) {
        if (a.dimension() != d) throw UsageError("volume: anchors have mixed dimensions");
        pts.push_back(a.coords().data());
    }
    return union_down(std::move(pts), d);
}

}  // namespace

double volume_union_down(const std::vector<UnitPoint>& anchors) {
    return union_down_points(anchors);
}

double volume_union_up(const std::vector<UnitPoint>& anchors) {
    std::vector<UnitPoint> reflected;
    reflected.reserve(anchors.size());
    for (const auto& a : anchors) reflected.push_back(a.reflected());
    return union_down_points(reflected);
}

VolumeReport uncertain_volume(const DesignState& state) {
    VolumeReport r;
    r.method = VolumeMethod::Exact;
    r.v_negative = volume_union_down(state.neg_frontier());
    r.v_positive = volume_union_up(state.pos_frontier());
    r.v_uncertain = std::max(0.0, 1.0 - r.v_negative - r.v_positive);
    return r;
}

VolumeReport uncertain_volume_mc(const DesignState& state, std::uint64_t samples, std::uint64_t seed) {
    if (samples == 0) throw UsageError("uncertain_volume_mc: samples must be >= 1");
    Rng rng(seed);
    const std::size_t p = state.dimension();
    std::vector<double> q(p);
    std::uint64_t neg = 0, pos = 0, unknown = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        for (auto& c : q) c = rng.uniform01();
        switch (state.classify(std::span<const double>(q))) {
            case Certainty::CertainNegative: ++neg; break;
            case Certainty::CertainPositive: ++pos; break;
            case Certainty::Unknown: ++unknown; break;
        }
    }
    VolumeReport r;
    r.method = VolumeMethod::MonteCarlo;
    const double n = static_cast<double>(samples);
    r.v_negative = neg / n;
    r.v_positive = pos / n;
    r.v_uncertain = unknown / n;
    r.mc_samples = samples;
    r.mc_stderr = std::sqrt(r.v_uncertain * (1.0 - r.v_uncertain) / n);
    return r;
}

VolumeReport uncertain_volume_cells(const DesignState& state, unsigned level) {
    const std::size_t p = state.dimension();
    const std::uint64_t side = std::uint64_t{1} << level;
    double cells = 1.0;
    for (std::size_t k = 0; k < p; ++k) cells *= static_cast<double>(side);
    if (cells > 1e8) throw UsageError("uncertain_volume_cells: too many cells");

    std::vector<std::uint64_t> idx(p, 0);
    std::vector<double> lower(p), upper(p);
    std::uint64_t neg = 0, pos = 0;
    const double h = 1.0 / static_cast<double>(side);
    bool done = false;
    while (!done) {
        for (std::size_t k = 0; k < p; ++k) {
            lower[k] = static_cast<double>(idx[k]) * h;
            upper[k] = static_cast<double>(idx[k] + 1) * h;
        }
        // A closed cell is certainly negative iff its top corner is, and
        // certainly positive iff its bottom corner is.
        if (state.classify(std::span<const double>(upper)) == Certainty::CertainNegative) {
            ++neg;
        } else if (state.classify(std::span<const double>(lower)) == Certainty::CertainPositive) {
            ++pos;
        }
        std::size_t k = 0;
        while (k < p && ++idx[k] == side) idx[k++] = 0;
        done = k == p;
    }
    VolumeReport r;
    r.method = VolumeMethod::DyadicCells;
    r.v_negative = static_cast<double>(neg) / cells;
    r.v_positive = static_cast<double>(pos) / cells;
    r.v_uncertain = 1.0 - r.v_negative - r.v_positive;
    return r;
}

VolumeReport uncertain_volume_auto(const DesignState& state, const VolumePolicy& policy) {
    const std::size_t frontier = state.neg_frontier().size() + state.pos_frontier().size();
    if (state.dimension() <= policy.max_exact_dimension && frontier <= policy.max_exact_frontier) {
        return uncertain_volume(state);
    }
    return uncertain_volume_mc(state, policy.mc_samples, policy.mc_seed);
}

}  // namespace adagrid
