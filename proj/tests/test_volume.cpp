#include "doctest.h"

#include "adagrid/oracle.hpp"
#include "adagrid/rng.hpp"
#include "adagrid/strategy.hpp"
#include "adagrid/volume.hpp"

#include <cmath>

using namespace adagrid;

namespace {

// Inclusion-exclusion over all subsets: the union of [0, x_i] boxes.
double inclusion_exclusion_down(const std::vector<UnitPoint>& boxes) {
    const std::size_t n = boxes.size();
    if (n == 0) return 0.0;
    const std::size_t p = boxes[0].dimension();
    double total = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        double vol = 1.0;
        for (std::size_t k = 0; k < p; ++k) {
            double m = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask & (1u << i)) m = std::min(m, boxes[i][k]);
            }
            vol *= m;
        }
        total += (__builtin_popcount(mask) % 2 ? 1.0 : -1.0) * vol;
    }
    return total;
}

// Cells of side 2^-level that are entirely certain, by corner tests.
double brute_uncertain_cells(const DesignState& s, unsigned level) {
    const std::size_t p = s.dimension();
    const std::size_t side = std::size_t{1} << level;
    std::size_t total = 1;
    for (std::size_t k = 0; k < p; ++k) total *= side;
    const double h = 1.0 / static_cast<double>(side);
    std::size_t certain = 0;
    std::vector<double> lo(p), hi(p);
    for (std::size_t c = 0; c < total; ++c) {
        std::size_t r = c;
        for (std::size_t k = 0; k < p; ++k) {
            lo[k] = static_cast<double>(r % side) * h;
            hi[k] = lo[k] + h;
            r /= side;
        }
        bool neg = false, pos = false;
        for (const auto& y : s.neg_frontier()) {
            bool ok = true;
            for (std::size_t k = 0; k < p; ++k) ok = ok && hi[k] <= y[k];
            neg = neg || ok;
        }
        for (const auto& y : s.pos_frontier()) {
            bool ok = true;
            for (std::size_t k = 0; k < p; ++k) ok = ok && lo[k] >= y[k];
            pos = pos || ok;
        }
        certain += neg || pos;
    }
    return 1.0 - static_cast<double>(certain) / static_cast<double>(total);
}

DesignState random_state(Rng& rng, std::size_t p, std::size_t n, int resolution, std::uint64_t oracle_seed) {
    StaircaseOracle f(p, 5, oracle_seed);
    DesignState s(p);
    std::vector<double> x(p);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& c : x) {
            c = rng.uniform01();
            if (resolution > 0) c = std::round(c * resolution) / resolution;
        }
        UnitPoint q(x);
        s.insert({q, f.evaluate(q)}, CandidatePolicy::Keep);
    }
    return s;
}

}  // namespace

TEST_SUITE("volume") {
    TEST_CASE("union examples") {
        CHECK(volume_union_down({}) == 0.0);
        CHECK(volume_union_down({{0.5, 0.25}, {0.25, 0.5}}) == doctest::Approx(0.1875).epsilon(1e-15));
        for (std::size_t p = 1; p <= 5; ++p) CHECK(volume_union_down({UnitPoint(std::vector<double>(p, 1.0))}) == 1.0);
        CHECK(volume_union_up({}) == 0.0);
        CHECK(volume_union_up({{0.5, 0.75}, {0.75, 0.5}}) == doctest::Approx(0.1875).epsilon(1e-15));
        for (std::size_t p = 1; p <= 5; ++p) CHECK(volume_union_up({UnitPoint(std::vector<double>(p, 0.0))}) == 1.0);
    }

    TEST_CASE("exact union matches inclusion-exclusion") {
        Rng rng(17);
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t p = 1 + trial % 5;
            const std::size_t n = 1 + rng.uniform_index(9);
            std::vector<UnitPoint> boxes;
            std::vector<double> x(p);
            for (std::size_t i = 0; i < n; ++i) {
                for (auto& c : x) c = trial % 3 == 0 ? std::round(rng.uniform01() * 4) / 4 : rng.uniform01();
                boxes.emplace_back(x);
            }
            CHECK(volume_union_down(boxes) == doctest::Approx(inclusion_exclusion_down(boxes)).epsilon(1e-12));
            std::vector<UnitPoint> reflected;
            for (const auto& b : boxes) reflected.push_back(b.reflected());
            CHECK(volume_union_up(reflected) == volume_union_down(boxes));
        }
    }

    TEST_CASE("exact volume equals the dyadic cell count on grid states") {
        Rng rng(23);
        for (int trial = 0; trial < 60; ++trial) {
            const std::size_t p = 1 + trial % 4;
            const unsigned level = p <= 2 ? 4 : 3;
            const DesignState s = random_state(rng, p, 25, 1 << level, 500 + trial);
            const auto exact = uncertain_volume(s);
            CHECK(exact.v_uncertain == brute_uncertain_cells(s, level));
            CHECK(uncertain_volume_cells(s, level).v_uncertain == exact.v_uncertain);
            CHECK(std::abs(exact.v_negative + exact.v_positive + exact.v_uncertain - 1.0) <= 1e-12);
        }
    }

    TEST_CASE("Monte Carlo estimate agrees with the exact sweep") {
        CHECK(uncertain_volume_mc(DesignState(3), 1000, 4).v_uncertain == 1.0);

        DesignState one(2);
        one.insert({{0.5, 0.5}, Label::Negative});
        const auto mc = uncertain_volume_mc(one, 1'000'000, 9);
        CHECK(std::abs(mc.v_uncertain - 0.75) <= 3 * *mc.mc_stderr);

        Rng rng(31);
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t p = 1 + trial % 5;
            const DesignState s = random_state(rng, p, 80, 0, 900 + trial);
            const auto ex = uncertain_volume(s);
            const auto est = uncertain_volume_mc(s, 100'000, trial);
            CHECK(std::abs(ex.v_uncertain - est.v_uncertain) <= 4 * std::max(*est.mc_stderr, 1e-4));
        }
    }

    TEST_CASE("illustration volumes") {
        IllustrationOracle f;
        StrategySpec spec;
        spec.kind = StrategyKind::AG;
        spec.dimension = 2;
        spec.budget = 16;
        std::optional<DesignState> at8;
        const auto r = run_strategy(spec, f, [&](const StepRecord& rec, const DesignState& st) {
            if (rec.index == 8) at8 = st;
        });
        CHECK(uncertain_volume(*at8).v_uncertain == 0.375);
        CHECK(uncertain_volume(r.state).v_uncertain == 0.1875);
        const auto mc = uncertain_volume_mc(r.state, 1'000'000, 2);
        CHECK(std::abs(mc.v_uncertain - 0.1875) <= 3 * *mc.mc_stderr);
        CHECK(uncertain_volume(DesignState(4)).v_uncertain == 1.0);
    }

    TEST_CASE("inserting observations never increases the uncertain volume") {
        Rng rng(41);
        StaircaseOracle f(3, 6, 8);
        DesignState s(3);
        double last = 1.0;
        for (int i = 0; i < 150; ++i) {
            UnitPoint q{rng.uniform01(), rng.uniform01(), rng.uniform01()};
            s.insert({q, f.evaluate(q)}, CandidatePolicy::Keep);
            const double v = uncertain_volume(s).v_uncertain;
            CHECK(v <= last + 1e-15);
            last = v;
        }
    }

    TEST_CASE("auto policy switches to Monte Carlo beyond its limits") {
        DesignState s(7);
        s.insert({UnitPoint(std::vector<double>(7, 0.5)), Label::Negative});
        VolumePolicy vp;
        vp.mc_samples = 20'000;
        const auto r = uncertain_volume_auto(s, vp);
        CHECK(r.method == VolumeMethod::MonteCarlo);
        CHECK(r.mc_samples.value() == 20'000);
        DesignState small(3);
        CHECK(uncertain_volume_auto(small).method == VolumeMethod::Exact);
    }
}
