#include "doctest.h"

#include "adagrid/checks.hpp"
#include "adagrid/theory.hpp"

#include <cmath>

using namespace adagrid;

namespace {

double value_of(const BoundResult& r) {
    REQUIRE(std::holds_alternative<BoundReport>(r));
    return std::get<BoundReport>(r).value;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

TEST_SUITE("theory") {
    TEST_CASE("static grid volumes") {
        CHECK(sg_worst_volume(2, 9) == doctest::Approx(0.75));
        CHECK(sg_worst_volume(1, 11) == doctest::Approx(0.1));
        CHECK(sg_worst_volume(2, 1'000'000) * std::sqrt(1e6) == doctest::Approx(2.0).epsilon(0.01));
        CHECK_THROWS_AS(sg_worst_volume(2, 10), UsageError);
        CHECK_THROWS_AS(sg_worst_volume(2, 1), UsageError);

        CHECK(si_volume(2, 4) == doctest::Approx(5.0 / 9.0));
        CHECK(si_volume(1, 1) == doctest::Approx(0.5));
        CHECK(si_volume(3, 27) == doctest::Approx(1.0 - 27.0 / 64.0));
        CHECK_THROWS_AS(si_volume(2, 5), UsageError);
    }

    TEST_CASE("inner grid volume approaches p n^(-1/p)") {
        for (std::size_t p = 1; p <= 3; ++p) {
            for (std::uint64_t m : {50, 80, 120}) {
                const double n = std::pow(static_cast<double>(m), static_cast<double>(p));
                const double ratio = si_volume(p, static_cast<std::uint64_t>(n)) / (p * std::pow(n, -1.0 / p));
                CHECK(std::abs(ratio - 1.0) <= 0.05);
            }
        }
    }

    TEST_CASE("lower bounds") {
        CHECK(value_of(static_lower_bound(1, 9)) == doctest::Approx(0.1));
        CHECK(value_of(static_lower_bound(2, 40000)) == doctest::Approx(0.5 / std::sqrt(10.0) / 200.0));
        CHECK(value_of(static_lower_bound(2, 40000)) == doctest::Approx(7.91e-4).epsilon(1e-3));
        CHECK(std::holds_alternative<NotApplicable>(static_lower_bound(2, 10)));
        CHECK(std::get<BoundReport>(static_lower_bound(1, 9)).kind == BoundKind::LowerBound);

        CHECK(value_of(adaptive_lower_bound(1, 5)) == doctest::Approx(1.0 / 32.0));
        CHECK(value_of(adaptive_lower_bound(2, 100)) == doctest::Approx(2.5e-3));
        CHECK(std::holds_alternative<NotApplicable>(adaptive_lower_bound(3, 10)));
        CHECK_FALSE(std::get<NotApplicable>(adaptive_lower_bound(3, 10)).reason.empty());
    }

    TEST_CASE("adaptive bound never exceeds the static bound where both apply") {
        for (std::size_t p = 1; p <= 4; ++p) {
            for (double n = 1; n <= 1e9; n *= 3.7) {
                const auto a = adaptive_lower_bound(p, static_cast<std::uint64_t>(n));
                const auto s = static_lower_bound(p, static_cast<std::uint64_t>(n));
                if (std::holds_alternative<BoundReport>(a) && std::holds_alternative<BoundReport>(s)) {
                    CHECK(value_of(a) <= value_of(s));
                }
            }
        }
    }

    TEST_CASE("grid counts") {
        CHECK(gg_count_bound(1, 2) == 4);
        CHECK(gg_count_bound(2, 1) == 10);
        CHECK(gg_count_bound(2, 2) == 20);
        for (std::uint32_t g = 0; g <= 20; ++g) CHECK(gg_count_bound(1, g) == g + 2);
        for (std::uint32_t g = 1; g <= 20; ++g) CHECK(gi_count_exact(1, g) == g);
        CHECK(gi_count_exact(2, 2) == 6);
        CHECK(gi_count_exact(3, 2) == 20);
    }

    TEST_CASE("asymptotic constants") {
        CHECK(g_p_constant(2) == doctest::Approx(1.0));
        CHECK(g_p_constant(3) == doctest::Approx(1.5));
        const double mc[] = {2.51, 2.43, 2.67, 2.87, 3.06};
        for (std::size_t p = 2; p <= 6; ++p) CHECK(round2(mc_constant(p)) == doctest::Approx(mc[p - 2]));
        CHECK(mc_constant(1) == doctest::Approx(2.0));
        const double amc[] = {12.57, 4.65, 4.09, 3.94, 3.96};
        for (std::size_t p = 2; p <= 6; ++p) CHECK(round2(amc_constant(p)) == doctest::Approx(amc[p - 2]));
        CHECK(round2(amc_constant(1)) == doctest::Approx(1.78));
        const double grid[] = {8.0, 6.0, 6.64, 7.60, 8.64};
        for (std::size_t p = 2; p <= 6; ++p) CHECK(round2(grid_adaptive_constant(p)) == doctest::Approx(grid[p - 2]));
    }

    TEST_CASE("one-dimensional Monte Carlo formulas") {
        CHECK(mc_worst_expected_volume_p1(0) == 1.0);
        CHECK(mc_worst_expected_volume_p1(1) == doctest::Approx(0.75));
        CHECK(mc_worst_expected_volume_p1(100000) * 100000 == doctest::Approx(2.0).epsilon(1e-4));
        CHECK(amc_asymptote_p1() == doctest::Approx(-0.23186).epsilon(1e-4));
        CHECK(amc_asymptote_p1() < 0.0);
        CHECK(amc_asymptote_p1() == doctest::Approx(2.0 * (kEulerGamma - std::log(2.0))).epsilon(1e-15));
        CHECK(amc_expected_evaluations_p1(1) == doctest::Approx(1.0));
        CHECK(amc_expected_evaluations_p1(2) == doctest::Approx(1.0 + 1.5 / 2.0));
    }

    TEST_CASE("named checks are registered and fast ones pass") {
        CHECK(theory_checks().size() >= 10);
        CHECK_THROWS_AS(run_check("no-such-check", {}), UsageError);
        for (const char* name : {"si-identity", "sg-worst", "gi-count", "level-equivalence", "ag-illustration", "comparable-pairs",
                                 "table-constants", "bounds-order", "si-asymptote"}) {
            const auto r = run_check(name, {});
            INFO(name << ": " << r.detail);
            CHECK(r.passed);
        }
    }
}
