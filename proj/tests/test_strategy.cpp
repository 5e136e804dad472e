#include "doctest.h"

#include "adagrid/checks.hpp"
#include "adagrid/strategy.hpp"
#include "adagrid/theory.hpp"
#include "adagrid/volume.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace adagrid;

namespace {

StrategySpec make_spec(StrategyKind kind, std::size_t p, std::size_t budget, std::uint64_t seed = 1) {
    StrategySpec s;
    s.kind = kind;
    s.dimension = p;
    s.budget = budget;
    s.seed = seed;
    return s;
}

// Replays a trace and checks each point was Unknown just before it was evaluated.
void check_no_wasted_runs(const std::vector<StepRecord>& trace, std::size_t p) {
    DesignState s(p);
    for (const auto& r : trace) {
        CHECK(s.classify(r.point) == Certainty::Unknown);
        s.insert({r.point, r.label}, CandidatePolicy::Keep);
    }
}

// Group strategies only prune when a level's candidate set is generated, so a
// point must be Unknown against the state as it was when its level began.
void check_unknown_at_level_start(const std::vector<StepRecord>& trace, std::size_t p) {
    DesignState s(p), snapshot(p);
    std::uint32_t level = trace.empty() ? 0 : trace.front().level_at_step;
    for (const auto& r : trace) {
        if (r.level_at_step != level) {
            snapshot = s;
            level = r.level_at_step;
        }
        CHECK(snapshot.classify(r.point) == Certainty::Unknown);
        s.insert({r.point, r.label}, CandidatePolicy::Keep);
    }
}

}  // namespace

TEST_SUITE("strategy") {
    TEST_CASE("grid candidate sets") {
        CHECK(grid_candidates(DesignState(2), 0, false).size() == 4);
        DesignState a(1);
        a.insert({{0.0}, Label::Negative});
        a.insert({{1.0}, Label::Positive});
        CHECK(grid_candidates(a, 1, false) == std::vector<UnitPoint>{{0.5}});
        a.insert({{0.5}, Label::Positive});
        CHECK(grid_candidates(a, 2, false) == std::vector<UnitPoint>{{0.25}});
        CHECK(grid_candidates(DesignState(2), 2, true).size() == 9);
    }

    TEST_CASE("grid candidates agree with brute-force enumeration") {
        Rng rng(4);
        for (int trial = 0; trial < 40; ++trial) {
            const std::size_t p = 1 + trial % 3;
            StaircaseOracle f(p, 5, trial);
            DesignState s(p);
            std::vector<double> x(p);
            for (int i = 0; i < 15; ++i) {
                for (auto& c : x) c = std::round(rng.uniform01() * 8) / 8;
                s.insert({UnitPoint(x), f.evaluate(UnitPoint(x))}, CandidatePolicy::Keep);
            }
            for (std::uint32_t level = 0; level <= 3; ++level) {
                for (bool inner : {false, true}) {
                    if (inner && level == 0) continue;
                    const unsigned m = 1u << level;
                    std::vector<double> levels;
                    for (unsigned z = inner ? 1 : 0; z <= (inner ? m - 1 : m); ++z) levels.push_back(double(z) / m);
                    std::vector<UnitPoint> expected;
                    for (const auto& q : cartesian_grid(levels, p)) {
                        if (s.classify(q) == Certainty::Unknown) expected.push_back(q);
                    }
                    std::sort(expected.begin(), expected.end());
                    auto got = grid_candidates(s, level, inner);
                    std::sort(got.begin(), got.end());
                    CHECK(got == expected);
                }
            }
        }
    }

    TEST_CASE("ag selection") {
        CHECK(ag_select({{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}}) == UnitPoint{1.0, 0.0});
        CHECK(ag_select({{0.0}, {0.5}, {1.0}}) == UnitPoint{0.5});
        CHECK(ag_select({{0.3, 0.7}}) == UnitPoint{0.3, 0.7});
        CHECK_THROWS_AS(ag_select({}), UsageError);
    }

    TEST_CASE("AG on the illustration function") {
        IllustrationOracle f;
        std::vector<double> v;
        const auto r = run_strategy(make_spec(StrategyKind::AG, 2, 16), f,
                                    [&](const StepRecord&, const DesignState& s) { v.push_back(uncertain_volume(s).v_uncertain); });
        REQUIRE(r.trace.size() == 16);
        CHECK(v[7] == 0.375);
        CHECK(v[15] == 0.1875);
        CHECK(r.trace[0].point == UnitPoint{1.0, 0.0});
        check_no_wasted_runs(r.trace, 2);
        for (std::size_t i = 1; i < r.trace.size(); ++i) {
            CHECK(r.trace[i].index == r.trace[i - 1].index + 1);
            CHECK(r.trace[i].level_at_step >= r.trace[i - 1].level_at_step);
        }
        const auto again = run_strategy(make_spec(StrategyKind::AG, 2, 16), f);
        CHECK(again.trace == r.trace);
    }

    TEST_CASE("one-dimensional rates") {
        for (double t : {0.5, 0.1, 0.9, 0.333, 0.71875}) {
            HalfSpaceOracle f(1, t);
            std::vector<double> gi, ag;
            run_strategy(make_spec(StrategyKind::GI, 1, 12), f,
                         [&](const StepRecord&, const DesignState& s) { gi.push_back(uncertain_volume(s).v_uncertain); });
            run_strategy(make_spec(StrategyKind::AG, 1, 12), f,
                         [&](const StepRecord&, const DesignState& s) { ag.push_back(uncertain_volume(s).v_uncertain); });
            for (std::size_t n = 1; n <= gi.size(); ++n) CHECK(gi[n - 1] == std::ldexp(1.0, -static_cast<int>(n)));
            for (std::size_t n = 1; n <= ag.size(); ++n) {
                CHECK(ag[n - 1] <= std::ldexp(1.0, 2 - static_cast<int>(n)));
                CHECK(ag[n - 1] >= std::ldexp(1.0, -static_cast<int>(n)));
            }
        }
        const auto gi2 = run_strategy(make_spec(StrategyKind::GI, 1, 2), HalfSpaceOracle(1));
        CHECK(gi2.trace[0].point == UnitPoint{0.5});
        CHECK(gi2.trace[1].point == UnitPoint{0.25});
    }

    TEST_CASE("GG at p=1 finishes level 2 in four runs") {
        const auto lc = level_completions(StrategyKind::GG, HalfSpaceOracle(1), 2, 3);
        REQUIRE(lc.size() >= 3);
        CHECK(lc.back().level == 2);
        CHECK(lc.back().evaluations == 4);
        CHECK(lc.back().evaluations <= gg_count_bound(1, 2));
    }

    TEST_CASE("count identities on random monotone functions") {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const std::size_t p = 1 + seed % 3;
            StaircaseOracle f(p, 3 + seed % 6, seed);
            for (const auto& lc : level_completions(StrategyKind::GI, f, 3, seed)) {
                CHECK(lc.evaluations == gi_count_exact(p, lc.level));
            }
            for (const auto& lc : level_completions(StrategyKind::GG, f, 3, seed)) {
                CHECK(lc.evaluations <= gg_count_bound(p, lc.level));
            }
        }
    }

    TEST_CASE("level completion matches the full static grid") {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            const std::size_t p = 1 + seed % 3;
            StaircaseOracle f(p, 7, seed + 40);
            for (StrategyKind k : {StrategyKind::GG, StrategyKind::AG}) {
                for (const auto& lc : level_completions(k, f, 3, seed)) {
                    const auto m = (std::uint64_t{1} << lc.level) + 1;
                    const auto sg = gen_sg(p, static_cast<std::uint64_t>(std::pow(m, p)));
                    CHECK(lc.v_uncertain == static_design_volume(sg, f));
                }
            }
        }
    }

    TEST_CASE("no strategy evaluates a certain point") {
        for (StrategyKind k : {StrategyKind::GG, StrategyKind::AG, StrategyKind::GI, StrategyKind::AI, StrategyKind::AMC}) {
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                ArctanOracle f(3, 2.0 + 0.1 * static_cast<double>(seed));
                const auto r = run_strategy(make_spec(k, 3, 60, seed), f);
                CHECK(r.trace.size() == 60);
                if (k == StrategyKind::GG || k == StrategyKind::GI) {
                    check_unknown_at_level_start(r.trace, 3);
                } else {
                    check_no_wasted_runs(r.trace, 3);
                }
            }
        }
        auto ale = make_spec(StrategyKind::ALE, 2, 30, 2);
        ale.ale_candidate_grid = 16;
        const auto r = run_strategy(ale, ArctanOracle(2, 1.4));
        CHECK(r.trace.size() == 30);
        check_no_wasted_runs(r.trace, 2);
    }

    TEST_CASE("propose is idempotent and budget zero is empty") {
        auto s = make_strategy(make_spec(StrategyKind::GG, 2, 5, 8));
        const auto a = s->propose();
        const auto b = s->propose();
        REQUIRE(a);
        CHECK(a->point == b->point);
        s->observe(Label::Negative);
        CHECK(s->evaluations() == 1);
        CHECK_THROWS_AS(s->observe(Label::Negative), UsageError);

        const auto r = run_strategy(make_spec(StrategyKind::AG, 2, 0), IllustrationOracle());
        CHECK(r.trace.empty());
        CHECK(r.completion == Completion::Budget);
    }

    TEST_CASE("a contradicting label leaves the point pending") {
        auto s = make_strategy(make_spec(StrategyKind::SG, 1, 3));
        REQUIRE(s->propose()->point == UnitPoint{0.0});
        s->observe(Label::Positive);
        REQUIRE(s->propose()->point == UnitPoint{0.5});
        CHECK_THROWS_AS(s->observe(Label::Negative), NonMonotoneError);
        REQUIRE(s->pending());
        CHECK(s->pending()->point == UnitPoint{0.5});
        CHECK(s->evaluations() == 1);
        s->observe(Label::Positive);
        CHECK(s->evaluations() == 2);
    }

    TEST_CASE("grid strategies certify completion") {
        const auto r = run_strategy(make_spec(StrategyKind::AG, 2, 1000), ConstantOracle(2, Label::Positive));
        CHECK(r.completion == Completion::Certified);
        // (1,0), (0,1), then (0,0) certifies the cube.
        REQUIRE(r.trace.size() == 3);
        CHECK(r.trace.back().point == UnitPoint{0.0, 0.0});
    }

    TEST_CASE("AMC") {
        auto spec = make_spec(StrategyKind::AMC, 1, 1'000'000, 5);
        spec.amc_try_budget = 500;
        AmcStrategy amc(spec, {});
        const auto r = run_strategy(amc, HalfSpaceOracle(1));
        CHECK(r.completion == Completion::TryBudget);
        CHECK(amc.tries() == 500);
        CHECK(r.trace.size() < 40);
        CHECK(r.trace.size() >= 3);

        auto first = make_strategy(make_spec(StrategyKind::AMC, 3, 1, 9));
        CHECK(first->propose().has_value());

        auto capped = make_spec(StrategyKind::AMC, 1, 100, 1);
        capped.amc_max_attempts = 10;
        const auto c = run_strategy(capped, HalfSpaceOracle(1));
        CHECK(c.completion == Completion::AmcConverged);
    }

    TEST_CASE("AMC expected evaluations match the acceptance-rate sum") {
        const std::uint64_t tries = 50;
        double total = 0.0, total_sq = 0.0;
        const int reps = 20'000;
        for (int r = 0; r < reps; ++r) {
            auto spec = make_spec(StrategyKind::AMC, 1, 1'000'000, 1000 + r);
            spec.amc_try_budget = tries;
            const double m = static_cast<double>(run_strategy(spec, HalfSpaceOracle(1)).trace.size());
            total += m;
            total_sq += m * m;
        }
        const double mean = total / reps;
        const double se = std::sqrt((total_sq / reps - mean * mean) / reps);
        CHECK(std::abs(mean - amc_expected_evaluations_p1(tries)) <= 4 * se);
    }

    TEST_CASE("ALE") {
        auto spec = make_spec(StrategyKind::ALE, 2, 40, 3);
        spec.ale_candidate_grid = 32;
        AleStrategy ale(spec, {});
        ArctanOracle f(2, 1.3);
        const auto r = run_strategy(ale, f);
        CHECK(r.trace.size() == 40);
        REQUIRE(ale.last_model().has_value());
        CHECK(ale.last_model()->platt.has_value());
        AleStrategy again(spec, {});
        CHECK(run_strategy(again, f).trace == r.trace);
    }

    TEST_CASE("trace and strategy description serialization") {
        const auto r = run_strategy(make_spec(StrategyKind::AI, 2, 20), IllustrationOracle());
        const std::string text = trace_to_ndjson(r.trace);
        CHECK(std::count(text.begin(), text.end(), '\n') == 20);
        CHECK(trace_from_ndjson(text) == r.trace);
        auto spec = make_spec(StrategyKind::AMC, 3, 77, 12);
        spec.amc_try_budget = 99;
        CHECK(to_json(strategy_spec_from_json(to_json(spec))) == to_json(spec));
        CHECK_THROWS_AS(parse_strategy_kind("XYZ"), UsageError);
        CHECK(parse_strategy_kind("ag") == StrategyKind::AG);
    }

    TEST_CASE("lattice-restricted runs stay on the lattice") {
        Strategy::Lattice lat{{0.0, 0.25, 0.5, 1.0}, {0.0, 0.125, 0.5, 0.75, 1.0}};
        for (StrategyKind k : {StrategyKind::GG, StrategyKind::AG, StrategyKind::AMC}) {
            auto s = make_strategy(make_spec(k, 2, 20, 2), lat);
            const auto r = run_strategy(*s, HalfSpaceOracle(2, 0.8));
            for (const auto& step : r.trace) {
                CHECK(std::find(lat[0].begin(), lat[0].end(), step.point[0]) != lat[0].end());
                CHECK(std::find(lat[1].begin(), lat[1].end(), step.point[1]) != lat[1].end());
            }
        }
    }
}
