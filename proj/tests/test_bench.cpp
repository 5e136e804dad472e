#include "doctest.h"

#include "adagrid/bench.hpp"
#include "adagrid/volume.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace adagrid;

namespace {

const std::string kPlans = std::string(ADAGRID_SOURCE_DIR) + "/plans";

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

}  // namespace

TEST_SUITE("bench") {
    TEST_CASE("plan problems are reported together") {
        const auto j = nlohmann::json::parse(R"({"oracle": {"family": "arctan", "p": 0},
                                                "strategies": ["AG", "BOGUS"], "budgets": [32, 16],
                                                "colour": "blue"})");
        try {
            plan_from_json(j);
            FAIL("expected UsageError");
        } catch (const UsageError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("BOGUS") != std::string::npos);
            CHECK(msg.find("colour") != std::string::npos);
            CHECK(std::count(msg.begin(), msg.end(), '\n') >= 3);
        }
    }

    TEST_CASE("plan JSON round trip and the full overlay") {
        const auto j = read_json(kPlans + "/arctan_p2_desk.json");
        const auto desk = plan_from_json(j);
        CHECK(desk.oracle.draws == 20);
        CHECK(desk.budgets == std::vector<std::size_t>{16, 32, 64});
        const auto full = plan_from_json(j, true);
        CHECK(full.oracle.draws == 100);
        CHECK(full.test_points == 100'000);
        CHECK(to_json(plan_from_json(to_json(desk))) == to_json(desk));
        for (int p = 3; p <= 6; ++p) {
            CHECK(validate_plan(plan_from_json(read_json(kPlans + "/arctan_p" + std::to_string(p) + ".json"))).empty());
        }
        CHECK(validate_plan(plan_from_json(read_json(kPlans + "/extreme_p2.json"))).empty());
    }

    TEST_CASE("empty plan") {
        ExperimentPlan plan;
        plan.oracle.draws = 3;
        const auto r = run_plan(plan);
        CHECK(r.rows.empty());
        CHECK(results_to_csv(r.rows) == std::string(kResultCsvHeader) + "\n");
    }

    TEST_CASE("GI at p=1 halves the uncertain length per run") {
        const auto plan = plan_from_json(read_json(kPlans + "/gi_p1_halfspace.json"));
        const auto r = run_plan(plan);
        REQUIRE(r.rows.size() == 10);
        for (const auto& row : r.rows) {
            CHECK(row.v_uncertain == std::ldexp(1.0, -static_cast<int>(row.n)));
            CHECK(std::isnan(row.accuracy));
            CHECK(gamma_cell(row) == "none");
        }
    }

    TEST_CASE("results round trip through CSV and the digest is deterministic") {
        ExperimentPlan plan;
        plan.oracle.kind = OracleFamily::Kind::Arctan;
        plan.oracle.dimension = 2;
        plan.oracle.draws = 2;
        plan.budgets = {8, 16};
        plan.test_points = 500;
        plan.master_seed = 5;
        for (auto k : {StrategyKind::AG, StrategyKind::MC, StrategyKind::SG}) {
            StrategySpec s;
            s.kind = k;
            s.dimension = 2;
            plan.strategies.push_back(s);
        }
        const auto a = run_plan(plan);
        plan.parallelism = 3;
        const auto b = run_plan(plan);
        CHECK(determinism_digest(a.rows) == determinism_digest(b.rows));
        CHECK(a.error_count == 0);
        // SG only at the square budget.
        CHECK(std::count_if(a.rows.begin(), a.rows.end(), [](auto& r) { return r.strategy == "SG"; }) == 2);

        const auto back = results_from_csv(results_to_csv(a.rows));
        REQUIRE(back.size() == a.rows.size());
        for (std::size_t i = 0; i < back.size(); ++i) {
            CHECK(back[i].strategy == a.rows[i].strategy);
            CHECK(back[i].oracle_id == a.rows[i].oracle_id);
            CHECK(back[i].n == a.rows[i].n);
            CHECK(back[i].v_uncertain == a.rows[i].v_uncertain);
            CHECK(back[i].accuracy == a.rows[i].accuracy);
            CHECK(back[i].gamma == a.rows[i].gamma);
            CHECK(back[i].wall_time_ms == a.rows[i].wall_time_ms);
        }
        CHECK(results_to_csv(back) == results_to_csv(a.rows));

        const auto dir = std::filesystem::temp_directory_path() / "adagrid_bench_test";
        std::filesystem::create_directories(dir);
        const auto path = (dir / "rows.csv").string();
        emit_results(a, plan, path);
        std::ifstream in(path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        CHECK(text == results_to_csv(a.rows));
        const auto meta = read_json(path + ".meta.json");
        CHECK(meta.at("master_seed") == 5);
        CHECK(meta.at("software_version") == software_version());
        CHECK(meta.at("determinism_digest") == determinism_digest(a.rows));
        std::filesystem::remove_all(dir);
        CHECK_THROWS_AS(emit_results(a, plan, "/nonexistent/dir/out.csv"), IoError);
    }

    TEST_CASE("accuracy") {
        ConstantOracle pos(2, Label::Positive);
        const auto m = majority_model({{{0.1, 0.2}, Label::Positive}});
        CHECK(accuracy_eval(m, pos, 1000, 1) == 1.0);

        // A seeded coin against the balanced half-space.
        HalfSpaceOracle half(2);
        Rng coin(3), pts(4);
        std::vector<UnitPoint> test;
        std::vector<Label> truth;
        for (int i = 0; i < 100'000; ++i) {
            UnitPoint x{pts.uniform01(), pts.uniform01()};
            truth.push_back(half.evaluate(x));
            test.push_back(x);
        }
        const double acc = accuracy_eval(test, truth, [&](const UnitPoint&) {
            return coin.uniform01() < 0.5 ? Label::Negative : Label::Positive;
        });
        CHECK(std::abs(acc - 0.5) <= 0.005);
    }

    TEST_CASE("hybrid predictor is right on the certain region") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            ArctanOracle f(2, 1.0 + 0.1 * static_cast<double>(seed));
            StrategySpec spec;
            spec.kind = StrategyKind::AG;
            spec.dimension = 2;
            spec.budget = 32;
            const auto run = run_strategy(spec, f);
            const auto model = fit_tuned(run.state.evaluated(), seed);
            const double v = uncertain_volume(run.state).v_uncertain;
            Rng rng(100 + seed);
            std::vector<UnitPoint> test;
            std::vector<Label> truth;
            for (int i = 0; i < 20'000; ++i) {
                UnitPoint x{rng.uniform01(), rng.uniform01()};
                truth.push_back(f.evaluate(x));
                test.push_back(x);
            }
            const double acc =
                accuracy_eval(test, truth, [&](const UnitPoint& x) { return hybrid_predict(run.state, model, x); });
            CHECK(acc >= 1.0 - v - 0.02);
        }
    }

    TEST_CASE("negative proportion tracks") {
        const auto spec = [](StrategyKind k, std::size_t n) {
            StrategySpec s;
            s.kind = k;
            s.dimension = 2;
            s.budget = n;
            return s;
        };
        const auto neg = run_strategy(spec(StrategyKind::MC, 50), ConstantOracle(2, Label::Negative));
        for (double v : negative_proportion_track(neg.trace)) CHECK(v == 1.0);

        ArctanOracle rare(2, 0.69);
        auto mc = spec(StrategyKind::MC, 2000);
        mc.seed = 3;
        const auto mt = negative_proportion_track(run_strategy(mc, rare).trace);
        CHECK(std::abs(mt.back() - 0.05) <= 3 * std::sqrt(0.05 * 0.95 / 2000) + 0.01);

        const auto ag = spec(StrategyKind::AG, 256);
        const auto at = negative_proportion_track(run_strategy(ag, rare).trace);
        CHECK(at[63] > 0.05);
        CHECK(at[255] > 0.05);
        CHECK(at[255] > at[63]);
    }

    TEST_CASE("shipped desk plan: AG below SG wherever both are run") {
        auto plan = plan_from_json(read_json(kPlans + "/arctan_p2_desk.json"));
        plan.strategies.erase(std::remove_if(plan.strategies.begin(), plan.strategies.end(),
                                             [](const StrategySpec& s) {
                                                 return s.kind != StrategyKind::AG && s.kind != StrategyKind::SG;
                                             }),
                              plan.strategies.end());
        plan.accuracy = false;
        const auto s = summarize(run_plan(plan).rows);
        std::size_t shared = 0;
        for (std::size_t n : plan.budgets) {
            const auto* ag = find_summary(s, "AG", n);
            const auto* sg = find_summary(s, "SG", n);
            if (!ag || !sg) continue;
            ++shared;
            CHECK(ag->mean_v < sg->mean_v);
        }
        CHECK(shared == 2);
    }
}
