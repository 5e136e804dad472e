#include "adagrid/checks.hpp"

#include "adagrid/static_designs.hpp"
#include "adagrid/svc.hpp"
#include "adagrid/theory.hpp"
#include "adagrid/volume.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace adagrid {

namespace {

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

OraclePtr random_staircase(std::size_t p, std::uint64_t seed) {
    Rng r(seed);
    const std::size_t m = 2 + r.uniform_index(8);
    return std::make_shared<StaircaseOracle>(p, m, derive_seed(seed, 1));
}

CheckResult si_identity(const CheckOptions& opt) {
    CheckResult r;
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::size_t p = 1; p <= 3; ++p) {
        for (std::uint64_t m = 1; m <= 5; ++m) {
            std::uint64_t n = 1;
            for (std::size_t k = 0; k < p; ++k) n *= m;
            const auto design = gen_si(p, n);
            const double expected = si_volume(p, n);
            for (std::uint64_t o = 0; o < 50; ++o) {
                auto oracle = random_staircase(p, derive_seed(opt.seed, p * 100 + m, o));
                worst = std::max(worst, std::abs(static_design_volume(design, *oracle) - expected));
                ++cases;
            }
        }
    }
    r.passed = worst <= 1e-12;
    r.metrics = {{"cases", cases}, {"max_abs_error", worst}};
    r.detail = std::to_string(cases) + " oracle/design pairs, max |v - formula| = " + fmt(worst, 3);
    return r;
}

CheckResult sg_worst(const CheckOptions& opt) {
    CheckResult r;
    double attain_err = 0.0;
    std::size_t exceed = 0, cases = 0;
    for (std::size_t p = 1; p <= 3; ++p) {
        for (std::uint64_t m = 2; m <= 6; ++m) {
            std::uint64_t n = 1;
            for (std::size_t k = 0; k < p; ++k) n *= m;
            const auto design = gen_sg(p, n);
            const double bound = sg_worst_volume(p, n);
            attain_err = std::max(attain_err, std::abs(static_design_volume(design, UpperFaceOracle(p)) - bound));
            for (std::uint64_t o = 0; o < 200; ++o) {
                auto oracle = random_staircase(p, derive_seed(opt.seed, 7000 + p * 100 + m, o));
                if (static_design_volume(design, *oracle) > bound + 1e-12) ++exceed;
                ++cases;
            }
        }
    }
    r.passed = attain_err <= 1e-12 && exceed == 0;
    r.metrics = {{"attainment_error", attain_err}, {"exceedances", exceed}, {"random_cases", cases}};
    r.detail = "upper-face oracle error " + fmt(attain_err, 3) + ", " + std::to_string(exceed) + " of " +
               std::to_string(cases) + " random oracles exceed the bound";
    return r;
}

CheckResult gi_count(const CheckOptions& opt) {
    CheckResult r;
    std::size_t mismatches = 0, gg_violations = 0, cases = 0;
    for (std::size_t p = 1; p <= 3; ++p) {
        for (std::uint64_t o = 0; o < 200; ++o) {
            auto oracle = random_staircase(p, derive_seed(opt.seed, 300 + p, o));
            const auto gi = level_completions(StrategyKind::GI, *oracle, 3, derive_seed(opt.seed, 301, o));
            for (const auto& lc : gi) {
                if (lc.evaluations != gi_count_exact(p, lc.level)) ++mismatches;
            }
            const auto gg = level_completions(StrategyKind::GG, *oracle, 3, derive_seed(opt.seed, 302, o));
            for (const auto& lc : gg) {
                if (lc.evaluations > gg_count_bound(p, lc.level)) ++gg_violations;
            }
            ++cases;
        }
    }
    r.passed = mismatches == 0 && gg_violations == 0;
    r.metrics = {{"oracles", cases}, {"gi_mismatches", mismatches}, {"gg_bound_violations", gg_violations}};
    r.detail = std::to_string(mismatches) + " GI count mismatches, " + std::to_string(gg_violations) +
               " GG bound violations over " + std::to_string(cases) + " oracles";
    return r;
}

CheckResult level_equivalence(const CheckOptions& opt) {
    CheckResult r;
    std::size_t mismatches = 0, cases = 0;
    for (std::size_t p = 1; p <= 3; ++p) {
        for (std::uint64_t o = 0; o < 30; ++o) {
            auto oracle = random_staircase(p, derive_seed(opt.seed, 400 + p, o));
            for (auto kind : {StrategyKind::GG, StrategyKind::AG}) {
                for (const auto& lc : level_completions(kind, *oracle, 3, derive_seed(opt.seed, 401, o))) {
                    std::uint64_t n = 1;
                    for (std::size_t k = 0; k < p; ++k) n *= (std::uint64_t{1} << lc.level) + 1;
                    const double sg = static_design_volume(gen_sg(p, n), *oracle);
                    if (sg != lc.v_uncertain) ++mismatches;
                    ++cases;
                }
            }
        }
    }
    r.passed = mismatches == 0;
    r.metrics = {{"cases", cases}, {"mismatches", mismatches}};
    r.detail = std::to_string(mismatches) + " of " + std::to_string(cases) + " level completions differ from the full grid";
    return r;
}

CheckResult ag_illustration(const CheckOptions&) {
    CheckResult r;
    IllustrationOracle o;
    StrategySpec s;
    s.kind = StrategyKind::AG;
    s.dimension = 2;
    s.budget = 16;
    double v8 = -1.0, v16 = -1.0;
    run_strategy(s, o, [&](const StepRecord& rec, const DesignState& st) {
        if (rec.index == 8) v8 = uncertain_volume(st).v_uncertain;
        if (rec.index == 16) v16 = uncertain_volume(st).v_uncertain;
    });
    r.passed = std::abs(v8 - 0.375) <= 0.01 && std::abs(v16 - 0.188) <= 0.01;
    r.metrics = {{"v8", v8}, {"v16", v16}};
    r.detail = "v(8) = " + fmt(v8) + ", v(16) = " + fmt(v16);
    return r;
}

CheckResult mc_p1(const CheckOptions& opt) {
    CheckResult r;
    const std::uint64_t reps = 100'000;
    HalfSpaceOracle f(1);
    bool ok = true;
    nlohmann::json rows = nlohmann::json::array();
    std::ostringstream detail;
    for (std::uint64_t n : {1, 5, 10, 20}) {
        double sum = 0.0, sum2 = 0.0;
        for (std::uint64_t i = 0; i < reps; ++i) {
            const double v = static_design_volume(gen_mc(1, n, derive_seed(opt.seed, n, i)), f);
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / reps;
        const double se = std::sqrt(std::max(0.0, sum2 / reps - mean * mean) / reps);
        const double expected = mc_worst_expected_volume_p1(n);
        const double z = (mean - expected) / se;
        ok = ok && std::abs(z) <= 3.0;
        rows.push_back({{"n", n}, {"mean", mean}, {"stderr", se}, {"expected", expected}, {"z", z}});
        detail << "n=" << n << " z=" << fmt(z, 3) << " ";
    }
    r.passed = ok;
    r.metrics = {{"replicates", reps}, {"rows", rows}};
    r.detail = detail.str();
    return r;
}

CheckResult amc_p1(const CheckOptions& opt) {
    CheckResult r;
    const std::uint64_t reps = opt.full ? 200'000 : 100'000;
    const std::uint64_t n = 5000;
    HalfSpaceOracle f(1);
    double sum = 0.0, sum2 = 0.0;
    for (std::uint64_t i = 0; i < reps; ++i) {
        StrategySpec s;
        s.kind = StrategyKind::AMC;
        s.dimension = 1;
        s.budget = n;
        s.seed = derive_seed(opt.seed, 500, i);
        s.amc_try_budget = n;
        const double m = static_cast<double>(run_strategy(s, f).trace.size());
        const double d = m - 2.0 * std::log(static_cast<double>(n));
        sum += d;
        sum2 += d * d;
    }
    const double mean = sum / reps;
    const double se = std::sqrt(std::max(0.0, sum2 / reps - mean * mean) / reps);
    const double target = amc_asymptote_p1();
    r.passed = std::abs(mean - target) <= 0.05;
    r.metrics = {{"replicates", reps}, {"mean", mean}, {"stderr", se}, {"target", target},
                 {"finite_n_expectation", amc_expected_evaluations_p1(n) - 2.0 * std::log(static_cast<double>(n))}};
    r.detail = "mean m(5000) - 2 ln 5000 = " + fmt(mean) + " (se " + fmt(se, 3) + "), target " + fmt(target);
    return r;
}

CheckResult rate_floors(const CheckOptions& opt) {
    CheckResult r;
    std::size_t floor_violations = 0, gi_mismatches = 0, ag_violations = 0, cases = 0;
    Rng rng(opt.seed);
    std::vector<double> thresholds;
    for (int i = 0; i < 40; ++i) thresholds.push_back(rng.uniform01());
    for (double t : {0.0, 0.25, 0.5, 1.0 / 3.0, 0.75, 1.0}) thresholds.push_back(t);

    const StrategyKind kinds[] = {StrategyKind::GG, StrategyKind::AG, StrategyKind::GI, StrategyKind::AI,
                                  StrategyKind::AMC, StrategyKind::MC, StrategyKind::LHD};
    for (std::size_t n = 1; n <= 20; ++n) {
        const double floor = std::ldexp(1.0, -static_cast<int>(n));
        for (auto kind : kinds) {
            StrategySpec s;
            s.kind = kind;
            s.dimension = 1;
            s.budget = n;
            s.seed = derive_seed(opt.seed, 600 + n, static_cast<std::uint64_t>(kind));
            double sup = adversarial_threshold_p1(s).v_uncertain;
            for (double t : thresholds) {
                const double v = uncertain_volume(run_strategy(s, HalfSpaceOracle(1, t)).state).v_uncertain;
                sup = std::max(sup, v);
                if (kind == StrategyKind::GI && v != floor) ++gi_mismatches;
                if (kind == StrategyKind::AG && n >= 2 && v > std::ldexp(1.0, 2 - static_cast<int>(n))) ++ag_violations;
            }
            if (sup < floor) ++floor_violations;
            ++cases;
        }
    }
    r.passed = floor_violations == 0 && gi_mismatches == 0 && ag_violations == 0;
    r.metrics = {{"cases", cases},
                 {"floor_violations", floor_violations},
                 {"gi_mismatches", gi_mismatches},
                 {"ag_rate_violations", ag_violations}};
    r.detail = std::to_string(floor_violations) + " floor violations, " + std::to_string(gi_mismatches) +
               " GI deviations from 2^-n, " + std::to_string(ag_violations) + " AG rate violations";
    return r;
}

CheckResult comparable_pairs(const CheckOptions& opt) {
    CheckResult r;
    const auto sg2 = count_comparable_pairs(gen_sg(2, 81));
    const auto si2 = count_comparable_pairs(gen_si(2, 81));
    const auto sg5 = count_comparable_pairs(gen_sg(5, 243));
    double lhd = 0.0, mc = 0.0;
    const int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
        lhd += static_cast<double>(count_comparable_pairs(gen_lhd(2, 81, derive_seed(opt.seed, 800, s))));
        mc += static_cast<double>(count_comparable_pairs(gen_mc(2, 81, derive_seed(opt.seed, 801, s))));
    }
    lhd /= seeds;
    mc /= seeds;
    r.passed = sg2 == 1944 && si2 == 1944 && sg5 == 7533 && std::abs(lhd - 1619.0) <= 30.0 && std::abs(mc - 1620.0) <= 30.0;
    r.metrics = {{"sg_p2_n81", sg2}, {"si_p2_n81", si2}, {"sg_p5_n243", sg5}, {"lhd_mean", lhd}, {"mc_mean", mc}};
    r.detail = "SG(2,81)=" + std::to_string(sg2) + " SI(2,81)=" + std::to_string(si2) + " SG(5,243)=" +
               std::to_string(sg5) + " LHD=" + fmt(lhd) + " MC=" + fmt(mc);
    return r;
}

CheckResult table_constants(const CheckOptions&) {
    CheckResult r;
    const double mc_table[] = {2.51, 2.43, 2.67, 2.87, 3.06};
    const double amc_table[] = {12.57, 4.65, 4.09, 3.94, 3.96};
    const double grid_table[] = {8.0, 6.0, 6.64, 7.60, 8.64};
    bool ok = std::abs(amc_constant(1) - 1.78) < 0.005;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t p = 2; p <= 6; ++p) {
        const double c = mc_constant(p), a = amc_constant(p), g = grid_adaptive_constant(p);
        ok = ok && std::abs(c - mc_table[p - 2]) < 0.005 && std::abs(a - amc_table[p - 2]) < 0.005 &&
             std::abs(g - grid_table[p - 2]) < 0.005;
        rows.push_back({{"p", p}, {"mc", c}, {"amc", a}, {"grid", g}});
    }
    r.passed = ok;
    r.metrics = {{"rows", rows}};
    r.detail = "MC, AMC and grid constants for p = 2..6 rounded to two decimals";
    return r;
}

CheckResult bounds_order(const CheckOptions&) {
    CheckResult r;
    std::size_t violations = 0, compared = 0;
    for (std::size_t p = 1; p <= 4; ++p) {
        for (double e = 0; e <= 8; e += 0.25) {
            const auto n = static_cast<std::uint64_t>(std::pow(10.0, e));
            const auto a = adaptive_lower_bound(p, n);
            const auto s = static_lower_bound(p, n);
            if (std::holds_alternative<BoundReport>(a) && std::holds_alternative<BoundReport>(s)) {
                ++compared;
                if (std::get<BoundReport>(a).value > std::get<BoundReport>(s).value) ++violations;
            }
        }
    }
    r.passed = violations == 0 && compared > 0;
    r.metrics = {{"compared", compared}, {"violations", violations}};
    r.detail = std::to_string(violations) + " of " + std::to_string(compared) + " (p, n) pairs violate adaptive <= static";
    return r;
}

CheckResult si_asymptote(const CheckOptions&) {
    CheckResult r;
    double worst = 0.0;
    for (std::size_t p = 1; p <= 3; ++p) {
        for (std::uint64_t m = 50; m <= 200; m += 50) {
            std::uint64_t n = 1;
            for (std::size_t k = 0; k < p; ++k) n *= m;
            const double ratio = si_volume(p, n) / (static_cast<double>(p) * std::pow(static_cast<double>(n), -1.0 / p));
            worst = std::max(worst, std::abs(ratio - 1.0));
        }
    }
    r.passed = worst <= 0.05;
    r.metrics = {{"max_relative_deviation", worst}};
    r.detail = "max |ratio - 1| = " + fmt(worst, 4);
    return r;
}

CheckResult mu_calibration(const CheckOptions& opt) {
    CheckResult r;
    const std::uint64_t samples = opt.full ? 1'000'000 : 200'000;
    bool ok = true;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t p = 2; p <= 6; ++p) {
        const auto range = *arctan_mu_range(p);
        Rng rng(derive_seed(opt.seed, 900, p));
        std::uint64_t below_lo = 0, below_hi = 0;
        std::vector<double> x(p);
        for (std::uint64_t s = 0; s < samples; ++s) {
            for (auto& c : x) c = rng.uniform01();
            const double score = ArctanOracle::score(UnitPoint(x));
            if (score < range.first) ++below_lo;
            if (score < range.second) ++below_hi;
        }
        const double va_lo = static_cast<double>(below_lo) / samples;
        const double va_hi = static_cast<double>(below_hi) / samples;
        ok = ok && va_lo >= 0.08 && va_lo <= 0.12 && va_hi >= 0.88 && va_hi <= 0.92;
        rows.push_back({{"p", p}, {"v_negative_at_lo", va_lo}, {"v_negative_at_hi", va_hi}});
    }
    r.passed = ok;
    r.metrics = {{"samples", samples}, {"rows", rows}};
    r.detail = "negative-region volume at both ends of each mu range";
    return r;
}

CheckResult svc_contract(const CheckOptions& opt) {
    CheckResult r;
    std::size_t imperfect = 0, infeasible = 0, bias_mismatch = 0, fits = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        Rng rng(derive_seed(opt.seed, 1000, s));
        const std::size_t p = 1 + rng.uniform_index(3);
        const std::size_t n = 10 + rng.uniform_index(51);
        const double mu = arctan_mu_range(std::max<std::size_t>(p, 2))->first + 0.5;
        std::vector<LabeledPoint> data;
        std::vector<double> x(p);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& c : x) c = rng.uniform01();
            UnitPoint q(x);
            double score = 0.0;
            for (double c : x) score += c;
            const Label l = p == 1 ? (score >= 0.5 ? Label::Positive : Label::Negative)
                                   : (ArctanOracle::score(q) >= mu ? Label::Positive : Label::Negative);
            data.push_back({q, l});
        }
        SvcModel m = fit_tuned(data, derive_seed(opt.seed, 1001, s));
        if (m.kind == SvcModel::Kind::Majority) {
            // Guard unmet: fit at a fixed width instead so the contract is still exercised.
            std::size_t pos = 0;
            for (const auto& d : data) pos += d.label == Label::Positive;
            if (pos == 0 || pos == data.size()) continue;
            m = svc_fit(data, 10.0);
        }
        ++fits;
        for (const auto& d : data) {
            if (m.predict(d.point) != d.label) {
                ++imperfect;
                break;
            }
        }
        double eq = 0.0;
        bool neg = false;
        for (std::size_t i = 0; i < data.size(); ++i) {
            eq += m.alphas[i] * to_int(data[i].label);
            neg = neg || m.alphas[i] < 0.0;
        }
        if (neg || std::abs(eq) > 1e-8) ++infeasible;
        if (std::abs(recompute_bias(m.points, m.alphas, m.gamma) - m.bias) > 1e-10) ++bias_mismatch;
    }
    r.passed = imperfect == 0 && infeasible == 0 && bias_mismatch == 0 && fits > 0;
    r.metrics = {{"fits", fits}, {"imperfect", imperfect}, {"infeasible", infeasible}, {"bias_mismatch", bias_mismatch}};
    r.detail = std::to_string(imperfect) + " fits below 100% training accuracy, " + std::to_string(infeasible) +
               " infeasible, " + std::to_string(bias_mismatch) + " bias mismatches over " + std::to_string(fits) + " fits";
    return r;
}

}  // namespace

double static_design_volume(const std::vector<UnitPoint>& design, const Oracle& oracle) {
    if (design.empty()) return 1.0;
    DesignState st(design.front().dimension());
    for (const auto& x : design) st.insert({x, oracle.evaluate(x)}, CandidatePolicy::Keep);
    return uncertain_volume(st).v_uncertain;
}

std::vector<LevelCompletion> level_completions(StrategyKind kind, const Oracle& oracle, std::uint32_t max_level,
                                               std::uint64_t seed) {
    if (!is_grid(kind)) throw UsageError("level_completions needs a grid strategy");
    StrategySpec spec;
    spec.kind = kind;
    spec.dimension = oracle.dimension();
    spec.budget = std::numeric_limits<std::size_t>::max();
    spec.seed = seed;
    auto s = make_strategy(spec, oracle.lattice());
    const bool inner = kind == StrategyKind::GI || kind == StrategyKind::AI;
    std::uint32_t next = inner ? 1 : 0;
    std::vector<LevelCompletion> out;
    auto close_through = [&](std::uint32_t upto) {
        for (; next <= upto && next <= max_level; ++next) {
            out.push_back({next, s->evaluations(), uncertain_volume(s->state()).v_uncertain});
        }
    };
    while (next <= max_level) {
        auto prop = s->propose();
        if (!prop) {
            close_through(max_level);
            break;
        }
        if (prop->level > 0) close_through(prop->level - 1);
        if (next > max_level) break;
        s->observe(oracle.evaluate(prop->point));
    }
    return out;
}

AdversaryOutcome adversarial_threshold_p1(const StrategySpec& spec) {
    if (spec.dimension != 1) throw UsageError("adversary works in one dimension");
    auto s = make_strategy(spec);
    while (auto prop = s->propose()) {
        const double x = prop->point[0];
        const auto& st = s->state();
        const double a = st.neg_frontier().empty() ? 0.0 : st.neg_frontier().front()[0];
        const double b = st.pos_frontier().empty() ? 1.0 : st.pos_frontier().front()[0];
        Label l;
        if (!st.neg_frontier().empty() && x <= a) {
            l = Label::Negative;
        } else if (!st.pos_frontier().empty() && x >= b) {
            l = Label::Positive;
        } else {
            // Keep the longer of (a, x) and (x, b) uncertain.
            l = (x - a) < (b - x) ? Label::Negative : Label::Positive;
        }
        s->observe(l);
    }
    AdversaryOutcome out;
    const auto& st = s->state();
    const double a = st.neg_frontier().empty() ? 0.0 : st.neg_frontier().front()[0];
    const double b = st.pos_frontier().empty() ? 1.0 : st.pos_frontier().front()[0];
    out.threshold = st.neg_frontier().empty() ? 0.0 : 0.5 * (a + b);
    out.v_uncertain = uncertain_volume(st).v_uncertain;
    out.evaluations = s->evaluations();
    return out;
}

const std::vector<CheckInfo>& theory_checks() {
    static const std::vector<CheckInfo> checks = {
        {"si-identity", "inner grid leaves 1 - n/(m+1)^p on every monotone oracle", si_identity},
        {"sg-worst", "full grid worst case is attained and never exceeded", sg_worst},
        {"gi-count", "GI level-completion counts are exact; GG respects its count bound", gi_count},
        {"level-equivalence", "GG/AG level completions match the full grid", level_equivalence},
        {"ag-illustration", "AG on the illustration reaches 0.375 at 8 runs and 0.188 at 16", ag_illustration},
        {"mc-p1", "MC expected volume at p = 1 matches (2 - 2^-n)/(n+1)", mc_p1},
        {"amc-p1", "AMC evaluations among n tries approach 2 ln n + 2(gamma - ln 2)", amc_p1},
        {"rate-floors", "p = 1: no design beats 2^-n in the worst case; GI hits it exactly", rate_floors},
        {"comparable-pairs", "ordered-pair counts of SG, SI, LHD and MC", comparable_pairs},
        {"table-constants", "asymptotic constants of the MC, AMC and adaptive grid tables", table_constants},
        {"bounds-order", "adaptive lower bound never exceeds the static one", bounds_order},
        {"si-asymptote", "inner-grid volume approaches p n^(-1/p)", si_asymptote},
        {"mu-calibration", "arctan mu ranges give negative volumes near 10% and 90%", mu_calibration},
        {"svc-contract", "SVC fits separate their training data and satisfy the dual constraints", svc_contract},
    };
    return checks;
}

CheckResult run_check(const std::string& name, const CheckOptions& opt) {
    for (const auto& c : theory_checks()) {
        if (c.name != name) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult r = c.run(opt);
        r.name = name;
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return r;
    }
    std::string names;
    for (const auto& c : theory_checks()) names += (names.empty() ? "" : ", ") + c.name;
    throw UsageError("unknown check '" + name + "'; available: " + names);
}

}  // namespace adagrid
