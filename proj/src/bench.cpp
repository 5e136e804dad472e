#include "adagrid/bench.hpp"

#include "adagrid/static_designs.hpp"
#include "adagrid/volume.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace adagrid {

namespace {

constexpr std::uint64_t kOracleStream = 0x6f7261636c65;  // "oracle"
constexpr std::uint64_t kTestStream = 0x74657374;        // "test"

const char* family_name(OracleFamily::Kind k) {
    switch (k) {
        case OracleFamily::Kind::Arctan: return "arctan";
        case OracleFamily::Kind::Fixed: return "fixed";
        case OracleFamily::Kind::Staircase: return "staircase";
    }
    return "arctan";
}

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw UsageError("bad number '" + s + "'");
    return v;
}

OraclePtr replicate_oracle(const ExperimentPlan& plan, std::size_t r) {
    const auto& fam = plan.oracle;
    const std::uint64_t seed = derive_seed(plan.master_seed, r, kOracleStream);
    switch (fam.kind) {
        case OracleFamily::Kind::Arctan: {
            const auto range = fam.mu_range ? *fam.mu_range : *arctan_mu_range(fam.dimension);
            Rng rng(seed);
            const double mu = range.first + (range.second - range.first) * rng.uniform01();
            return std::make_shared<ArctanOracle>(fam.dimension, mu);
        }
        case OracleFamily::Kind::Staircase:
            return std::make_shared<StaircaseOracle>(fam.dimension, fam.staircase_resolution, seed);
        case OracleFamily::Kind::Fixed:
            return make_oracle(fam.fixed, plan.base_dir);
    }
    throw UsageError("unknown oracle family");
}

struct TestSet {
    std::vector<UnitPoint> points;
    std::vector<Label> truth;
};

TestSet make_test_set(const Oracle& oracle, std::size_t count, std::uint64_t seed) {
    TestSet t;
    Rng rng(seed);
    const auto lattice = oracle.lattice();
    const std::size_t p = oracle.dimension();
    t.points.reserve(count);
    t.truth.reserve(count);
    std::vector<double> x(p);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t k = 0; k < p; ++k) {
            if (!lattice.empty() && !lattice[k].empty()) {
                x[k] = lattice[k][rng.uniform_index(lattice[k].size())];
            } else {
                x[k] = rng.uniform01();
            }
        }
        t.points.emplace_back(x);
        t.truth.push_back(oracle.evaluate(t.points.back()));
    }
    return t;
}

struct TaskContext {
    const ExperimentPlan* plan;
    std::size_t replicate;
    std::size_t strategy_index;
    OraclePtr oracle;
    const TestSet* test;
};

class Stopwatch {
public:
    std::int64_t ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

ResultRow checkpoint_row(const TaskContext& ctx, const StrategySpec& spec, const DesignState& state, std::size_t n,
                         const Stopwatch& clock) {
    const auto& plan = *ctx.plan;
    ResultRow row;
    row.strategy = to_string(spec.kind);
    row.p = spec.dimension;
    row.oracle_id = ctx.oracle->id();
    row.n = n;
    row.replicate = ctx.replicate;

    VolumePolicy vp;
    vp.mc_seed = derive_seed(spec.seed, n, 1);
    const auto vol = uncertain_volume_auto(state, vp);
    row.v_uncertain = vol.v_uncertain;
    row.volume_mc = vol.method == VolumeMethod::MonteCarlo;

    if (plan.accuracy) {
        const SvcModel model = fit_tuned(state.evaluated(), derive_seed(spec.seed, n, 2));
        if (model.kind == SvcModel::Kind::Kernel) row.gamma = model.gamma;
        if (plan.predictor == Predictor::Hybrid) {
            row.accuracy = accuracy_eval(ctx.test->points, ctx.test->truth,
                                         [&](const UnitPoint& x) { return hybrid_predict(state, model, x); });
        } else {
            row.accuracy = accuracy_eval(ctx.test->points, ctx.test->truth,
                                         [&](const UnitPoint& x) { return model.predict(x); });
        }
    } else {
        row.accuracy = std::numeric_limits<double>::quiet_NaN();
    }
    row.wall_time_ms = clock.ms();
    return row;
}

ResultRow error_row(const TaskContext& ctx, const StrategySpec& spec, std::size_t n, const std::string& what) {
    ResultRow row;
    row.strategy = to_string(spec.kind);
    row.p = spec.dimension;
    row.oracle_id = ctx.oracle ? ctx.oracle->id() : std::string("unavailable");
    row.n = n;
    row.replicate = ctx.replicate;
    row.v_uncertain = std::numeric_limits<double>::quiet_NaN();
    row.accuracy = std::numeric_limits<double>::quiet_NaN();
    row.error = what;
    return row;
}

// Evaluates the strategy until it has spent n runs or completes.
void advance(Strategy& s, const Oracle& oracle, std::size_t n) {
    while (s.evaluations() < n) {
        auto prop = s.propose();
        if (!prop) return;
        Label l;
        try {
            l = oracle.evaluate(prop->point);
        } catch (const std::exception& e) {
            throw OracleError(prop->point, e.what());
        }
        s.observe(l);
    }
}

std::vector<ResultRow> run_task(const TaskContext& ctx) {
    const auto& plan = *ctx.plan;
    StrategySpec base = plan.strategies[ctx.strategy_index];
    base.dimension = plan.oracle.dimension;
    base.seed = derive_seed(plan.master_seed, ctx.replicate, ctx.strategy_index);
    std::vector<ResultRow> rows;
    Stopwatch clock;

    const bool fresh_per_budget =
        base.kind == StrategyKind::SG || base.kind == StrategyKind::SI || base.kind == StrategyKind::LHD;
    if (fresh_per_budget) {
        for (std::size_t n : plan.budgets) {
            if (base.kind != StrategyKind::LHD) {
                const auto m = exact_root(n, base.dimension);
                if (!m || (base.kind == StrategyKind::SG && *m < 2)) continue;
            }
            StrategySpec spec = base;
            spec.budget = n;
            try {
                Stopwatch local;
                auto s = make_strategy(spec, ctx.oracle->lattice());
                advance(*s, *ctx.oracle, n);
                rows.push_back(checkpoint_row(ctx, spec, s->state(), n, local));
            } catch (const std::exception& e) {
                rows.push_back(error_row(ctx, spec, n, e.what()));
            }
        }
        return rows;
    }

    StrategySpec spec = base;
    spec.budget = plan.budgets.empty() ? 0 : plan.budgets.back();
    std::size_t done = 0;
    try {
        auto s = make_strategy(spec, ctx.oracle->lattice());
        for (std::size_t n : plan.budgets) {
            advance(*s, *ctx.oracle, n);
            rows.push_back(checkpoint_row(ctx, spec, s->state(), n, clock));
            ++done;
        }
    } catch (const std::exception& e) {
        for (std::size_t i = done; i < plan.budgets.size(); ++i) {
            rows.push_back(error_row(ctx, spec, plan.budgets[i], e.what()));
        }
    }
    return rows;
}

}  // namespace

std::string software_version() { return "0.1.0"; }

// ---------------------------------------------------------------------------
// Plans

std::vector<std::string> validate_plan(const ExperimentPlan& plan) {
    std::vector<std::string> errs;
    const auto& fam = plan.oracle;
    if (fam.dimension == 0) errs.push_back("oracle.p must be positive");
    if (fam.kind == OracleFamily::Kind::Arctan && !fam.mu_range && !arctan_mu_range(fam.dimension)) {
        errs.push_back("oracle.mu_range is required for arctan with p outside 2..6");
    }
    if (fam.mu_range && !(fam.mu_range->first <= fam.mu_range->second)) {
        errs.push_back("oracle.mu_range must be [lo, hi] with lo <= hi");
    }
    if (fam.kind == OracleFamily::Kind::Staircase && fam.staircase_resolution < 1) {
        errs.push_back("oracle.resolution must be positive");
    }
    if (fam.kind == OracleFamily::Kind::Fixed && !fam.fixed.is_object()) {
        errs.push_back("oracle.spec must be an oracle description object");
    }
    for (std::size_t i = 1; i < plan.budgets.size(); ++i) {
        if (plan.budgets[i] <= plan.budgets[i - 1]) {
            errs.push_back("budgets must be strictly increasing (" + std::to_string(plan.budgets[i - 1]) +
                           " then " + std::to_string(plan.budgets[i]) + ")");
            break;
        }
    }
    if (!plan.strategies.empty() && plan.budgets.empty()) errs.push_back("budgets must not be empty");
    if (plan.accuracy && plan.test_points == 0) errs.push_back("test_points must be positive");
    if (plan.parallelism == 0) errs.push_back("parallelism must be positive");
    for (const auto& s : plan.strategies) {
        if (s.dimension != fam.dimension) {
            errs.push_back(std::string("strategy ") + to_string(s.kind) + " has p=" + std::to_string(s.dimension) +
                           " but the oracle has p=" + std::to_string(fam.dimension));
        }
    }
    return errs;
}

ExperimentPlan plan_from_json(const nlohmann::json& input, bool full, const std::string& base_dir) {
    if (!input.is_object()) throw UsageError("plan must be a JSON object");
    nlohmann::json j = input;
    if (j.contains("full")) {
        if (full) j.merge_patch(j.at("full"));
        j.erase("full");
    }
    std::vector<std::string> errs;
    ExperimentPlan plan;
    plan.base_dir = base_dir;
    static const std::set<std::string> known = {"oracle",     "strategies", "budgets",  "test_points", "master_seed",
                                                "parallelism", "accuracy",  "predictor", "description"};
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) errs.push_back("unknown plan key '" + key + "'");
    }
    auto guarded = [&](const char* what, auto&& fn) {
        try {
            fn();
        } catch (const nlohmann::json::exception& e) {
            errs.push_back(std::string(what) + ": " + e.what());
        } catch (const Error& e) {
            errs.push_back(std::string(what) + ": " + e.what());
        }
    };

    guarded("oracle", [&] {
        const auto& o = j.at("oracle");
        const std::string fam = o.value("family", std::string("arctan"));
        auto& f = plan.oracle;
        if (fam == "arctan") {
            f.kind = OracleFamily::Kind::Arctan;
        } else if (fam == "fixed") {
            f.kind = OracleFamily::Kind::Fixed;
        } else if (fam == "staircase") {
            f.kind = OracleFamily::Kind::Staircase;
        } else {
            throw UsageError("unknown oracle family '" + fam + "' (arctan, fixed, staircase)");
        }
        f.draws = o.value("draws", f.kind == OracleFamily::Kind::Fixed ? std::size_t{1} : std::size_t{20});
        if (f.kind == OracleFamily::Kind::Fixed) {
            f.fixed = o.at("spec");
            f.dimension = make_oracle(f.fixed, base_dir)->dimension();
        } else {
            f.dimension = o.at("p").get<std::size_t>();
        }
        if (o.contains("mu_range")) {
            const auto& r = o.at("mu_range");
            if (!r.is_array() || r.size() != 2) throw UsageError("mu_range must be [lo, hi]");
            f.mu_range = std::pair{r[0].get<double>(), r[1].get<double>()};
        }
        f.staircase_resolution = o.value("resolution", f.staircase_resolution);
    });
    guarded("budgets", [&] {
        if (j.contains("budgets")) plan.budgets = j.at("budgets").get<std::vector<std::size_t>>();
    });
    guarded("test_points", [&] { plan.test_points = j.value("test_points", plan.test_points); });
    guarded("master_seed", [&] { plan.master_seed = j.value("master_seed", plan.master_seed); });
    guarded("parallelism", [&] { plan.parallelism = j.value("parallelism", plan.parallelism); });
    guarded("accuracy", [&] { plan.accuracy = j.value("accuracy", plan.accuracy); });
    guarded("predictor", [&] {
        const std::string p = j.value("predictor", std::string("svc"));
        if (p == "svc") {
            plan.predictor = Predictor::Svc;
        } else if (p == "hybrid") {
            plan.predictor = Predictor::Hybrid;
        } else {
            throw UsageError("predictor must be 'svc' or 'hybrid'");
        }
    });
    if (j.contains("strategies")) {
        if (!j.at("strategies").is_array()) {
            errs.push_back("strategies must be an array");
        } else {
            std::size_t idx = 0;
            for (const auto& s : j.at("strategies")) {
                const std::string what = "strategies[" + std::to_string(idx++) + "]";
                guarded(what.c_str(), [&] {
                    nlohmann::json sj = s.is_string() ? nlohmann::json{{"kind", s}} : s;
                    if (!sj.is_object()) throw UsageError("expected a name or an object");
                    if (!sj.contains("p")) sj["p"] = plan.oracle.dimension;
                    sj["budget"] = 0;
                    plan.strategies.push_back(strategy_spec_from_json(sj));
                });
            }
        }
    }
    if (errs.empty()) {
        auto more = validate_plan(plan);
        errs.insert(errs.end(), more.begin(), more.end());
    }
    if (!errs.empty()) {
        std::string msg = "invalid plan:";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw UsageError(msg);
    }
    return plan;
}

nlohmann::json to_json(const ExperimentPlan& plan) {
    nlohmann::json o{{"family", family_name(plan.oracle.kind)}, {"p", plan.oracle.dimension},
                     {"draws", plan.oracle.draws}};
    if (plan.oracle.mu_range) o["mu_range"] = {plan.oracle.mu_range->first, plan.oracle.mu_range->second};
    if (plan.oracle.kind == OracleFamily::Kind::Fixed) o["spec"] = plan.oracle.fixed;
    if (plan.oracle.kind == OracleFamily::Kind::Staircase) o["resolution"] = plan.oracle.staircase_resolution;
    nlohmann::json strategies = nlohmann::json::array();
    for (const auto& s : plan.strategies) {
        auto sj = to_json(s);
        sj.erase("budget");
        sj.erase("seed");
        strategies.push_back(sj);
    }
    return {{"oracle", o},
            {"strategies", strategies},
            {"budgets", plan.budgets},
            {"test_points", plan.test_points},
            {"master_seed", plan.master_seed},
            {"parallelism", plan.parallelism},
            {"accuracy", plan.accuracy},
            {"predictor", plan.predictor == Predictor::Svc ? "svc" : "hybrid"}};
}

// ---------------------------------------------------------------------------
// Running

double accuracy_eval(const std::vector<UnitPoint>& test, const std::vector<Label>& truth,
                     const std::function<Label(const UnitPoint&)>& predict) {
    if (test.empty()) return 1.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < test.size(); ++i) hits += predict(test[i]) == truth[i];
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

double accuracy_eval(const SvcModel& model, const Oracle& oracle, std::size_t test_points, std::uint64_t seed) {
    const auto t = make_test_set(oracle, test_points, seed);
    return accuracy_eval(t.points, t.truth, [&](const UnitPoint& x) { return model.predict(x); });
}

Label hybrid_predict(const DesignState& state, const SvcModel& model, const UnitPoint& x) {
    switch (state.classify(x)) {
        case Certainty::CertainNegative: return Label::Negative;
        case Certainty::CertainPositive: return Label::Positive;
        case Certainty::Unknown: break;
    }
    return model.predict(x);
}

std::vector<double> negative_proportion_track(const std::vector<StepRecord>& trace) {
    std::vector<double> out;
    out.reserve(trace.size());
    std::size_t neg = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        neg += trace[i].label == Label::Negative;
        out.push_back(static_cast<double>(neg) / static_cast<double>(i + 1));
    }
    return out;
}

BenchResult run_plan(const ExperimentPlan& plan) {
    const auto errs = validate_plan(plan);
    if (!errs.empty()) throw UsageError("invalid plan: " + errs.front());

    BenchResult result;
    const std::size_t reps = plan.oracle.draws;
    const std::size_t ns = plan.strategies.size();
    if (ns == 0) return result;

    std::vector<OraclePtr> oracles(reps);
    std::vector<std::string> oracle_errors(reps);
    std::vector<TestSet> tests(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        nlohmann::json rep{{"replicate", r}};
        try {
            oracles[r] = replicate_oracle(plan, r);
            rep["oracle"] = oracles[r]->to_json();
            rep["oracle_id"] = oracles[r]->id();
        } catch (const std::exception& e) {
            oracle_errors[r] = e.what();
            rep["error"] = e.what();
        }
        nlohmann::json seeds = nlohmann::json::object();
        for (std::size_t s = 0; s < ns; ++s) {
            seeds[std::to_string(s) + ":" + to_string(plan.strategies[s].kind)] = derive_seed(plan.master_seed, r, s);
        }
        rep["strategy_seeds"] = seeds;
        if (plan.accuracy) rep["test_seed"] = derive_seed(plan.master_seed, r, kTestStream);
        result.replicates.push_back(rep);
    }

    // Test sets are built lazily by whichever worker first needs them.
    std::vector<std::once_flag> test_once(reps);
    std::vector<std::vector<ResultRow>> out(reps * ns);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t task = next.fetch_add(1);
            if (task >= out.size()) return;
            TaskContext ctx{&plan, task / ns, task % ns, oracles[task / ns], nullptr};
            StrategySpec spec = plan.strategies[ctx.strategy_index];
            if (!ctx.oracle) {
                for (std::size_t n : plan.budgets) out[task].push_back(error_row(ctx, spec, n, oracle_errors[ctx.replicate]));
                continue;
            }
            if (plan.accuracy) {
                try {
                    std::call_once(test_once[ctx.replicate], [&] {
                        tests[ctx.replicate] = make_test_set(*ctx.oracle, plan.test_points,
                                                             derive_seed(plan.master_seed, ctx.replicate, kTestStream));
                    });
                } catch (const std::exception& e) {
                    for (std::size_t n : plan.budgets) out[task].push_back(error_row(ctx, spec, n, e.what()));
                    continue;
                }
                ctx.test = &tests[ctx.replicate];
            }
            out[task] = run_task(ctx);
        }
    };
    const std::size_t threads = std::min(plan.parallelism, out.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& rows : out) {
        for (auto& row : rows) {
            result.error_count += row.is_error();
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Output

std::string gamma_cell(const ResultRow& r) {
    if (r.is_error()) return "error";
    if (std::isnan(r.accuracy)) return "none";
    return r.gamma ? fmt17(*r.gamma) : "majority";
}

namespace {

std::string csv_text(const std::vector<ResultRow>& rows, bool with_time) {
    std::string out = std::string(kResultCsvHeader) + "\n";
    for (const auto& r : rows) {
        out += csv_escape(r.strategy) + "," + std::to_string(r.p) + "," + csv_escape(r.oracle_id) + "," +
               std::to_string(r.n) + "," + fmt17(r.v_uncertain) + "," + fmt17(r.accuracy) + "," + gamma_cell(r) + "," +
               (with_time ? std::to_string(r.wall_time_ms) : std::string()) + "\n";
    }
    return out;
}

}  // namespace

std::string results_to_csv(const std::vector<ResultRow>& rows) { return csv_text(rows, true); }

std::vector<ResultRow> results_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kResultCsvHeader) {
        throw UsageError(std::string("results CSV must start with the header ") + kResultCsvHeader);
    }
    std::vector<ResultRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = csv_split(line);
        if (f.size() != 8) throw UsageError("line " + std::to_string(lineno) + ": expected 8 columns");
        try {
            ResultRow r;
            r.strategy = f[0];
            r.p = std::stoul(f[1]);
            r.oracle_id = f[2];
            r.n = std::stoul(f[3]);
            r.v_uncertain = parse_double(f[4]);
            r.accuracy = parse_double(f[5]);
            if (f[6] == "error") {
                r.error = "error";
            } else if (f[6] != "majority" && f[6] != "none") {
                r.gamma = parse_double(f[6]);
            }
            r.wall_time_ms = std::stoll(f[7]);
            rows.push_back(std::move(r));
        } catch (const std::logic_error& e) {
            throw UsageError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

std::string determinism_digest(const std::vector<ResultRow>& rows) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : csv_text(rows, false)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void emit_results(const BenchResult& result, const ExperimentPlan& plan, const std::string& path) {
    const std::string csv = results_to_csv(result.rows);
    nlohmann::json errors = nlohmann::json::array();
    nlohmann::json mc_rows = nlohmann::json::array();
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& r = result.rows[i];
        if (r.is_error()) {
            errors.push_back({{"row", i}, {"replicate", r.replicate}, {"strategy", r.strategy}, {"n", r.n},
                              {"message", *r.error}});
        }
        if (r.volume_mc) mc_rows.push_back(i);
    }
    nlohmann::json meta{{"plan", to_json(plan)},
                        {"master_seed", plan.master_seed},
                        {"software_version", software_version()},
                        {"columns", kResultCsvHeader},
                        {"predictor", plan.predictor == Predictor::Svc ? "svc" : "hybrid (certain regions, then svc)"},
                        {"row_count", result.rows.size()},
                        {"error_count", result.error_count},
                        {"determinism_digest", determinism_digest(result.rows)},
                        {"replicates", result.replicates},
                        {"volume_monte_carlo_rows", mc_rows},
                        {"errors", errors}};
    auto write = [](const std::string& p, const std::string& text) {
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open '" + p + "' for writing");
        f << text;
        f.close();
        if (!f) throw IoError("failed writing '" + p + "'");
    };
    write(path, csv);
    write(path + ".meta.json", meta.dump(2) + "\n");
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
    struct Acc {
        std::size_t count = 0;
        double sv = 0, sv2 = 0, sa = 0;
    };
    std::map<std::pair<std::string, std::size_t>, Acc> acc;
    for (const auto& r : rows) {
        if (r.is_error()) continue;
        auto& a = acc[{r.strategy, r.n}];
        ++a.count;
        a.sv += r.v_uncertain;
        a.sv2 += r.v_uncertain * r.v_uncertain;
        a.sa += r.accuracy;
    }
    std::vector<SummaryRow> out;
    for (const auto& [key, a] : acc) {
        SummaryRow s;
        s.strategy = key.first;
        s.n = key.second;
        s.count = a.count;
        const double c = static_cast<double>(a.count);
        s.mean_v = a.sv / c;
        s.mean_accuracy = a.sa / c;
        const double var = a.count > 1 ? std::max(0.0, (a.sv2 - c * s.mean_v * s.mean_v) / (c - 1.0)) : 0.0;
        s.se_v = std::sqrt(var / c);
        out.push_back(s);
    }
    return out;
}

const SummaryRow* find_summary(const std::vector<SummaryRow>& s, const std::string& strategy, std::size_t n) {
    for (const auto& r : s) {
        if (r.strategy == strategy && r.n == n) return &r;
    }
    return nullptr;
}

}  // namespace adagrid
