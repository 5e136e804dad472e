// Command-line front end: designs, strategy runs, benchmarks, theory checks
// and design sessions.

#include "adagrid/bench.hpp"
#include "adagrid/checks.hpp"
#include "adagrid/oracle.hpp"
#include "adagrid/server.hpp"
#include "adagrid/session.hpp"
#include "adagrid/static_designs.hpp"
#include "adagrid/strategy.hpp"
#include "adagrid/volume.hpp"

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

using namespace adagrid;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kRuntime = 2, kTheoryFailure = 3 };

enum class LogLevel { Error, Warn, Info, Debug };
LogLevel g_log_level = LogLevel::Info;
bool g_json = false;

void log(LogLevel level, const std::string& msg) {
    if (level > g_log_level) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t effective_seed(const std::optional<std::uint64_t>& seed, const char* what) {
    if (seed) return *seed;
    std::random_device rd;
    const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    log(LogLevel::Info, std::string(what) + ": no --seed given, using seed " + std::to_string(s));
    return s;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << text;
    if (!f) throw IoError("failed writing '" + path + "'");
}

// --------------------------------------------------------------------------
// design

struct DesignArgs {
    std::string kind;
    std::size_t p = 1;
    std::size_t n = 0;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int cmd_design(const DesignArgs& a) {
    StaticDesignSpec spec;
    spec.kind = parse_static_kind(a.kind);
    spec.dimension = a.p;
    spec.n = a.n;
    if (spec.kind == StaticKind::MC || spec.kind == StaticKind::LHD) spec.seed = effective_seed(a.seed, "design");
    const auto pts = generate(spec);
    std::string csv;
    for (std::size_t k = 0; k < a.p; ++k) csv += (k ? ",x" : "x") + std::to_string(k + 1);
    csv += "\n";
    for (const auto& x : pts) {
        for (std::size_t k = 0; k < a.p; ++k) csv += (k ? "," : "") + fmt(x[k]);
        csv += "\n";
    }
    write_output(a.out, csv);
    if (!a.out.empty() && a.out != "-") {
        if (g_json) {
            std::cout << json{{"kind", a.kind}, {"p", a.p}, {"n", pts.size()}, {"seed", spec.seed}, {"out", a.out}}.dump()
                      << "\n";
        } else {
            std::cout << "wrote " << pts.size() << " points to " << a.out << "\n";
        }
    }
    return kOk;
}

// --------------------------------------------------------------------------
// run

struct OracleArgs {
    std::string oracle = "illustration";
    std::optional<std::size_t> p;
    std::optional<double> mu;
    std::optional<double> threshold;
    std::optional<int> label;
    std::size_t resolution = 8;
    std::optional<std::uint64_t> oracle_seed;
};

OraclePtr build_oracle(const OracleArgs& a) {
    const std::string& o = a.oracle;
    if (!o.empty() && o.front() == '{') return make_oracle(json::parse(o));
    if (o.size() > 5 && o.substr(o.size() - 5) == ".json") {
        const auto base = std::filesystem::path(o).parent_path().string();
        return make_oracle(json::parse(read_file(o)), base.empty() ? "." : base);
    }
    json spec{{"kind", o}};
    if (a.p) spec["p"] = *a.p;
    if (o == "arctan") {
        if (!a.mu) throw UsageError("--oracle arctan needs --mu");
        spec["mu"] = *a.mu;
        if (!a.p) spec["p"] = 2;
    } else if (o == "halfspace" || o == "upper_face" || o == "constant" || o == "staircase") {
        if (!a.p) spec["p"] = 1;
        if (a.threshold) spec["threshold"] = *a.threshold;
        if (o == "constant") spec["label"] = a.label.value_or(1);
        if (o == "staircase") {
            spec["resolution"] = a.resolution;
            spec["seed"] = effective_seed(a.oracle_seed, "staircase oracle");
        }
    }
    return make_oracle(spec);
}

struct RunArgs {
    OracleArgs oracle;
    std::string strategy = "ag";
    std::size_t budget = 16;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> amc_try_budget;
    std::string out;
};

int cmd_run(const RunArgs& a) {
    const OraclePtr oracle = build_oracle(a.oracle);
    StrategySpec spec;
    spec.kind = parse_strategy_kind(a.strategy);
    spec.dimension = oracle->dimension();
    spec.budget = a.budget;
    spec.seed = effective_seed(a.seed, "run");
    spec.amc_try_budget = a.amc_try_budget;
    const RunResult r = run_strategy(spec, *oracle);
    const auto vol = uncertain_volume_auto(r.state);
    const bool trace_to_stdout = a.out.empty() || a.out == "-";
    write_output(a.out, trace_to_ndjson(r.trace));
    json summary{{"strategy", to_string(spec.kind)},
                 {"p", spec.dimension},
                 {"oracle", oracle->id()},
                 {"budget", spec.budget},
                 {"seed", spec.seed},
                 {"evaluations", r.trace.size()},
                 {"completion", to_string(r.completion)},
                 {"v_uncertain", vol.v_uncertain},
                 {"v_method", to_string(vol.method)}};
    std::ostream& os = trace_to_stdout ? std::cerr : std::cout;
    if (g_json) {
        os << summary.dump() << "\n";
    } else {
        os << "strategy=" << to_string(spec.kind) << " oracle=" << oracle->id() << " evaluations=" << r.trace.size()
           << " completion=" << to_string(r.completion) << " seed=" << spec.seed << " v_uncertain=" << fmt(vol.v_uncertain)
           << "\n";
    }
    return kOk;
}

// --------------------------------------------------------------------------
// bench

struct BenchArgs {
    std::string plan;
    std::string out = "results.csv";
    bool full = false;
    std::optional<std::size_t> parallelism;
    std::optional<std::uint64_t> seed;
};

int cmd_bench(const BenchArgs& a) {
    const json j = json::parse(read_file(a.plan));
    const auto base = std::filesystem::path(a.plan).parent_path().string();
    ExperimentPlan plan = plan_from_json(j, a.full, base.empty() ? "." : base);
    if (a.parallelism) plan.parallelism = *a.parallelism;
    if (a.seed) {
        plan.master_seed = *a.seed;
    } else if (!j.contains("master_seed")) {
        plan.master_seed = effective_seed(std::nullopt, "bench");
    }
    log(LogLevel::Info, "bench: master seed " + std::to_string(plan.master_seed) + ", " +
                            std::to_string(plan.oracle.draws) + " replicates x " +
                            std::to_string(plan.strategies.size()) + " strategies");
    const BenchResult res = run_plan(plan);
    emit_results(res, plan, a.out);
    const auto summary = summarize(res.rows);
    if (g_json) {
        json rows = json::array();
        for (const auto& s : summary) {
            rows.push_back({{"strategy", s.strategy}, {"n", s.n}, {"count", s.count}, {"mean_v_uncertain", s.mean_v},
                            {"se_v_uncertain", s.se_v}, {"mean_accuracy", s.mean_accuracy}});
        }
        std::cout << json{{"out", a.out},
                          {"rows", res.rows.size()},
                          {"errors", res.error_count},
                          {"digest", determinism_digest(res.rows)},
                          {"summary", rows}}
                         .dump()
                  << "\n";
    } else {
        std::printf("%-6s %6s %6s %12s %10s %10s\n", "strat", "n", "count", "mean_v", "se_v", "accuracy");
        for (const auto& s : summary) {
            std::printf("%-6s %6zu %6zu %12.6f %10.6f %10.6f\n", s.strategy.c_str(), s.n, s.count, s.mean_v, s.se_v,
                        s.mean_accuracy);
        }
        std::printf("wrote %zu rows to %s (digest %s)\n", res.rows.size(), a.out.c_str(),
                    determinism_digest(res.rows).c_str());
    }
    if (res.error_count > 0) {
        log(LogLevel::Error, std::to_string(res.error_count) + " rows failed; see " + a.out + ".meta.json");
        return kRuntime;
    }
    return kOk;
}

// --------------------------------------------------------------------------
// theory

struct TheoryArgs {
    std::vector<std::string> checks;
    bool all = false;
    bool list = false;
    bool full = false;
    std::optional<std::uint64_t> seed;
};

int cmd_theory(const TheoryArgs& a) {
    if (a.list) {
        for (const auto& c : theory_checks()) {
            if (g_json) {
                std::cout << json{{"name", c.name}, {"summary", c.summary}}.dump() << "\n";
            } else {
                std::printf("%-18s %s\n", c.name.c_str(), c.summary.c_str());
            }
        }
        return kOk;
    }
    std::vector<std::string> names = a.checks;
    if (a.all) {
        names.clear();
        for (const auto& c : theory_checks()) names.push_back(c.name);
    }
    if (names.empty()) throw UsageError("give --check NAME, --all or --list");
    CheckOptions opt;
    opt.full = a.full;
    if (a.seed) opt.seed = *a.seed;
    log(LogLevel::Info, "theory: seed " + std::to_string(opt.seed));
    bool ok = true;
    for (const auto& name : names) {
        const CheckResult r = run_check(name, opt);
        ok = ok && r.passed;
        if (g_json) {
            std::cout << json{{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds},
                              {"metrics", r.metrics}}
                             .dump()
                      << "\n";
        } else {
            std::printf("%s %-18s %s (%.2fs)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str(), r.seconds);
        }
        std::fflush(stdout);
    }
    return ok ? kOk : kTheoryFailure;
}

// --------------------------------------------------------------------------
// serve

struct ServeArgs {
    std::string host = "127.0.0.1";
    int port = 8765;
    std::optional<std::string> token;
    std::optional<std::string> static_dir;
};

int cmd_serve(const ServeArgs& a, const std::string& data_dir) {
    ServerOptions opt;
    opt.host = a.host;
    opt.port = a.port;
    opt.data_dir = data_dir;
    opt.token = a.token;
    if (a.static_dir) opt.static_dir = *a.static_dir;

    // Signals are taken synchronously so the server can be stopped from a
    // normal thread.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    SessionServer server(opt);
    server.bind();
    std::thread worker([&] { server.serve(); });
    server.wait_until_ready();
    if (g_json) {
        std::cout << json{{"address", server.address()}, {"data_dir", data_dir}}.dump() << std::endl;
    } else {
        std::cout << "listening on " << server.address() << " (data in " << data_dir << ")" << std::endl;
    }
    int sig = 0;
    sigwait(&set, &sig);
    log(LogLevel::Info, "shutting down");
    server.stop();
    worker.join();
    return kOk;
}

// --------------------------------------------------------------------------
// session

struct SessionArgs {
    std::string url;
    std::optional<std::string> token;
    // create
    std::string strategy = "ag";
    std::optional<std::size_t> p;
    std::optional<std::string> transform;
    std::optional<std::size_t> budget;
    std::optional<std::uint64_t> seed;
    // others
    std::string id;
    int label = 0;
    std::string slice_dims = "0,1";
    std::size_t grid = 64;
    std::string fixed;
};

json transform_arg(const std::string& t) {
    if (t == "ice_breaking" || t == "crash_grid" || t == "crash_inner") return {{"builtin", t}};
    if (!t.empty() && t.front() == '{') return json::parse(t);
    return json::parse(read_file(t));
}

/// Session operations either through a running server or directly on the
/// data directory.
class SessionClient {
public:
    SessionClient(const SessionArgs& a, const std::string& data_dir) : args_(a) {
        if (a.url.empty()) store_.emplace(data_dir);
    }

    json request(const std::string& method, const std::string& path, const json& body = nullptr) {
        httplib::Client cli(args_.url);
        cli.set_read_timeout(600, 0);
        httplib::Headers headers;
        if (args_.token) headers.emplace("Authorization", "Bearer " + *args_.token);
        httplib::Result res = method == "GET" ? cli.Get(path, headers)
                                              : cli.Post(path, headers, body.is_null() ? "" : body.dump(),
                                                         "application/json");
        if (!res) throw IoError("cannot reach " + args_.url + ": " + httplib::to_string(res.error()));
        json j = res->get_header_value("Content-Type") == "application/json" ? json::parse(res->body) : json(res->body);
        if (res->status >= 400) {
            const std::string msg = j.is_object() ? j.value("message", res->body) : res->body;
            const std::string code = j.is_object() ? j.value("code", std::string()) : std::string();
            if (res->status == 400 || res->status == 404) throw UsageError(msg);
            if (code == "non_monotone") {
                throw NonMonotoneError(
                    {UnitPoint(j["witnesses"]["negative"]["point"].get<std::vector<double>>()), Label::Negative},
                    {UnitPoint(j["witnesses"]["positive"]["point"].get<std::vector<double>>()), Label::Positive});
            }
            throw SessionStateError(code, msg);
        }
        return j;
    }

    json create(const json& body) {
        if (!store_) return request("POST", "/sessions", body);
        auto [t, spec] = parse_create_request(body);
        return store_->create(std::move(t), spec).summary();
    }
    json status(const std::string& id) {
        if (!store_) return request("GET", "/sessions/" + id);
        return store_->read(id, [](const Session& s) { return s.summary(); });
    }
    json list() {
        if (!store_) return request("GET", "/sessions")["sessions"];
        return store_->list();
    }
    json suggest(const std::string& id) {
        if (!store_) return request("POST", "/sessions/" + id + "/suggest");
        return store_->mutate(id, [](Session& s) {
            const auto r = s.suggest();
            json out{{"status", to_string(s.status())}, {"v_uncertain", r.v_uncertain}};
            if (r.suggestion) {
                out["suggestion"] = {{"unit", r.suggestion->unit.vec()},
                                     {"physical", r.suggestion->physical},
                                     {"step", r.suggestion->step},
                                     {"level", r.suggestion->level}};
                out["completion"] = nullptr;
            } else {
                out["suggestion"] = nullptr;
                out["completion"] = to_string(r.completion);
            }
            return out;
        });
    }
    json outcome(const std::string& id, int label) {
        if (!store_) return request("POST", "/sessions/" + id + "/outcome", {{"label", label}});
        const Label l = label_from_int(label);
        return store_->mutate(id, [l](Session& s) {
            const auto r = s.record_outcome(l);
            return json{{"record", to_json(r.record)}, {"volume", {{"v_uncertain", r.volume.v_uncertain}}},
                        {"session", s.summary()}};
        });
    }
    json report(const std::string& id, const std::string& slice_dims, std::size_t grid, const std::string& fixed) {
        if (!store_) {
            std::string q = "/sessions/" + id + "/report?slice_dims=" + slice_dims + "&grid=" + std::to_string(grid);
            if (!fixed.empty()) q += "&fixed=" + fixed;
            return request("GET", q);
        }
        ReportOptions opt;
        std::stringstream ss(slice_dims);
        std::string part;
        std::vector<std::size_t> dims;
        while (std::getline(ss, part, ',')) dims.push_back(std::stoul(part));
        if (dims.empty() || dims.size() > 2) throw UsageError("--slice-dims must be i or i,j");
        opt.slice_i = dims[0];
        if (dims.size() == 2) opt.slice_j = dims[1];
        opt.grid = grid;
        if (!fixed.empty()) {
            std::stringstream fs(fixed + ",");
            while (std::getline(fs, part, ',')) {
                if (part.empty()) {
                    opt.fixed.emplace_back();
                } else {
                    opt.fixed.emplace_back(std::stod(part));
                }
            }
        }
        return store_->read(id, [&](const Session& s) { return s.report(opt); });
    }

private:
    SessionArgs args_;
    std::optional<SessionStore> store_;
};

void print_suggestion(const json& r) {
    if (g_json) {
        std::cout << r.dump() << "\n";
        return;
    }
    if (r["suggestion"].is_null()) {
        std::cout << "complete (" << r["completion"].get<std::string>() << "), v_uncertain="
                  << fmt(r["v_uncertain"].get<double>()) << "\n";
        return;
    }
    const auto& s = r["suggestion"];
    std::cout << "step " << s["step"] << ": unit " << s["unit"].dump() << " physical " << s["physical"].dump() << "\n";
}

void print_summary(const json& s) {
    if (g_json) {
        std::cout << s.dump() << "\n";
        return;
    }
    std::cout << s.value("id", std::string()) << "  " << s.value("status", std::string()) << "  "
              << s.value("strategy", std::string()) << " p=" << s.value("p", 0) << "  evaluations="
              << s.value("evaluations", 0) << "  v_uncertain=" << fmt(s.value("v_uncertain", 1.0)) << "\n";
    if (s.contains("witnesses") && !s["witnesses"].is_null()) {
        std::cout << "  non-monotone: negative " << s["witnesses"]["negative"]["point"].dump() << " vs positive "
                  << s["witnesses"]["positive"]["point"].dump() << "\n";
    }
}

int cmd_session(const std::string& sub, const SessionArgs& a, const std::string& data_dir) {
    SessionClient client(a, data_dir);
    if (sub == "create") {
        json strategy{{"kind", a.strategy}};
        if (a.p) strategy["p"] = *a.p;
        if (a.budget) strategy["budget"] = *a.budget;
        strategy["seed"] = effective_seed(a.seed, "session create");
        json body{{"strategy", strategy}};
        if (a.transform) body["transform"] = transform_arg(*a.transform);
        print_summary(client.create(body));
    } else if (sub == "list") {
        for (const auto& s : client.list()) print_summary(s);
    } else if (sub == "status") {
        print_summary(client.status(a.id));
    } else if (sub == "suggest") {
        print_suggestion(client.suggest(a.id));
    } else if (sub == "outcome") {
        const json r = client.outcome(a.id, a.label);
        if (g_json) {
            std::cout << r.dump() << "\n";
        } else {
            std::cout << "recorded step " << r["record"]["index"] << ", v_uncertain="
                      << fmt(r["volume"]["v_uncertain"].get<double>()) << "\n";
        }
    } else if (sub == "report") {
        std::cout << client.report(a.id, a.slice_dims, a.grid, a.fixed).dump(g_json ? -1 : 2) << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive designs for monotone binary simulations"};
    app.require_subcommand(1);
    std::string log_level = "info";
    std::string data_dir;
    app.add_flag("--json", g_json, "Machine-readable output");
    app.add_option("--log-level", log_level, "error, warn, info or debug")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
    app.add_option("--data-dir", data_dir, "Session directory (default $ADAGRID_DATA_DIR or ./adagrid-data)");

    DesignArgs design;
    auto* d = app.add_subcommand("design", "Write a static design as CSV");
    d->add_option("--kind", design.kind, "sg, si, mc or lhd")->required();
    d->add_option("-p,--dimension", design.p, "Dimension")->required();
    d->add_option("-n,--runs", design.n, "Number of points")->required();
    d->add_option("--seed", design.seed, "Seed (mc, lhd)");
    d->add_option("-o,--out", design.out, "Output CSV (default stdout)");

    RunArgs run;
    auto* r = app.add_subcommand("run", "Run a strategy against an oracle and write its trace");
    r->add_option("--strategy", run.strategy, "amc, gg, ag, gi, ai, ale, sg, si, mc or lhd");
    r->add_option("--oracle", run.oracle.oracle,
                  "illustration, arctan, halfspace, upper_face, constant, staircase, a JSON object or a .json file");
    r->add_option("-p,--dimension", run.oracle.p, "Oracle dimension");
    r->add_option("--mu", run.oracle.mu, "Arctan threshold");
    r->add_option("--threshold", run.oracle.threshold, "Half-space threshold (default p/2)");
    r->add_option("--label", run.oracle.label, "Constant oracle label");
    r->add_option("--resolution", run.oracle.resolution, "Staircase cells per axis");
    r->add_option("--oracle-seed", run.oracle.oracle_seed, "Staircase seed");
    r->add_option("-n,--budget", run.budget, "Evaluation budget");
    r->add_option("--seed", run.seed, "Strategy seed");
    r->add_option("--amc-try-budget", run.amc_try_budget, "Stop AMC after this many uniform tries");
    r->add_option("-o,--out", run.out, "Trace file (default stdout)");

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "Execute an experiment plan");
    b->add_option("plan", bench.plan, "Plan JSON")->required();
    b->add_option("-o,--out", bench.out, "Results CSV");
    b->add_flag("--full", bench.full, "Use the plan's full-scale settings");
    b->add_option("--parallelism", bench.parallelism, "Worker threads");
    b->add_option("--seed", bench.seed, "Override the master seed");

    TheoryArgs theory;
    auto* t = app.add_subcommand("theory", "Check closed-form results against simulation");
    t->add_option("--check", theory.checks, "Check name (repeatable)");
    t->add_flag("--all", theory.all, "Run every check");
    t->add_flag("--list", theory.list, "List checks");
    t->add_flag("--full", theory.full, "Larger replicate counts");
    t->add_option("--seed", theory.seed, "Seed");

    ServeArgs serve;
    auto* s = app.add_subcommand("serve", "Run the session HTTP service");
    s->add_option("--host", serve.host, "Bind address");
    s->add_option("--port", serve.port, "Port (0 picks one)");
    s->add_option("--token", serve.token, "Bearer token (required off loopback)");
    s->add_option("--static-dir", serve.static_dir, "Directory served under /ui");

    SessionArgs sess;
    auto* ss = app.add_subcommand("session", "Manage design sessions");
    ss->require_subcommand(1);
    ss->add_option("--url", sess.url, "Use a running server instead of the data directory");
    ss->add_option("--token", sess.token, "Bearer token for --url");
    auto* sc = ss->add_subcommand("create", "Create a session");
    sc->add_option("--strategy", sess.strategy, "ag, ai, gg, gi, amc, sg, si, mc or lhd");
    sc->add_option("-p,--dimension", sess.p, "Dimension (default: from the transform)");
    sc->add_option("--transform", sess.transform, "ice_breaking, crash_grid, crash_inner, JSON object or file");
    sc->add_option("--budget", sess.budget, "Evaluation budget");
    sc->add_option("--seed", sess.seed, "Strategy seed");
    auto* sl = ss->add_subcommand("list", "List sessions");
    auto* st = ss->add_subcommand("status", "Show a session");
    st->add_option("id", sess.id)->required();
    auto* sg = ss->add_subcommand("suggest", "Get the next point");
    sg->add_option("id", sess.id)->required();
    auto* so = ss->add_subcommand("outcome", "Record the pending point's label");
    so->add_option("id", sess.id)->required();
    so->add_option("--label", sess.label, "-1 or 1")->required()->allow_extra_args(false);
    auto* sr = ss->add_subcommand("report", "Print the session report");
    sr->add_option("id", sess.id)->required();
    sr->add_option("--slice-dims", sess.slice_dims, "i,j");
    sr->add_option("--grid", sess.grid, "Raster cells per axis");
    sr->add_option("--fixed", sess.fixed, "Unit values for the other dimensions, blanks allowed");
    (void)sl;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }
    g_log_level = log_level == "error"  ? LogLevel::Error
                  : log_level == "warn" ? LogLevel::Warn
                  : log_level == "debug" ? LogLevel::Debug
                                          : LogLevel::Info;
    if (data_dir.empty()) {
        const char* env = std::getenv("ADAGRID_DATA_DIR");
        data_dir = env && *env ? env : "adagrid-data";
    }

    try {
        if (*d) return cmd_design(design);
        if (*r) return cmd_run(run);
        if (*b) return cmd_bench(bench);
        if (*t) return cmd_theory(theory);
        if (*s) return cmd_serve(serve, data_dir);
        if (*ss) {
            for (const auto* sub : ss->get_subcommands()) {
                if (*sub) return cmd_session(sub->get_name(), sess, data_dir);
            }
        }
    } catch (const UsageError& e) {
        log(LogLevel::Error, e.what());
        return kValidation;
    } catch (const DomainError& e) {
        log(LogLevel::Error, e.what());
        return kValidation;
    } catch (const SessionStateError& e) {
        log(LogLevel::Error, e.what());
        return kValidation;
    } catch (const SessionNotFound& e) {
        log(LogLevel::Error, e.what());
        return kValidation;
    } catch (const json::exception& e) {
        log(LogLevel::Error, std::string("invalid JSON: ") + e.what());
        return kValidation;
    } catch (const NonMonotoneError& e) {
        log(LogLevel::Error, e.what());
        return kRuntime;
    } catch (const std::exception& e) {
        log(LogLevel::Error, e.what());
        return kRuntime;
    }
    return kOk;
}
