#include "adagrid/session.hpp"

#include "adagrid/oracle.hpp"
#include "adagrid/svc.hpp"

#include <chrono>
#include <ctime>
#include <fcntl.h>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/file.h>
#include <unistd.h>

namespace adagrid {

namespace fs = std::filesystem;

const char* to_string(SessionStatus s) {
    switch (s) {
        case SessionStatus::ReadyToSuggest: return "ReadyToSuggest";
        case SessionStatus::AwaitingOutcome: return "AwaitingOutcome";
        case SessionStatus::Complete: return "Complete";
        case SessionStatus::Corrupt: return "Corrupt";
    }
    return "ReadyToSuggest";
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool session_strategy_allowed(StrategyKind k) {
    return k != StrategyKind::ALE;
}

namespace {

nlohmann::json labeled_json(const LabeledPoint& p) { return {{"point", p.point.vec()}, {"label", to_int(p.label)}}; }

LabeledPoint labeled_from_json(const nlohmann::json& j) {
    return {UnitPoint(j.at("point").get<std::vector<double>>()), label_from_int(j.at("label").get<long long>())};
}

std::vector<nlohmann::json> frontier_json(const std::vector<UnitPoint>& pts) {
    std::vector<nlohmann::json> out;
    for (const auto& p : pts) out.push_back(p.vec());
    return out;
}

[[noreturn]] void corrupt(const std::string& what) { throw CorruptedStateError("session replay failed: " + what); }

}  // namespace

// ---------------------------------------------------------------------------
// Session

Session Session::create(std::string id, Transform transform, StrategySpec spec, std::string created_at) {
    validate(transform);
    if (!session_strategy_allowed(spec.kind)) {
        throw UsageError("ALE needs a classifier refit per step and is not offered in sessions");
    }
    if (spec.dimension != transform.dimension()) {
        throw UsageError("dimension mismatch: strategy has p=" + std::to_string(spec.dimension) +
                         " but the transform has " + std::to_string(transform.dimension()) + " dimensions");
    }
    Session s;
    s.id_ = std::move(id);
    s.created_at_ = std::move(created_at);
    s.strategy_ = make_strategy(spec, transform_lattice(transform));
    s.transform_ = std::move(transform);
    s.refresh_status();
    return s;
}

void Session::refresh_status() {
    if (witnesses_) {
        status_ = SessionStatus::Corrupt;
    } else if (strategy_->pending()) {
        status_ = SessionStatus::AwaitingOutcome;
    } else if (strategy_->complete() || strategy_->evaluations() >= strategy_->spec().budget) {
        status_ = SessionStatus::Complete;
    } else {
        status_ = SessionStatus::ReadyToSuggest;
    }
}

Suggestion Session::make_suggestion(const Proposal& p) const {
    Suggestion s;
    s.unit = p.point;
    s.physical = apply_transform(transform_, p.point);
    s.step = history_.size() + 1;
    s.level = p.level;
    s.candidates_before = p.candidates_before;
    return s;
}

SuggestResult Session::suggest() {
    if (status_ == SessionStatus::Corrupt) {
        throw SessionStateError("corrupt", "session is corrupt after a non-monotone outcome");
    }
    SuggestResult r;
    if (status_ != SessionStatus::Complete) {
        if (auto p = strategy_->propose()) r.suggestion = make_suggestion(*p);
    }
    refresh_status();
    if (!r.suggestion) {
        r.completion = strategy_->complete() ? strategy_->completion() : Completion::Budget;
    }
    r.v_uncertain = volume().v_uncertain;
    return r;
}

OutcomeResult Session::record_outcome(Label label) {
    if (status_ == SessionStatus::Corrupt) {
        throw SessionStateError("corrupt", "session is corrupt after a non-monotone outcome");
    }
    if (status_ != SessionStatus::AwaitingOutcome) {
        throw SessionStateError("no_pending", "no suggestion is pending; request one first");
    }
    const UnitPoint x = strategy_->pending()->point;
    OutcomeResult r;
    try {
        r.record = strategy_->observe(label);
    } catch (const NonMonotoneError& e) {
        corrupting_ = LabeledPoint{x, label};
        witnesses_ = std::pair{e.negative_witness(), e.positive_witness()};
        refresh_status();
        throw;
    }
    history_.push_back(r.record);
    refresh_status();
    r.volume = volume();
    return r;
}

nlohmann::json Session::state_snapshot() const {
    const auto& st = state();
    return {{"evaluations", st.evaluated().size()},
            {"negative_frontier", frontier_json(st.neg_frontier())},
            {"positive_frontier", frontier_json(st.pos_frontier())},
            {"level", st.level()},
            {"candidates", st.candidates().size()},
            {"v_uncertain", volume().v_uncertain}};
}

nlohmann::json Session::pending_json() const {
    const auto& p = strategy_->pending();
    if (!p) return nullptr;
    const auto s = make_suggestion(*p);
    return {{"unit", s.unit.vec()},
            {"physical", s.physical},
            {"step", s.step},
            {"level", s.level},
            {"candidates_before", s.candidates_before}};
}

nlohmann::json Session::to_json() const {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& h : history_) history.push_back(adagrid::to_json(h));
    nlohmann::json corruption = nullptr;
    if (witnesses_) {
        corruption = {{"outcome", labeled_json(*corrupting_)},
                      {"negative_witness", labeled_json(witnesses_->first)},
                      {"positive_witness", labeled_json(witnesses_->second)}};
    }
    return {{"schema_version", kSessionSchemaVersion},
            {"id", id_},
            {"created_at", created_at_},
            {"transform", adagrid::to_json(transform_)},
            {"strategy", adagrid::to_json(spec())},
            {"status", to_string(status_)},
            {"completion", to_string(strategy_->completion())},
            {"pending", pending_json()},
            {"history", history},
            {"corruption", corruption},
            {"state", state_snapshot()}};
}

Session Session::from_json(const nlohmann::json& j) {
    Session s;
    try {
        if (j.at("schema_version").get<int>() != kSessionSchemaVersion) {
            corrupt("unsupported schema_version " + j.at("schema_version").dump());
        }
        s.id_ = j.at("id").get<std::string>();
        s.created_at_ = j.at("created_at").get<std::string>();
        s.transform_ = transform_from_json(j.at("transform"));
        const StrategySpec spec = strategy_spec_from_json(j.at("strategy"));
        if (spec.dimension != s.transform_.dimension()) corrupt("strategy and transform dimensions differ");
        s.strategy_ = make_strategy(spec, transform_lattice(s.transform_));

        std::size_t i = 0;
        for (const auto& hj : j.at("history")) {
            ++i;
            const StepRecord h = step_record_from_json(hj);
            auto p = s.strategy_->propose();
            if (!p) corrupt("strategy stops before step " + std::to_string(i));
            if (p->point != h.point) {
                corrupt("step " + std::to_string(i) + " proposes " + p->point.to_string() + " but history has " +
                        h.point.to_string());
            }
            StepRecord rec;
            try {
                rec = s.strategy_->observe(h.label);
            } catch (const NonMonotoneError&) {
                corrupt("history contradicts itself at step " + std::to_string(i));
            }
            if (!(rec == h)) corrupt("step " + std::to_string(i) + " record differs from history");
            s.history_.push_back(rec);
        }

        const auto& pj = j.at("pending");
        if (!pj.is_null()) {
            auto p = s.strategy_->propose();
            if (!p || p->point.vec() != pj.at("unit").get<std::vector<double>>()) {
                corrupt("pending suggestion does not match the replayed proposal");
            }
        }

        const auto& cj = j.at("corruption");
        if (!cj.is_null()) {
            const LabeledPoint outcome = labeled_from_json(cj.at("outcome"));
            if (!s.strategy_->pending() || s.strategy_->pending()->point != outcome.point) {
                corrupt("corrupting outcome is not at the pending point");
            }
            try {
                s.strategy_->observe(outcome.label);
                corrupt("stored corrupting outcome is consistent with the history");
            } catch (const NonMonotoneError& e) {
                if (!(e.negative_witness() == labeled_from_json(cj.at("negative_witness"))) ||
                    !(e.positive_witness() == labeled_from_json(cj.at("positive_witness")))) {
                    corrupt("stored witnesses differ from the replay");
                }
                s.corrupting_ = outcome;
                s.witnesses_ = std::pair{e.negative_witness(), e.positive_witness()};
            }
        }

        const std::string stored_status = j.at("status").get<std::string>();
        if (stored_status == "Complete" && !s.strategy_->pending() &&
            s.strategy_->evaluations() < s.strategy_->spec().budget) {
            if (s.strategy_->propose()) corrupt("session marked Complete but the strategy still proposes points");
        }
        s.refresh_status();
        if (stored_status != to_string(s.status_)) {
            corrupt("stored status " + stored_status + " but replay gives " + to_string(s.status_));
        }
        if (s.state_snapshot().dump() != j.at("state").dump()) corrupt("state snapshot differs from the replay");
    } catch (const nlohmann::json::exception& e) {
        corrupt(std::string("malformed session file: ") + e.what());
    } catch (const UsageError& e) {
        corrupt(e.what());
    }
    return s;
}

nlohmann::json Session::summary() const {
    nlohmann::json w = nullptr;
    if (witnesses_) {
        w = {{"negative", labeled_json(witnesses_->first)}, {"positive", labeled_json(witnesses_->second)}};
    }
    const auto vol = volume();
    return {{"id", id_},
            {"created_at", created_at_},
            {"status", to_string(status_)},
            {"strategy", to_string(spec().kind)},
            {"p", spec().dimension},
            {"budget", spec().budget},
            {"seed", spec().seed},
            {"evaluations", history_.size()},
            {"v_uncertain", vol.v_uncertain},
            {"v_negative", vol.v_negative},
            {"v_positive", vol.v_positive},
            {"completion", status_ == SessionStatus::Complete && !strategy_->complete() ? "budget"
                                                                                         : to_string(completion())},
            {"pending", pending_json()},
            {"witnesses", w}};
}

nlohmann::json Session::report(const ReportOptions& opt) const {
    const std::size_t p = spec().dimension;
    if (opt.grid < 1 || opt.grid > 1024) throw UsageError("grid must be between 1 and 1024");
    std::vector<std::size_t> dims{opt.slice_i};
    if (p >= 2) dims.push_back(opt.slice_j);
    for (auto d : dims) {
        if (d >= p) throw UsageError("slice dimension " + std::to_string(d) + " out of range for p=" + std::to_string(p));
    }
    if (dims.size() == 2 && dims[0] == dims[1]) throw UsageError("slice dimensions must differ");
    if (!opt.fixed.empty() && opt.fixed.size() != p) {
        throw UsageError("fixed must list one value (or a blank) per dimension");
    }

    nlohmann::json names = nlohmann::json::array(), units = nlohmann::json::array();
    for (const auto& d : transform_.dims) {
        names.push_back(d.name);
        units.push_back(d.units);
    }

    nlohmann::json evaluations = nlohmann::json::array();
    for (const auto& h : history_) {
        evaluations.push_back({{"step", h.index},
                               {"unit", h.point.vec()},
                               {"physical", apply_transform(transform_, h.point)},
                               {"label", to_int(h.label)}});
    }
    auto frontier = [&](const std::vector<UnitPoint>& pts) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& x : pts) out.push_back({{"unit", x.vec()}, {"physical", apply_transform(transform_, x)}});
        return out;
    };

    const auto vol = volume();
    const auto& st = state();
    nlohmann::json svc = nullptr;
    std::string svc_note;
    if (st.negative_count() >= kMinPerClass && st.positive_count() >= kMinPerClass) {
        SvcModel m = fit_tuned(st.evaluated(), derive_seed(spec().seed, st.evaluated().size(), 3));
        if (m.kind == SvcModel::Kind::Kernel) platt_calibrate(m, st.evaluated());
        svc = adagrid::to_json(m);
    } else {
        svc_note = "needs at least " + std::to_string(kMinPerClass) + " observations of each label";
    }

    // Raster over the slice at cell centers; other coordinates fixed.
    std::vector<double> x(p, 0.5);
    nlohmann::json fixed = nlohmann::json::array();
    for (std::size_t k = 0; k < p; ++k) {
        if (!opt.fixed.empty() && opt.fixed[k]) {
            if (*opt.fixed[k] < 0.0 || *opt.fixed[k] > 1.0) throw UsageError("fixed values must lie in [0, 1]");
            x[k] = *opt.fixed[k];
        }
        fixed.push_back(x[k]);
    }
    const std::size_t g = opt.grid;
    const std::size_t nrows = dims.size() == 2 ? g : 1;
    nlohmann::json rows = nlohmann::json::array();
    std::size_t uncertain = 0;
    for (std::size_t r = 0; r < nrows; ++r) {
        std::string line(g, 'U');
        if (dims.size() == 2) x[dims[1]] = (static_cast<double>(r) + 0.5) / static_cast<double>(g);
        for (std::size_t c = 0; c < g; ++c) {
            x[dims[0]] = (static_cast<double>(c) + 0.5) / static_cast<double>(g);
            switch (st.classify(std::span<const double>(x))) {
                case Certainty::CertainNegative: line[c] = 'N'; break;
                case Certainty::CertainPositive: line[c] = 'P'; break;
                case Certainty::Unknown: line[c] = 'U'; ++uncertain; break;
            }
        }
        rows.push_back(line);
    }

    nlohmann::json out{{"schema_version", kSessionSchemaVersion},
                       {"session_id", id_},
                       {"status", to_string(status_)},
                       {"strategy", to_string(spec().kind)},
                       {"p", p},
                       {"names", names},
                       {"units", units},
                       {"evaluations", evaluations},
                       {"negative_frontier", frontier(st.neg_frontier())},
                       {"positive_frontier", frontier(st.pos_frontier())},
                       {"volume",
                        {{"v_negative", vol.v_negative},
                         {"v_positive", vol.v_positive},
                         {"v_uncertain", vol.v_uncertain},
                         {"method", to_string(vol.method)}}},
                       {"svc", svc},
                       {"slice",
                        {{"dims", dims},
                         {"grid", g},
                         {"fixed", fixed},
                         {"rows", rows},
                         {"uncertain_fraction",
                          static_cast<double>(uncertain) / static_cast<double>(g * nrows)}}},
                       {"pending", pending_json()}};
    if (!svc_note.empty()) out["svc_note"] = svc_note;
    if (witnesses_) {
        out["witnesses"] = {{"negative", labeled_json(witnesses_->first)},
                            {"positive", labeled_json(witnesses_->second)}};
    }
    return out;
}

std::pair<Transform, StrategySpec> parse_create_request(const nlohmann::json& body) {
    if (!body.is_object()) throw UsageError("request body must be a JSON object");
    if (!body.contains("strategy")) throw UsageError("missing 'strategy'");
    nlohmann::json sj = body.at("strategy");
    if (sj.is_string()) sj = {{"kind", sj}};
    if (!sj.is_object()) throw UsageError("'strategy' must be a name or an object");

    Transform t;
    bool have_transform = false;
    try {
        if (body.contains("transform") && !body.at("transform").is_null()) {
            const auto& tj = body.at("transform");
            if (tj.is_object() && tj.contains("builtin")) {
                const std::string name = tj.at("builtin").get<std::string>();
                if (name == "ice_breaking") {
                    t = ice_breaking_transform();
                } else if (name == "crash_grid") {
                    t = crash_grid_transform();
                } else if (name == "crash_inner") {
                    t = crash_inner_transform();
                } else if (name == "identity") {
                    t = identity_transform(tj.at("p").get<std::size_t>());
                } else {
                    throw UsageError("unknown builtin transform '" + name +
                                     "' (ice_breaking, crash_grid, crash_inner, identity)");
                }
            } else {
                t = transform_from_json(tj);
            }
            have_transform = true;
        }
        if (!sj.contains("p")) {
            if (!have_transform) throw UsageError("give strategy.p or a transform");
            sj["p"] = t.dimension();
        }
        if (!sj.contains("budget")) sj["budget"] = kDefaultSessionBudget;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed request: ") + e.what());
    }
    StrategySpec spec = strategy_spec_from_json(sj);
    if (!have_transform) t = identity_transform(spec.dimension);
    return {std::move(t), spec};
}

// ---------------------------------------------------------------------------
// Store

struct SessionStore::Guard {
    std::shared_ptr<std::shared_mutex> mutex;
    bool exclusive = false;
    int fd = -1;

    ~Guard() {
        if (fd >= 0) {
            ::flock(fd, LOCK_UN);
            ::close(fd);
        }
        if (exclusive) {
            mutex->unlock();
        } else {
            mutex->unlock_shared();
        }
    }
};

SessionStore::SessionStore(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create data directory '" + dir_.string() + "': " + ec.message());
}

fs::path SessionStore::path_for(const std::string& id) const {
    if (id.empty() || id.size() > 64 ||
        id.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789-") != std::string::npos) {
        throw SessionNotFound("no session '" + id + "'");
    }
    return dir_ / (id + ".json");
}

bool SessionStore::exists(const std::string& id) const {
    try {
        return fs::exists(path_for(id));
    } catch (const SessionNotFound&) {
        return false;
    }
}

std::shared_ptr<SessionStore::Guard> SessionStore::lock(const std::string& id, bool exclusive) const {
    const fs::path path = path_for(id);
    std::shared_ptr<std::shared_mutex> m;
    {
        std::lock_guard lk(map_mutex_);
        auto& slot = locks_[id];
        if (!slot) slot = std::make_shared<std::shared_mutex>();
        m = slot;
    }
    if (exclusive) {
        m->lock();
    } else {
        m->lock_shared();
    }
    auto g = std::make_shared<Guard>();
    g->mutex = m;
    g->exclusive = exclusive;
    const std::string lock_path = (dir_ / (id + ".lock")).string();
    g->fd = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (g->fd >= 0) ::flock(g->fd, exclusive ? LOCK_EX : LOCK_SH);
    return g;
}

Session SessionStore::load_unlocked(const std::string& id) const {
    const fs::path path = path_for(id);
    std::ifstream f(path, std::ios::binary);
    if (!f) throw SessionNotFound("no session '" + id + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw CorruptedStateError("session file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return Session::from_json(j);
}

void SessionStore::save_unlocked(const Session& s) const {
    const fs::path path = path_for(s.id());
    const fs::path tmp = dir_ / (s.id() + ".json.tmp");
    const std::string text = s.to_json().dump(1) + "\n";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write '" + tmp.string() + "'");
        f << text;
        f.flush();
        if (!f) throw IoError("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot replace '" + path.string() + "': " + ec.message());
}

std::string SessionStore::new_id() const {
    static std::mutex m;
    static std::mt19937_64 gen{std::random_device{}() ^
                               static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count())};
    std::lock_guard lk(m);
    while (true) {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(gen()));
        std::string id(buf, 12);
        if (!exists(id)) return id;
    }
}

Session SessionStore::create(Transform transform, StrategySpec spec) {
    const std::string id = new_id();
    auto guard = lock(id, true);
    Session s = Session::create(id, std::move(transform), spec, utc_timestamp());
    save_unlocked(s);
    return s;
}

std::vector<nlohmann::json> SessionStore::list() const {
    std::vector<nlohmann::json> out;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir_)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const std::string id = f.stem().string();
        try {
            out.push_back(read(id, [](const Session& s) { return s.summary(); }));
        } catch (const std::exception& e) {
            out.push_back({{"id", id}, {"status", "Unreadable"}, {"error", e.what()}});
        }
    }
    return out;
}

}  // namespace adagrid
