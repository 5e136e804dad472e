#include "adagrid/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace adagrid {

const char* to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::AMC: return "AMC";
        case StrategyKind::GG: return "GG";
        case StrategyKind::AG: return "AG";
        case StrategyKind::GI: return "GI";
        case StrategyKind::AI: return "AI";
        case StrategyKind::ALE: return "ALE";
        case StrategyKind::SG: return "SG";
        case StrategyKind::SI: return "SI";
        case StrategyKind::MC: return "MC";
        case StrategyKind::LHD: return "LHD";
    }
    return "AG";
}

StrategyKind parse_strategy_kind(const std::string& s) {
    std::string u = s;
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
    for (auto k : {StrategyKind::AMC, StrategyKind::GG, StrategyKind::AG, StrategyKind::GI, StrategyKind::AI,
                   StrategyKind::ALE, StrategyKind::SG, StrategyKind::SI, StrategyKind::MC, StrategyKind::LHD}) {
        if (u == to_string(k)) return k;
    }
    throw UsageError("unknown strategy '" + s + "' (expected amc, gg, ag, gi, ai, ale, sg, si, mc, lhd)");
}

bool is_grid(StrategyKind k) {
    return k == StrategyKind::GG || k == StrategyKind::AG || k == StrategyKind::GI || k == StrategyKind::AI;
}

bool is_static(StrategyKind k) {
    return k == StrategyKind::SG || k == StrategyKind::SI || k == StrategyKind::MC || k == StrategyKind::LHD;
}

const char* to_string(Completion c) {
    switch (c) {
        case Completion::None: return "none";
        case Completion::Budget: return "budget";
        case Completion::Certified: return "certified";
        case Completion::ResolutionLimit: return "resolution_limit";
        case Completion::AmcConverged: return "amc_converged";
        case Completion::TryBudget: return "try_budget";
        case Completion::DesignExhausted: return "design_exhausted";
    }
    return "none";
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const StrategySpec& s) {
    nlohmann::json j{{"kind", to_string(s.kind)}, {"p", s.dimension}, {"budget", s.budget}, {"seed", s.seed}};
    if (s.kind == StrategyKind::AMC) {
        j["amc_max_attempts"] = s.amc_max_attempts;
        if (s.amc_try_budget) j["amc_try_budget"] = *s.amc_try_budget;
    }
    if (s.kind == StrategyKind::ALE) {
        j["ale_candidate_grid"] = s.ale_candidate_grid;
        j["ale_max_candidates"] = s.ale_max_candidates;
        if (s.ale_initial_design) {
            j["ale_initial_design"] = {{"kind", to_string(s.ale_initial_design->kind)},
                                       {"n", s.ale_initial_design->n},
                                       {"seed", s.ale_initial_design->seed}};
        }
    }
    return j;
}

StrategySpec strategy_spec_from_json(const nlohmann::json& j) {
    try {
        StrategySpec s;
        s.kind = parse_strategy_kind(j.at("kind").get<std::string>());
        s.dimension = j.at("p").get<std::size_t>();
        if (s.dimension == 0) throw UsageError("strategy dimension must be positive");
        s.budget = j.at("budget").get<std::size_t>();
        s.seed = j.value("seed", std::uint64_t{0});
        s.amc_max_attempts = j.value("amc_max_attempts", s.amc_max_attempts);
        if (s.amc_max_attempts == 0) throw UsageError("amc_max_attempts must be >= 1");
        if (j.contains("amc_try_budget")) s.amc_try_budget = j.at("amc_try_budget").get<std::uint64_t>();
        s.ale_candidate_grid = j.value("ale_candidate_grid", s.ale_candidate_grid);
        s.ale_max_candidates = j.value("ale_max_candidates", s.ale_max_candidates);
        if (s.ale_candidate_grid == 0 || s.ale_max_candidates == 0) {
            throw UsageError("ALE candidate grid and cap must be positive");
        }
        if (j.contains("ale_initial_design")) {
            const auto& d = j.at("ale_initial_design");
            StaticDesignSpec ds;
            ds.kind = parse_static_kind(d.at("kind").get<std::string>());
            ds.dimension = s.dimension;
            ds.n = d.at("n").get<std::size_t>();
            ds.seed = d.value("seed", s.seed);
            s.ale_initial_design = ds;
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed strategy spec: ") + e.what());
    }
}

nlohmann::json to_json(const StepRecord& r) {
    return {{"index", r.index},
            {"point", r.point.vec()},
            {"label", to_int(r.label)},
            {"candidates_before", r.candidates_before},
            {"skipped_since_last", r.skipped_since_last},
            {"level_at_step", r.level_at_step}};
}

StepRecord step_record_from_json(const nlohmann::json& j) {
    try {
        StepRecord r;
        r.index = j.at("index").get<std::size_t>();
        r.point = UnitPoint(j.at("point").get<std::vector<double>>());
        r.label = label_from_int(j.at("label").get<long long>());
        r.candidates_before = j.at("candidates_before").get<std::size_t>();
        r.skipped_since_last = j.at("skipped_since_last").get<std::size_t>();
        r.level_at_step = j.at("level_at_step").get<std::uint32_t>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed step record: ") + e.what());
    }
}

std::string trace_to_ndjson(const std::vector<StepRecord>& trace) {
    std::string out;
    for (const auto& r : trace) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

std::vector<StepRecord> trace_from_ndjson(const std::string& text) {
    std::vector<StepRecord> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(step_record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::parse_error& e) {
            throw UsageError(std::string("malformed trace line: ") + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Base

Strategy::Strategy(StrategySpec spec, Lattice lattice)
    : spec_(std::move(spec)), lattice_(std::move(lattice)), state_(spec_.dimension) {
    if (!lattice_.empty() && lattice_.size() != spec_.dimension) {
        throw UsageError("oracle lattice dimension does not match the strategy dimension");
    }
}

std::optional<Proposal> Strategy::propose() {
    if (pending_) return pending_;
    if (complete()) return std::nullopt;
    if (evaluations() >= spec_.budget) {
        completion_ = Completion::Budget;
        return std::nullopt;
    }
    auto p = next_proposal();
    if (!p) {
        if (completion_ == Completion::None) completion_ = Completion::Certified;
        return std::nullopt;
    }
    p->skipped_since_last += pending_skips_;
    pending_skips_ = 0;
    pending_ = std::move(p);
    return pending_;
}

StepRecord Strategy::observe(Label label) {
    if (!pending_) throw UsageError("no pending suggestion to record an outcome for");
    const Proposal prop = *pending_;
    const std::size_t removed = state_.insert(LabeledPoint{prop.point, label}, policy());
    pending_.reset();
    after_observe(prop.point, removed);
    StepRecord r;
    r.index = evaluations();
    r.point = prop.point;
    r.label = label;
    r.candidates_before = prop.candidates_before;
    r.skipped_since_last = prop.skipped_since_last;
    r.level_at_step = prop.level;
    return r;
}

void Strategy::after_observe(const UnitPoint&, std::size_t removed) { pending_skips_ += removed; }

std::vector<double> Strategy::draw_point(Rng& rng) const {
    std::vector<double> x(spec_.dimension);
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!lattice_.empty() && !lattice_[k].empty()) {
            x[k] = lattice_[k][rng.uniform_index(lattice_[k].size())];
        } else {
            x[k] = rng.uniform01();
        }
    }
    return x;
}

bool Strategy::on_lattice(const UnitPoint& x) const {
    if (lattice_.empty()) return true;
    for (std::size_t k = 0; k < lattice_.size(); ++k) {
        if (lattice_[k].empty()) continue;
        const auto& lv = lattice_[k];
        auto it = std::lower_bound(lv.begin(), lv.end(), x[k] - 1e-12);
        if (it == lv.end() || std::abs(*it - x[k]) > 1e-12) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Grid designs

UnitPoint ag_select(const std::vector<UnitPoint>& candidates) {
    if (candidates.empty()) throw UsageError("ag_select: empty candidate set");
    std::vector<UnitPoint> sorted = candidates;
    std::sort(sorted.begin(), sorted.end());
    std::size_t best = 0, best_min = 0, best_max = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        std::size_t a = 0, b = 0;
        const auto x = sorted[i].coords();
        for (const auto& y : sorted) {
            if (leq(y.coords(), x)) ++a;
            if (leq(x, y.coords())) ++b;
        }
        const std::size_t lo = std::min(a, b), hi = std::max(a, b);
        // Ascending scan with >= keeps the lexicographically largest on full ties.
        if (i == 0 || lo > best_min || (lo == best_min && hi >= best_max)) {
            best = i;
            best_min = lo;
            best_max = hi;
        }
    }
    return sorted[best];
}

namespace {

/// Admitted level-l coordinates of one dimension, sorted. Without a lattice the
/// values are z/2^l for a contiguous z range and are not materialized.
class Axis {
public:
    Axis(std::uint32_t level, bool inner, const std::vector<double>* lattice)
        : side_(std::ldexp(1.0, static_cast<int>(level))) {
        const auto steps = static_cast<std::uint64_t>(side_);
        z0_ = inner ? 1 : 0;
        const std::uint64_t z1 = inner ? steps - 1 : steps;  // inclusive
        count_ = (inner && steps < 2) ? 0 : z1 - z0_ + 1;
        if (lattice && !lattice->empty()) {
            explicit_ = true;
            for (double v : *lattice) {
                const double z = std::round(v * side_);
                if (z < static_cast<double>(z0_) || z > static_cast<double>(z1)) continue;
                const double u = z / side_;
                if (std::abs(u - v) > 1e-12) continue;
                if (values_.empty() || values_.back() != u) values_.push_back(u);
            }
        }
    }

    std::size_t size() const { return explicit_ ? values_.size() : count_; }
    double operator[](std::size_t i) const {
        return explicit_ ? values_[i] : static_cast<double>(z0_ + i) / side_;
    }

private:
    double side_;
    std::uint64_t z0_ = 0;
    std::size_t count_ = 0;
    bool explicit_ = false;
    std::vector<double> values_;
};

std::vector<Axis> level_axes(std::size_t p, std::uint32_t level, bool inner, const Strategy::Lattice& lattice) {
    std::vector<Axis> axes;
    axes.reserve(p);
    for (std::size_t k = 0; k < p; ++k) axes.emplace_back(level, inner, lattice.empty() ? nullptr : &lattice[k]);
    return axes;
}

}  // namespace

std::vector<UnitPoint> grid_candidates(const DesignState& state, std::uint32_t level, bool inner,
                                       const Strategy::Lattice& lattice) {
    const std::size_t p = state.dimension();
    const auto axes = level_axes(p, level, inner, lattice);
    for (const auto& a : axes) {
        if (a.size() == 0) return {};
    }
    const Axis& last = axes.back();
    std::vector<UnitPoint> out;
    std::vector<std::size_t> idx(p, 0);
    std::vector<double> x(p);
    auto status = [&](std::size_t i) {
        x[p - 1] = last[i];
        return state.classify(std::span<const double>(x));
    };
    while (true) {
        for (std::size_t k = 0; k + 1 < p; ++k) x[k] = axes[k][idx[k]];
        // Along a line the labels run negative, unknown, positive.
        std::size_t lo = 0, hi = last.size();
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (status(mid) == Certainty::CertainNegative) lo = mid + 1; else hi = mid;
        }
        std::size_t end = lo;
        hi = last.size();
        while (end < hi) {
            const std::size_t mid = end + (hi - end) / 2;
            if (status(mid) == Certainty::CertainPositive) hi = mid; else end = mid + 1;
        }
        for (std::size_t i = lo; i < end; ++i) {
            x[p - 1] = last[i];
            out.emplace_back(x);
        }
        std::size_t k = p - 1;
        while (true) {
            if (k == 0) return out;
            --k;
            if (++idx[k] < axes[k].size()) break;
            idx[k] = 0;
        }
    }
}

namespace {

double grid_size(std::size_t p, std::uint32_t level, bool inner) {
    const double side = std::ldexp(1.0, static_cast<int>(level));
    return std::pow(inner ? side - 1.0 : side + 1.0, static_cast<double>(p));
}

}  // namespace

GridStrategy::GridStrategy(StrategySpec spec, Lattice lattice)
    : Strategy(std::move(spec), std::move(lattice)),
      adaptive_(spec_.kind == StrategyKind::AG || spec_.kind == StrategyKind::AI),
      inner_(spec_.kind == StrategyKind::GI || spec_.kind == StrategyKind::AI),
      next_level_(inner_ ? 1 : 0),
      rng_(spec_.seed) {
    if (!is_grid(spec_.kind)) throw UsageError("GridStrategy needs GG, AG, GI or AI");
}

CandidatePolicy GridStrategy::policy() const {
    return adaptive_ ? CandidatePolicy::Prune : CandidatePolicy::Keep;
}

bool GridStrategy::refill() {
    while (state_.candidates().empty()) {
        if (grid_size(spec_.dimension, next_level_, inner_) > kMaxGridPoints || next_level_ > 60) {
            completion_ = Completion::ResolutionLimit;
            return false;
        }
        const std::uint32_t level = next_level_++;
        auto cand = grid_candidates(state_, level, inner_, lattice_);
        // Admitted grid points that are certain but were never evaluated
        // count as skipped runs.
        const double side = std::ldexp(1.0, static_cast<int>(level));
        std::size_t admitted = 0, seen = 0;
        {
            admitted = 1;
            for (const auto& a : level_axes(spec_.dimension, level, inner_, lattice_)) admitted *= a.size();
            for (const auto& e : evaluated_set_) {
                bool on_grid = on_lattice(e);
                for (std::size_t k = 0; k < spec_.dimension && on_grid; ++k) {
                    const double z = e[k] * side;
                    on_grid = z == std::floor(z) && (!inner_ || (z > 0 && z < side));
                }
                if (on_grid) ++seen;
            }
        }
        pending_skips_ += admitted - cand.size() - seen;
        state_.set_level(level);
        if (cand.empty()) {
            if (++empty_levels_ >= 2) {
                completion_ = Completion::Certified;
                return false;
            }
            continue;
        }
        empty_levels_ = 0;
        state_.set_candidates(std::move(cand));
    }
    return true;
}

std::optional<Proposal> GridStrategy::next_proposal() {
    if (!refill()) return std::nullopt;
    const auto& c = state_.candidates();
    Proposal p;
    p.candidates_before = c.size();
    p.level = state_.level();
    p.point = adaptive_ ? ag_select(c) : c[rng_.uniform_index(c.size())];
    return p;
}

void GridStrategy::after_observe(const UnitPoint& x, std::size_t removed) {
    evaluated_set_.insert(x);
    if (adaptive_) {
        // The evaluated point itself is among the removed candidates.
        pending_skips_ += removed > 0 ? removed - 1 : 0;
    } else {
        state_.remove_candidate(x);
    }
}

// ---------------------------------------------------------------------------
// Adaptive Monte Carlo

AmcStrategy::AmcStrategy(StrategySpec spec, Lattice lattice)
    : Strategy(std::move(spec), std::move(lattice)), rng_(spec_.seed) {
    if (spec_.amc_max_attempts == 0) throw UsageError("amc_max_attempts must be >= 1");
}

std::optional<Proposal> AmcStrategy::next_proposal() {
    std::size_t rejected = 0;
    for (std::uint64_t attempt = 0; attempt < spec_.amc_max_attempts; ++attempt) {
        if (spec_.amc_try_budget && tries_ >= *spec_.amc_try_budget) {
            completion_ = Completion::TryBudget;
            pending_skips_ += rejected;
            return std::nullopt;
        }
        ++tries_;
        auto x = draw_point(rng_);
        if (state_.classify(std::span<const double>(x)) == Certainty::Unknown) {
            Proposal p;
            p.point = UnitPoint(std::move(x));
            p.skipped_since_last = rejected;
            return p;
        }
        ++rejected;
    }
    completion_ = Completion::AmcConverged;
    pending_skips_ += rejected;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Active learning with entropy

AleStrategy::AleStrategy(StrategySpec spec, Lattice lattice)
    : Strategy(std::move(spec), std::move(lattice)), rng_(derive_seed(spec_.seed, 2)) {
    StaticDesignSpec init;
    if (spec_.ale_initial_design) {
        init = *spec_.ale_initial_design;
        init.dimension = spec_.dimension;
    } else {
        init.kind = StaticKind::LHD;
        init.dimension = spec_.dimension;
        init.n = 10 * spec_.dimension;
        init.seed = derive_seed(spec_.seed, 1);
    }
    initial_ = generate(init);
    if (!lattice_.empty()) {
        // Snap the initial design to the nearest lawful values.
        for (auto& pt : initial_) {
            std::vector<double> x = pt.vec();
            for (std::size_t k = 0; k < x.size(); ++k) {
                if (lattice_[k].empty()) continue;
                const auto& lv = lattice_[k];
                auto it = std::min_element(lv.begin(), lv.end(), [&](double a, double b) {
                    return std::abs(a - x[k]) < std::abs(b - x[k]);
                });
                x[k] = *it;
            }
            pt = UnitPoint(std::move(x));
        }
    }
}

std::optional<Proposal> AleStrategy::uniform_in_u() {
    std::size_t rejected = 0;
    for (std::uint64_t attempt = 0; attempt < spec_.amc_max_attempts; ++attempt) {
        auto x = draw_point(rng_);
        if (state_.classify(std::span<const double>(x)) == Certainty::Unknown) {
            Proposal p;
            p.point = UnitPoint(std::move(x));
            p.skipped_since_last = rejected;
            return p;
        }
        ++rejected;
    }
    completion_ = Completion::AmcConverged;
    return std::nullopt;
}

std::optional<Proposal> AleStrategy::next_proposal() {
    // Initial design, skipping points that are already certain.
    std::size_t skipped = 0;
    while (initial_pos_ < initial_.size()) {
        const UnitPoint& x = initial_[initial_pos_++];
        if (state_.classify(x) == Certainty::Unknown) {
            Proposal p;
            p.point = x;
            p.skipped_since_last = skipped;
            return p;
        }
        ++skipped;
    }
    pending_skips_ += skipped;

    std::vector<LabeledPoint> data = state_.evaluated();
    SvcModel model = fit_tuned(data, derive_seed(spec_.seed, 3, evaluations()));
    if (model.kind == SvcModel::Kind::Majority) {
        model_ = model;
        return uniform_in_u();
    }
    platt_calibrate(model, data);
    model_ = model;

    const std::size_t p = spec_.dimension;
    std::vector<std::size_t> res(p);
    double total = 1.0;
    for (std::size_t k = 0; k < p; ++k) {
        res[k] = k < 2 ? spec_.ale_candidate_grid : 16;
        if (!lattice_.empty() && !lattice_[k].empty()) res[k] = lattice_[k].size();
        total *= static_cast<double>(res[k]);
    }
    const bool enumerate = total <= static_cast<double>(spec_.ale_max_candidates);
    const std::size_t count = enumerate ? static_cast<std::size_t>(total) : spec_.ale_max_candidates;

    Rng crng(derive_seed(spec_.seed, 4, evaluations()));
    std::vector<std::size_t> idx(p, 0);
    std::vector<double> x(p);
    double best_h = -1.0;
    std::optional<UnitPoint> best;
    std::size_t unknown = 0;
    for (std::size_t c = 0; c < count; ++c) {
        for (std::size_t k = 0; k < p; ++k) {
            const std::size_t cell = enumerate ? idx[k] : crng.uniform_index(res[k]);
            if (!lattice_.empty() && !lattice_[k].empty()) {
                x[k] = lattice_[k][cell];
            } else {
                x[k] = (static_cast<double>(cell) + crng.uniform01()) / static_cast<double>(res[k]);
            }
        }
        if (enumerate) {
            for (std::size_t k = p; k-- > 0;) {
                if (++idx[k] < res[k]) break;
                idx[k] = 0;
            }
        }
        if (state_.classify(std::span<const double>(x)) != Certainty::Unknown) continue;
        ++unknown;
        UnitPoint q(x);
        const double h = binary_entropy(model.probability(q));
        if (h > best_h) {
            best_h = h;
            best = std::move(q);
        }
    }
    if (!best) return uniform_in_u();
    Proposal prop;
    prop.point = *best;
    prop.candidates_before = unknown;
    return prop;
}

// ---------------------------------------------------------------------------
// Static designs

StaticStrategy::StaticStrategy(StrategySpec spec, Lattice lattice) : Strategy(std::move(spec), std::move(lattice)) {
    StaticDesignSpec d;
    switch (spec_.kind) {
        case StrategyKind::SG: d.kind = StaticKind::SG; break;
        case StrategyKind::SI: d.kind = StaticKind::SI; break;
        case StrategyKind::MC: d.kind = StaticKind::MC; break;
        case StrategyKind::LHD: d.kind = StaticKind::LHD; break;
        default: throw UsageError("StaticStrategy needs SG, SI, MC or LHD");
    }
    d.dimension = spec_.dimension;
    d.n = spec_.budget;
    d.seed = spec_.seed;
    if (spec_.budget > 0) points_ = generate(d);
}

std::optional<Proposal> StaticStrategy::next_proposal() {
    if (pos_ >= points_.size()) {
        completion_ = Completion::DesignExhausted;
        return std::nullopt;
    }
    Proposal p;
    p.point = points_[pos_++];
    p.candidates_before = points_.size() - pos_ + 1;
    return p;
}

std::unique_ptr<Strategy> make_strategy(const StrategySpec& spec, Strategy::Lattice lattice) {
    if (spec.dimension == 0) throw UsageError("strategy dimension must be positive");
    if (is_grid(spec.kind)) return std::make_unique<GridStrategy>(spec, std::move(lattice));
    if (spec.kind == StrategyKind::AMC) return std::make_unique<AmcStrategy>(spec, std::move(lattice));
    if (spec.kind == StrategyKind::ALE) return std::make_unique<AleStrategy>(spec, std::move(lattice));
    return std::make_unique<StaticStrategy>(spec, std::move(lattice));
}

// ---------------------------------------------------------------------------
// Driver

OracleError::OracleError(UnitPoint point, const std::string& what)
    : Error("oracle failed at " + point.to_string() + ": " + what), point_(std::move(point)) {}

RunResult run_strategy(Strategy& strategy, const Oracle& oracle, const StepObserver& on_step) {
    if (oracle.dimension() != strategy.spec().dimension) {
        throw UsageError("oracle dimension " + std::to_string(oracle.dimension()) + " does not match strategy dimension " +
                         std::to_string(strategy.spec().dimension));
    }
    RunResult out{{}, strategy.state(), Completion::None};
    while (auto prop = strategy.propose()) {
        Label label;
        try {
            label = oracle.evaluate(prop->point);
        } catch (const std::exception& e) {
            throw OracleError(prop->point, e.what());
        }
        out.trace.push_back(strategy.observe(label));
        if (on_step) on_step(out.trace.back(), strategy.state());
    }
    out.state = strategy.state();
    out.completion = strategy.completion();
    return out;
}

RunResult run_strategy(const StrategySpec& spec, const Oracle& oracle, const StepObserver& on_step) {
    auto s = make_strategy(spec, oracle.lattice());
    return run_strategy(*s, oracle, on_step);
}

}  // namespace adagrid
