#pragma once

#include "adagrid/monotone.hpp"
#include "adagrid/oracle.hpp"
#include "adagrid/rng.hpp"
#include "adagrid/static_designs.hpp"
#include "adagrid/svc.hpp"

#include "json.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace adagrid {

enum class StrategyKind { AMC, GG, AG, GI, AI, ALE, SG, SI, MC, LHD };

const char* to_string(StrategyKind k);
StrategyKind parse_strategy_kind(const std::string& s);
bool is_grid(StrategyKind k);
bool is_static(StrategyKind k);

struct StrategySpec {
    StrategyKind kind = StrategyKind::AG;
    std::size_t dimension = 1;
    std::size_t budget = 0;
    std::uint64_t seed = 0;

    std::uint64_t amc_max_attempts = 1'000'000;
    /// Stop AMC once this many uniform points have been tried.
    std::optional<std::uint64_t> amc_try_budget;

    /// Candidate resolution of the first two dimensions (others use 16).
    std::size_t ale_candidate_grid = 64;
    std::size_t ale_max_candidates = 65'536;
    std::optional<StaticDesignSpec> ale_initial_design;
};

nlohmann::json to_json(const StrategySpec& s);
StrategySpec strategy_spec_from_json(const nlohmann::json& j);

struct StepRecord {
    std::size_t index = 0;  // 1-based
    UnitPoint point;
    Label label = Label::Negative;
    std::size_t candidates_before = 0;
    std::size_t skipped_since_last = 0;
    std::uint32_t level_at_step = 0;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

nlohmann::json to_json(const StepRecord& r);
StepRecord step_record_from_json(const nlohmann::json& j);
/// One compact JSON object per line.
std::string trace_to_ndjson(const std::vector<StepRecord>& trace);
std::vector<StepRecord> trace_from_ndjson(const std::string& text);

struct Proposal {
    UnitPoint point;
    std::size_t candidates_before = 0;
    std::size_t skipped_since_last = 0;
    std::uint32_t level = 0;
};

/// Why a strategy stopped proposing points.
enum class Completion {
    None,
    Budget,           // budget reached
    Certified,        // two consecutive empty candidate levels
    ResolutionLimit,  // next grid level too large to enumerate
    AmcConverged,     // rejection cap hit in one step
    TryBudget,        // AMC try budget used up
    DesignExhausted,  // static design fully evaluated
};

const char* to_string(Completion c);

/// Sequential design as a propose / observe state machine.
///
/// propose() is idempotent while a point is pending. observe() records the
/// outcome of the pending point and returns its trace record.
class Strategy {
public:
    using Lattice = std::vector<std::vector<double>>;

    Strategy(StrategySpec spec, Lattice lattice);
    virtual ~Strategy() = default;

    const StrategySpec& spec() const { return spec_; }
    const DesignState& state() const { return state_; }
    const std::optional<Proposal>& pending() const { return pending_; }
    std::size_t evaluations() const { return state_.evaluated().size(); }
    Completion completion() const { return completion_; }
    bool complete() const { return completion_ != Completion::None; }

    std::optional<Proposal> propose();
    /// Throws NonMonotoneError (state unchanged, point stays pending) on a
    /// contradicting label.
    StepRecord observe(Label label);

protected:
    /// Next point or nullopt after setting completion_.
    virtual std::optional<Proposal> next_proposal() = 0;
    virtual CandidatePolicy policy() const { return CandidatePolicy::Prune; }
    virtual void after_observe(const UnitPoint& x, std::size_t removed);

    /// Uniform point in the cube, or on the lattice if the oracle has one.
    std::vector<double> draw_point(Rng& rng) const;
    bool on_lattice(const UnitPoint& x) const;

    StrategySpec spec_;
    Lattice lattice_;
    DesignState state_;
    Completion completion_ = Completion::None;
    std::size_t pending_skips_ = 0;
    std::optional<Proposal> pending_;
};

/// GG, AG, GI and AI.
class GridStrategy final : public Strategy {
public:
    GridStrategy(StrategySpec spec, Lattice lattice);

    /// Largest grid the strategy will enumerate.
    static constexpr double kMaxGridPoints = 5e7;

protected:
    std::optional<Proposal> next_proposal() override;
    CandidatePolicy policy() const override;
    void after_observe(const UnitPoint& x, std::size_t removed) override;

private:
    bool refill();

    bool adaptive_;
    bool inner_;
    std::uint32_t next_level_;
    std::size_t empty_levels_ = 0;
    Rng rng_;
    std::set<UnitPoint> evaluated_set_;
};

class AmcStrategy final : public Strategy {
public:
    AmcStrategy(StrategySpec spec, Lattice lattice);

    std::uint64_t tries() const { return tries_; }

protected:
    std::optional<Proposal> next_proposal() override;

private:
    Rng rng_;
    std::uint64_t tries_ = 0;
};

/// Entropy-driven active learning on a calibrated SVC.
class AleStrategy final : public Strategy {
public:
    AleStrategy(StrategySpec spec, Lattice lattice);

    /// Model used for the most recent entropy search, if any.
    const std::optional<SvcModel>& last_model() const { return model_; }

protected:
    std::optional<Proposal> next_proposal() override;

private:
    std::optional<Proposal> uniform_in_u();

    std::vector<UnitPoint> initial_;
    std::size_t initial_pos_ = 0;
    Rng rng_;
    std::optional<SvcModel> model_;
};

/// SG, SI, MC and LHD evaluated in generation order.
class StaticStrategy final : public Strategy {
public:
    StaticStrategy(StrategySpec spec, Lattice lattice);

protected:
    std::optional<Proposal> next_proposal() override;
    CandidatePolicy policy() const override { return CandidatePolicy::Keep; }

private:
    std::vector<UnitPoint> points_;
    std::size_t pos_ = 0;
};

std::unique_ptr<Strategy> make_strategy(const StrategySpec& spec, Strategy::Lattice lattice = {});

/// Candidates maximizing min(|A_x|, |B_x|), then max(|A_x|, |B_x|), then the
/// lexicographically largest point. A_x and B_x include x itself.
UnitPoint ag_select(const std::vector<UnitPoint>& candidates);

/// Level-l grid points (full: z/2^l, z = 0..2^l; inner: z = 1..2^l-1) that are
/// Unknown in the state and admitted by the lattice.
std::vector<UnitPoint> grid_candidates(const DesignState& state, std::uint32_t level, bool inner,
                                       const Strategy::Lattice& lattice = {});

/// An oracle call failed; carries the offending point.
class OracleError : public Error {
public:
    OracleError(UnitPoint point, const std::string& what);
    const UnitPoint& point() const { return point_; }

private:
    UnitPoint point_;
};

struct RunResult {
    std::vector<StepRecord> trace;
    DesignState state;
    Completion completion = Completion::None;
};

using StepObserver = std::function<void(const StepRecord&, const DesignState&)>;

/// Loops propose / evaluate / observe until the strategy completes.
RunResult run_strategy(const StrategySpec& spec, const Oracle& oracle, const StepObserver& on_step = {});
RunResult run_strategy(Strategy& strategy, const Oracle& oracle, const StepObserver& on_step = {});

}  // namespace adagrid
