#pragma once

#include "adagrid/monotone.hpp"
#include "adagrid/strategy.hpp"
#include "adagrid/transform.hpp"
#include "adagrid/volume.hpp"

#include "json.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <type_traits>
#include <vector>

namespace adagrid {

inline constexpr int kSessionSchemaVersion = 1;

enum class SessionStatus { ReadyToSuggest, AwaitingOutcome, Complete, Corrupt };
const char* to_string(SessionStatus s);

/// The operation does not fit the session's current status.
class SessionStateError : public Error {
public:
    SessionStateError(std::string code, const std::string& what) : Error(what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

class SessionNotFound : public Error {
public:
    using Error::Error;
};

struct Suggestion {
    UnitPoint unit;
    std::vector<double> physical;
    std::size_t step = 0;  // 1-based index the outcome will get
    std::uint32_t level = 0;
    std::size_t candidates_before = 0;
};

struct SuggestResult {
    std::optional<Suggestion> suggestion;  // empty when complete
    Completion completion = Completion::None;
    double v_uncertain = 1.0;
};

struct OutcomeResult {
    StepRecord record;
    VolumeReport volume;
};

struct ReportOptions {
    std::size_t slice_i = 0;
    std::size_t slice_j = 1;
    std::size_t grid = 64;
    /// Unit coordinates for the dimensions not in the slice (default 0.5).
    std::vector<std::optional<double>> fixed;
};

/// Human-in-the-loop campaign. Every mutation goes through the wrapped
/// strategy, so history replays to the same state.
class Session {
public:
    static Session create(std::string id, Transform transform, StrategySpec spec, std::string created_at);
    /// Replays the stored history. CorruptedStateError if the replay disagrees
    /// with the stored proposals, pending point or state snapshot.
    static Session from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    const std::string& id() const { return id_; }
    const std::string& created_at() const { return created_at_; }
    SessionStatus status() const { return status_; }
    const Transform& transform() const { return transform_; }
    const StrategySpec& spec() const { return strategy_->spec(); }
    const std::vector<StepRecord>& history() const { return history_; }
    const DesignState& state() const { return strategy_->state(); }
    Completion completion() const { return strategy_->completion(); }
    const std::optional<std::pair<LabeledPoint, LabeledPoint>>& witnesses() const { return witnesses_; }

    /// Idempotent while a suggestion is pending.
    SuggestResult suggest();
    /// Records the pending point's label. A label that contradicts the data
    /// marks the session Corrupt and throws NonMonotoneError.
    OutcomeResult record_outcome(Label label);

    VolumeReport volume() const { return uncertain_volume(state()); }
    nlohmann::json summary() const;
    nlohmann::json report(const ReportOptions& opt) const;

    Session(Session&&) noexcept = default;
    Session& operator=(Session&&) noexcept = default;

private:
    Session() = default;
    nlohmann::json state_snapshot() const;
    nlohmann::json pending_json() const;
    Suggestion make_suggestion(const Proposal& p) const;
    void refresh_status();

    std::string id_;
    std::string created_at_;
    Transform transform_;
    std::unique_ptr<Strategy> strategy_;
    std::vector<StepRecord> history_;
    SessionStatus status_ = SessionStatus::ReadyToSuggest;
    std::optional<LabeledPoint> corrupting_;
    std::optional<std::pair<LabeledPoint, LabeledPoint>> witnesses_;
};

/// Strategies a session may wrap.
bool session_strategy_allowed(StrategyKind k);

/// Default budget for sessions created without one.
inline constexpr std::size_t kDefaultSessionBudget = 1000;

/// Parses a creation request: {"strategy": {...}, "transform": {...} |
/// {"builtin": name} | absent}. Throws UsageError.
std::pair<Transform, StrategySpec> parse_create_request(const nlohmann::json& body);

/// One JSON file per session in a directory. Writes go through a temporary
/// file and a rename; each session is guarded by an in-process lock and an
/// advisory file lock, so the CLI and a running server can share a directory.
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }

    Session create(Transform transform, StrategySpec spec);
    std::vector<nlohmann::json> list() const;

    /// Loads, runs fn and persists the session, also when fn throws (a
    /// contradicting outcome must still be saved as Corrupt).
    template <class F>
    auto mutate(const std::string& id, F&& fn) {
        auto guard = lock(id, true);
        Session s = load_unlocked(id);
        try {
            if constexpr (std::is_void_v<decltype(fn(s))>) {
                fn(s);
                save_unlocked(s);
            } else {
                auto r = fn(s);
                save_unlocked(s);
                return r;
            }
        } catch (...) {
            try {
                save_unlocked(s);
            } catch (...) {
            }
            throw;
        }
    }

    /// Loads and runs fn without persisting.
    template <class F>
    auto read(const std::string& id, F&& fn) const {
        auto guard = lock(id, false);
        const Session s = load_unlocked(id);
        return fn(s);
    }

    bool exists(const std::string& id) const;

private:
    struct Guard;
    std::shared_ptr<Guard> lock(const std::string& id, bool exclusive) const;
    Session load_unlocked(const std::string& id) const;
    void save_unlocked(const Session& s) const;
    std::filesystem::path path_for(const std::string& id) const;
    std::string new_id() const;

    std::filesystem::path dir_;
    mutable std::mutex map_mutex_;
    mutable std::map<std::string, std::shared_ptr<std::shared_mutex>> locks_;
};

/// Current UTC time as ISO 8601.
std::string utc_timestamp();

}  // namespace adagrid
