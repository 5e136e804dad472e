#pragma once

#include "adagrid/oracle.hpp"
#include "adagrid/strategy.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace adagrid {

struct CheckOptions {
    std::uint64_t seed = 20240601;
    /// Full-scale replicate counts instead of desk-scale ones.
    bool full = false;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    nlohmann::json metrics = nlohmann::json::object();
    double seconds = 0.0;
};

struct CheckInfo {
    std::string name;
    std::string summary;
    std::function<CheckResult(const CheckOptions&)> run;
};

/// All named formula-versus-simulation checks.
const std::vector<CheckInfo>& theory_checks();

/// Runs one check by name; UsageError for unknown names.
CheckResult run_check(const std::string& name, const CheckOptions& opt);

/// Evaluation count and state at the moment grid level g is fully known,
/// for g = first level .. max_level. Stops early if the run completes.
struct LevelCompletion {
    std::uint32_t level = 0;
    std::size_t evaluations = 0;
    double v_uncertain = 1.0;
};
std::vector<LevelCompletion> level_completions(StrategyKind kind, const Oracle& oracle, std::uint32_t max_level,
                                               std::uint64_t seed);

/// Runs a one-dimensional strategy against an adversary that always keeps the
/// larger half of the uncertain interval, then returns a threshold consistent
/// with all answers together with the resulting uncertain volume.
struct AdversaryOutcome {
    double threshold = 0.5;
    double v_uncertain = 1.0;
    std::size_t evaluations = 0;
};
AdversaryOutcome adversarial_threshold_p1(const StrategySpec& spec);

/// Uncertain volume left by the full static design on the oracle.
double static_design_volume(const std::vector<UnitPoint>& design, const Oracle& oracle);

}  // namespace adagrid
