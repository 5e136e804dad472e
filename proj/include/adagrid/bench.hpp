#pragma once

#include "adagrid/oracle.hpp"
#include "adagrid/strategy.hpp"
#include "adagrid/svc.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace adagrid {

/// Where each replicate's oracle comes from.
struct OracleFamily {
    enum class Kind { Arctan, Fixed, Staircase };
    Kind kind = Kind::Arctan;
    std::size_t dimension = 2;
    /// Replicate count (one oracle draw each).
    std::size_t draws = 20;
    /// Arctan: mu ~ Uniform(mu_range); defaults to the calibrated range.
    std::optional<std::pair<double, double>> mu_range;
    /// Fixed: a make_oracle() description shared by every replicate.
    nlohmann::json fixed;
    /// Staircase: cells per axis.
    std::size_t staircase_resolution = 8;
};

enum class Predictor { Svc, Hybrid };

struct ExperimentPlan {
    OracleFamily oracle;
    std::vector<StrategySpec> strategies;
    std::vector<std::size_t> budgets;
    std::size_t test_points = 10'000;
    std::uint64_t master_seed = 0;
    std::size_t parallelism = 1;
    bool accuracy = true;
    Predictor predictor = Predictor::Svc;
    std::string base_dir = ".";
};

/// Parses a plan. With full = true the optional "full" object is merged over
/// the top level first. All validation problems are reported in one
/// UsageError, one per line.
ExperimentPlan plan_from_json(const nlohmann::json& j, bool full = false, const std::string& base_dir = ".");
nlohmann::json to_json(const ExperimentPlan& plan);
/// Problems with the plan; empty when valid.
std::vector<std::string> validate_plan(const ExperimentPlan& plan);

struct ResultRow {
    std::string strategy;
    std::size_t p = 0;
    std::string oracle_id;
    std::size_t n = 0;
    double v_uncertain = 1.0;
    /// NaN when accuracy is disabled or the row is an error row.
    double accuracy = 0.0;
    /// Empty: majority fallback.
    std::optional<double> gamma;
    std::int64_t wall_time_ms = 0;

    // Not part of the CSV.
    std::size_t replicate = 0;
    bool volume_mc = false;
    std::optional<std::string> error;

    bool is_error() const { return error.has_value(); }
};

/// CSV text cell for the gamma column: the number, "majority", "none" when
/// no classifier was fitted (NaN accuracy), or "error".
std::string gamma_cell(const ResultRow& r);

struct BenchResult {
    std::vector<ResultRow> rows;
    /// Per replicate: the oracle description and seeds used.
    nlohmann::json replicates = nlohmann::json::array();
    std::size_t error_count = 0;
};

/// Runs every replicate x strategy. Each strategy runs one trace to the
/// largest budget and emits a row at every budget checkpoint. SG, SI and LHD
/// are not nested across n, so they get a fresh design per budget instead
/// (SG and SI only where the budget is m^p).
BenchResult run_plan(const ExperimentPlan& plan);

/// Fraction of seeded uniform test points where the predictor agrees with
/// the oracle.
double accuracy_eval(const SvcModel& model, const Oracle& oracle, std::size_t test_points, std::uint64_t seed);
double accuracy_eval(const std::vector<UnitPoint>& test, const std::vector<Label>& truth,
                     const std::function<Label(const UnitPoint&)>& predict);

/// Defers to the certain regions of the state and uses the model elsewhere.
Label hybrid_predict(const DesignState& state, const SvcModel& model, const UnitPoint& x);

/// Running fraction of -1 labels after each evaluation.
std::vector<double> negative_proportion_track(const std::vector<StepRecord>& trace);

/// Fixed CSV header.
inline constexpr const char* kResultCsvHeader = "strategy,p,oracle_id,n,v_uncertain,accuracy,gamma,wall_time_ms";

std::string results_to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> results_from_csv(const std::string& text);

/// FNV-1a over the CSV with the wall_time_ms column blanked.
std::string determinism_digest(const std::vector<ResultRow>& rows);

/// Writes path (CSV) and path + ".meta.json". Throws IoError.
void emit_results(const BenchResult& result, const ExperimentPlan& plan, const std::string& path);

/// Mean of a column per (strategy, n) over non-error rows.
struct SummaryRow {
    std::string strategy;
    std::size_t n = 0;
    std::size_t count = 0;
    double mean_v = 0.0;
    double se_v = 0.0;
    double mean_accuracy = 0.0;
};
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);
const SummaryRow* find_summary(const std::vector<SummaryRow>& s, const std::string& strategy, std::size_t n);

std::string software_version();

}  // namespace adagrid
