#pragma once

#include "adagrid/core.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace adagrid {

struct PlattParams {
    double a = 0.0;
    double b = 0.0;
};

/// Gaussian-kernel hard-margin SVC, or a constant majority-class predictor.
struct SvcModel {
    enum class Kind { Kernel, Majority };

    Kind kind = Kind::Majority;
    Label majority = Label::Positive;
    double gamma = 0.0;
    double bias = 0.0;
    std::vector<LabeledPoint> points;
    std::vector<double> alphas;
    std::optional<PlattParams> platt;

    bool converged = true;
    std::uint64_t iterations = 0;

    /// sum alpha_i f_i exp(-gamma |x - x_i|^2) + b. Majority models return +-1.
    double decision(const UnitPoint& x) const;
    /// Sign of the decision value, with sign(0) = +1.
    Label predict(const UnitPoint& x) const;
    /// Platt probability of +1; requires calibration (majority: 0 or 1).
    double probability(const UnitPoint& x) const;
    double probability_from_decision(double s) const;

    std::size_t support_count() const;
};

struct SvcOptions {
    double tolerance = 1e-6;
    std::uint64_t max_iterations = 100'000;
};

/// Solves the hard-margin dual by two-coordinate updates. Both labels must be
/// present; otherwise UsageError (use majority_model).
SvcModel svc_fit(const std::vector<LabeledPoint>& data, double gamma, const SvcOptions& opt = {});

/// Constant predictor for the majority label (ties go to +1).
SvcModel majority_model(const std::vector<LabeledPoint>& data);

/// Bias recomputed from alphas: the average over alpha > 0 of
/// f(x) - sum_{alpha_y > 0} alpha_y f(y) K(x, y).
double recompute_bias(const std::vector<LabeledPoint>& data, const std::vector<double>& alphas, double gamma);

/// 0.5 sum_ij a_i a_j f_i f_j K_ij - sum_i a_i.
double dual_objective(const std::vector<LabeledPoint>& data, const std::vector<double>& alphas, double gamma);

/// {2^k / p : k = -6..6}, ascending.
std::vector<double> default_gamma_grid(std::size_t p);

struct GammaSelection {
    std::optional<double> gamma;  // empty: majority fallback
    std::vector<std::size_t> cv_errors;
};

/// Minimum class size below which prediction falls back to the majority class.
inline constexpr std::size_t kMinPerClass = 5;

/// Stratified k-fold CV misclassification count per grid value; smallest
/// count wins, ties to the smaller gamma. Falls back when a class has fewer
/// than kMinPerClass points.
GammaSelection select_gamma_cv(const std::vector<LabeledPoint>& data, const std::vector<double>& grid,
                               std::size_t folds, std::uint64_t seed, const SvcOptions& opt = {});

/// CV-tuned fit or majority fallback.
SvcModel fit_tuned(const std::vector<LabeledPoint>& data, std::uint64_t seed, const SvcOptions& opt = {});

/// Fits p(+1 | s) = 1 / (1 + exp(a s + b)) to the training decision values by
/// Newton's method with smoothed targets; |a| is capped at 50.
void platt_calibrate(SvcModel& model, const std::vector<LabeledPoint>& data);

/// Binary entropy in nats, 0 at the endpoints.
double binary_entropy(double p);

nlohmann::json to_json(const SvcModel& m);
SvcModel svc_from_json(const nlohmann::json& j);

}  // namespace adagrid
