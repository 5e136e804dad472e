#pragma once

#include <cstdint>
#include <string>
#include <variant>

namespace adagrid {

enum class BoundKind { Exact, UpperBound, LowerBound, Asymptote };

const char* to_string(BoundKind k);

/// Returned when a conditional bound is evaluated outside its hypotheses.
struct NotApplicable {
    std::string reason;
};

struct BoundReport {
    std::string name;
    std::size_t p = 0;
    std::uint64_t n = 0;  // run count, or grid level for count formulas
    double value = 0.0;
    BoundKind kind = BoundKind::Exact;
};

using BoundResult = std::variant<BoundReport, NotApplicable>;

inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Largest uncertain volume of the full grid with n = m^p runs, m >= 2:
/// 1 - (m-2)^p / (m-1)^p.
double sg_worst_volume(std::size_t p, std::uint64_t n);

/// Uncertain volume of the inner grid with n = m^p runs: 1 - n / (m+1)^p.
double si_volume(std::size_t p, std::uint64_t n);

/// Lower bound on the worst-case volume of any static n-run design.
BoundResult static_lower_bound(std::size_t p, std::uint64_t n);

/// Lower bound on the worst-case volume of any adaptive n-run design.
BoundResult adaptive_lower_bound(std::size_t p, std::uint64_t n);

/// 2^p + sum_{l=1..g} p (2^l+1)^(p-1).
std::uint64_t gg_count_bound(std::size_t p, std::uint32_t g);

/// sum_{l=1..g} ((2^l-1)^p - (2^l-2)^p).
std::uint64_t gi_count_exact(std::size_t p, std::uint32_t g);

/// sum_{0 <= k < p/2} (-1)^k C(p,k) (p/2 - k)^(p-1).
double g_p_constant(std::size_t p);

/// 2 p!^(1/p - 1) Gamma(1/p) g_p: E V(U) ~ c n^(-1/p) for MC on the half-space function.
double mc_constant(std::size_t p);

/// c^(p/(p-1)) (p/(p-1))^(1/(p-1)) with c = mc_constant(p), p >= 2; exp(gamma) at p = 1.
double amc_constant(std::size_t p);

/// 2 p^(p/(p-1)) (2^(p-1) - 1)^(-1/(p-1)), p >= 2: GG / GI volume constant.
double grid_adaptive_constant(std::size_t p);

/// (2 - 2^-n) / (n+1); 1 at n = 0.
double mc_worst_expected_volume_p1(std::uint64_t n);

/// sum_{i=1..n} (2 - 2^-(i-1)) / i: expected AMC evaluations among n tries at p = 1.
double amc_expected_evaluations_p1(std::uint64_t n);

/// 2 (gamma - ln 2).
double amc_asymptote_p1();

}  // namespace adagrid
