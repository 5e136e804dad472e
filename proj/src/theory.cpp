#include "adagrid/theory.hpp"

#include "adagrid/core.hpp"
#include "adagrid/static_designs.hpp"

#include <cmath>

namespace adagrid {

const char* to_string(BoundKind k) {
    switch (k) {
        case BoundKind::Exact: return "Exact";
        case BoundKind::UpperBound: return "UpperBound";
        case BoundKind::LowerBound: return "LowerBound";
        case BoundKind::Asymptote: return "Asymptote";
    }
    return "Exact";
}

namespace {

std::uint64_t root_or_throw(const char* name, std::size_t p, std::uint64_t n, std::uint64_t min_m) {
    if (p == 0) throw UsageError(std::string(name) + ": p must be positive");
    auto m = exact_root(n, p);
    if (!m || *m < min_m) {
        throw UsageError(std::string(name) + ": n=" + std::to_string(n) + " is not m^p with integer m >= " +
                         std::to_string(min_m));
    }
    return *m;
}

double factorial(std::size_t k) {
    double f = 1.0;
    for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return f;
}

double binom(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

std::uint64_t upow(std::uint64_t b, std::size_t e) {
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < e; ++i) r *= b;
    return r;
}

}  // namespace

double sg_worst_volume(std::size_t p, std::uint64_t n) {
    const double m = static_cast<double>(root_or_throw("sg_worst_volume", p, n, 2));
    return 1.0 - std::pow((m - 2.0) / (m - 1.0), static_cast<double>(p));
}

double si_volume(std::size_t p, std::uint64_t n) {
    const double m = static_cast<double>(root_or_throw("si_volume", p, n, 1));
    return 1.0 - static_cast<double>(n) / std::pow(m + 1.0, static_cast<double>(p));
}

BoundResult static_lower_bound(std::size_t p, std::uint64_t n) {
    if (p == 0 || n == 0) return NotApplicable{"p and n must be positive"};
    BoundReport r{"static_lower_bound", p, n, 0.0, BoundKind::LowerBound};
    const double dn = static_cast<double>(n);
    if (p == 1) {
        r.value = 1.0 / (dn + 1.0);
        return r;
    }
    const double dp = static_cast<double>(p);
    const double need = std::pow(10.0, dp - 1.0) * std::pow(dp, dp);
    if (dn < need) {
        return NotApplicable{"requires n >= 10^(p-1) p^p = " + std::to_string(static_cast<std::uint64_t>(need))};
    }
    r.value = std::pow(2.0, -1.0 / (dp - 1.0)) * std::pow(10.0, -1.0 / dp) / factorial(p - 1) * std::pow(dn, -1.0 / dp);
    return r;
}

BoundResult adaptive_lower_bound(std::size_t p, std::uint64_t n) {
    if (p == 0 || n == 0) return NotApplicable{"p and n must be positive"};
    BoundReport r{"adaptive_lower_bound", p, n, 0.0, BoundKind::LowerBound};
    const double dn = static_cast<double>(n);
    if (p == 1) {
        r.value = std::ldexp(1.0, -static_cast<int>(std::min<std::uint64_t>(n, 2000)));
        return r;
    }
    const double dp = static_cast<double>(p);
    const double need = std::pow(4.0, dp - 2.0) * std::pow(dp, dp);
    if (dn < need) {
        return NotApplicable{"requires n >= 4^(p-2) p^p = " + std::to_string(static_cast<std::uint64_t>(need))};
    }
    r.value = std::pow(dp, 1.0 / (dp - 1.0)) * std::pow(2.0, -(dp + 1.0) / (dp - 1.0)) / factorial(p - 1) *
              std::pow(dn, -1.0 / (dp - 1.0));
    return r;
}

std::uint64_t gg_count_bound(std::size_t p, std::uint32_t g) {
    if (p == 0) throw UsageError("gg_count_bound: p must be positive");
    std::uint64_t total = upow(2, p);
    for (std::uint32_t l = 1; l <= g; ++l) total += p * upow((std::uint64_t{1} << l) + 1, p - 1);
    return total;
}

std::uint64_t gi_count_exact(std::size_t p, std::uint32_t g) {
    if (p == 0) throw UsageError("gi_count_exact: p must be positive");
    std::uint64_t total = 0;
    for (std::uint32_t l = 1; l <= g; ++l) {
        const std::uint64_t s = std::uint64_t{1} << l;
        total += upow(s - 1, p) - upow(s - 2, p);
    }
    return total;
}

double g_p_constant(std::size_t p) {
    if (p == 0) throw UsageError("g_p_constant: p must be positive");
    const double half = static_cast<double>(p) / 2.0;
    double s = 0.0;
    for (std::size_t k = 0; static_cast<double>(k) < half; ++k) {
        const double term = binom(p, k) * std::pow(half - static_cast<double>(k), static_cast<double>(p) - 1.0);
        s += (k % 2 == 0) ? term : -term;
    }
    return s;
}

double mc_constant(std::size_t p) {
    if (p == 0) throw UsageError("mc_constant: p must be positive");
    const double dp = static_cast<double>(p);
    return 2.0 * std::pow(factorial(p), 1.0 / dp - 1.0) * std::tgamma(1.0 / dp) * g_p_constant(p);
}

double amc_constant(std::size_t p) {
    if (p == 0) throw UsageError("amc_constant: p must be positive");
    if (p == 1) return std::exp(kEulerGamma);
    const double dp = static_cast<double>(p);
    return std::pow(mc_constant(p), dp / (dp - 1.0)) * std::pow(dp / (dp - 1.0), 1.0 / (dp - 1.0));
}

double grid_adaptive_constant(std::size_t p) {
    if (p < 2) throw UsageError("grid_adaptive_constant: p must be >= 2");
    const double dp = static_cast<double>(p);
    return 2.0 * std::pow(dp, dp / (dp - 1.0)) * std::pow(std::pow(2.0, dp - 1.0) - 1.0, -1.0 / (dp - 1.0));
}

double mc_worst_expected_volume_p1(std::uint64_t n) {
    if (n == 0) return 1.0;
    const double dn = static_cast<double>(n);
    return (2.0 - std::ldexp(1.0, -static_cast<int>(std::min<std::uint64_t>(n, 2000)))) / (dn + 1.0);
}

double amc_expected_evaluations_p1(std::uint64_t n) {
    double s = 0.0;
    for (std::uint64_t i = 1; i <= n; ++i) {
        s += (2.0 - std::ldexp(1.0, -static_cast<int>(std::min<std::uint64_t>(i - 1, 2000)))) / static_cast<double>(i);
    }
    return s;
}

double amc_asymptote_p1() { return 2.0 * (kEulerGamma - std::log(2.0)); }

}  // namespace adagrid
