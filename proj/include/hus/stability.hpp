#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hus/grid.hpp"

namespace hus {

/// Band around |e(nh)| = 1 inside which the equation is treated as not
/// Hyers-Ulam stable; the constant formula divides by |1 - |e||.
inline constexpr double kUnitModulusTolerance = 1e-9;

/// Band around a vanishing factor |1 + h*lambda_k| inside which the cycle is
/// treated as degenerate.
inline constexpr double kZeroFactorTolerance = 1e-12;

/// The n phase sums S_0..S_{n-1}: S_k adds the reciprocals of the running
/// absolute factor products starting at lambda_k and wrapping once around
/// the cycle. Each sum has exactly n terms.
struct ReciprocalSums {
    std::vector<double> values;
    std::size_t argmax_index = 0; // lowest index on ties

    double max() const { return values[argmax_index]; }
};

inline ReciprocalSums reciprocal_sums(const PeriodicCycle& cycle) {
    const TimeIndex n = cycle.period();
    ReciprocalSums out;
    out.values.resize(static_cast<std::size_t>(n));
    for (TimeIndex k = 0; k < n; ++k) {
        double sum = 0.0;
        double product = 1.0;
        for (TimeIndex j = 0; j < n; ++j) {
            const double factor = std::abs(cycle.factor_at(k + j));
            if (factor <= kZeroFactorTolerance) {
                throw DegenerateError("factor 1 + h*lambda vanishes at cycle index " +
                                      std::to_string((k + j) % n));
            }
            product *= factor;
            sum += 1.0 / product;
        }
        out.values[static_cast<std::size_t>(k)] = sum;
    }
    out.argmax_index = static_cast<std::size_t>(
        std::max_element(out.values.begin(), out.values.end()) - out.values.begin());
    return out;
}

/// First-order Hyers-Ulam stability constant
///   K0 = h |e(nh)| / |1 - |e(nh)|| * max{S_0, ..., S_{n-1}}.
/// Requires 0 < |e(nh)| != 1; the constant for the sign-flipped equation is
/// hyers_ulam_constant(cycle.negated()).
inline double hyers_ulam_constant(const PeriodicCycle& cycle) {
    const ReciprocalSums sums = reciprocal_sums(cycle); // throws on zero factor
    const double e = std::abs(discrete_exponential(cycle, cycle.period()));
    if (std::abs(e - 1.0) <= kUnitModulusTolerance) {
        throw NotStableError("|e(nh)| = 1: not Hyers-Ulam stable");
    }
    return cycle.h() * e / std::abs(1.0 - e) * sums.max();
}

enum class EquationFamily {
    FirstHomogeneous,    // Dx - lambda x = 0
    FirstNonhomogeneous, // Dy + lambda y = f
    Hill,                // D2y + [Dlambda - lambda(t)lambda(t+h)] y = 0
    HillNonhomogeneous,  // same left side, forced
    Pqr,                 // third order, p = +lambda(t+2h) cascade through Hill
    Pqr2,                // third order, p = -lambda(t+2h) cascade through Hill
    Pqr3,                // third order, second-order substitution, +lambda step
    Pqr4,                // third order, second-order substitution, -lambda step
};

inline int equation_order(EquationFamily family) {
    switch (family) {
        case EquationFamily::FirstHomogeneous:
        case EquationFamily::FirstNonhomogeneous: return 1;
        case EquationFamily::Hill:
        case EquationFamily::HillNonhomogeneous: return 2;
        default: return 3;
    }
}

/// Which of the two signed discrete exponentials the family's constant needs.
inline bool family_needs_positive_side(EquationFamily family) {
    return family != EquationFamily::FirstNonhomogeneous;
}
inline bool family_needs_negative_side(EquationFamily family) {
    return family != EquationFamily::FirstHomogeneous;
}

/// Coefficient of the Hill-type equation, as an n-cycle:
/// value k is (lambda_{k+1} - lambda_k)/h - lambda_k lambda_{k+1}.
/// The result can have a smaller true period than n (for special cycles);
/// it is stored with period n as given.
inline PeriodicCycle hill_coefficient_cycle(const PeriodicCycle& cycle) {
    const TimeIndex n = cycle.period();
    const double h = cycle.h();
    std::vector<double> a(static_cast<std::size_t>(n));
    for (TimeIndex k = 0; k < n; ++k) {
        const double l0 = cycle.value_at(k);
        const double l1 = cycle.value_at(k + 1);
        a[static_cast<std::size_t>(k)] = (l1 - l0) / h - l0 * l1;
    }
    return PeriodicCycle::with_period_as_given(h, std::move(a));
}

/// The three n-cycle coefficients p, q, r of the third-order equation
///   D3y + p D2y + q Dy + r y = 0,
/// computed pointwise from shifted lambda values and its grid differences.
struct ThirdOrderCoefficients {
    PeriodicCycle p;
    PeriodicCycle q;
    PeriodicCycle r;
};

inline ThirdOrderCoefficients third_order_coefficients(const PeriodicCycle& cycle,
                                                       EquationFamily family) {
    const TimeIndex n = cycle.period();
    const double h = cycle.h();
    const auto lam = [&](TimeIndex k) { return cycle.value_at(k); };
    const auto dlam = [&](TimeIndex k) { return (lam(k + 1) - lam(k)) / h; };
    const auto d2lam = [&](TimeIndex k) { return (dlam(k + 1) - dlam(k)) / h; };

    std::vector<double> p(static_cast<std::size_t>(n));
    std::vector<double> q(static_cast<std::size_t>(n));
    std::vector<double> r(static_cast<std::size_t>(n));
    for (TimeIndex k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(k);
        switch (family) {
            case EquationFamily::Pqr:
                p[i] = lam(k + 2);
                q[i] = 2.0 * dlam(k + 1) + dlam(k + 2) - lam(k + 2) * lam(k + 3);
                r[i] = d2lam(k) + lam(k) * dlam(k + 2) - lam(k) * lam(k + 2) * lam(k + 3);
                break;
            case EquationFamily::Pqr2:
                p[i] = -lam(k + 2);
                q[i] = -2.0 * dlam(k + 1) + dlam(k + 2) - lam(k + 2) * lam(k + 3);
                r[i] = -d2lam(k) - lam(k) * dlam(k + 2) + lam(k) * lam(k + 2) * lam(k + 3);
                break;
            case EquationFamily::Pqr3:
                p[i] = lam(k + 2);
                q[i] = dlam(k + 1) - lam(k + 1) * lam(k + 2);
                r[i] = d2lam(k) - lam(k) * dlam(k + 1) - lam(k) * lam(k + 1) * lam(k + 2);
                break;
            case EquationFamily::Pqr4:
                p[i] = -lam(k + 2);
                q[i] = dlam(k + 1) - lam(k + 1) * lam(k + 2);
                r[i] = d2lam(k) - lam(k + 1) * dlam(k + 1) -
                       (lam(k + 1) + lam(k + 2)) * dlam(k) + lam(k) * lam(k + 1) * lam(k + 2);
                break;
            default:
                throw std::invalid_argument("third_order_coefficients needs a third-order family");
        }
    }
    return ThirdOrderCoefficients{PeriodicCycle::with_period_as_given(h, std::move(p)),
                                  PeriodicCycle::with_period_as_given(h, std::move(q)),
                                  PeriodicCycle::with_period_as_given(h, std::move(r))};
}

/// Family stability constant built from the two first-order constants:
///   first order          K0(lambda) or K0(-lambda)
///   Hill (both kinds)    K0(lambda) K0(-lambda)
///   Pqr, Pqr3            K0(lambda) K0(-lambda)^2
///   Pqr2, Pqr4           K0(lambda)^2 K0(-lambda)
inline double composite_constant(const PeriodicCycle& cycle, EquationFamily family) {
    switch (family) {
        case EquationFamily::FirstHomogeneous:
            return hyers_ulam_constant(cycle);
        case EquationFamily::FirstNonhomogeneous:
            return hyers_ulam_constant(cycle.negated());
        case EquationFamily::Hill:
        case EquationFamily::HillNonhomogeneous:
            return hyers_ulam_constant(cycle) * hyers_ulam_constant(cycle.negated());
        case EquationFamily::Pqr:
        case EquationFamily::Pqr3: {
            const double kn = hyers_ulam_constant(cycle.negated());
            return hyers_ulam_constant(cycle) * kn * kn;
        }
        case EquationFamily::Pqr2:
        case EquationFamily::Pqr4: {
            const double kp = hyers_ulam_constant(cycle);
            return kp * kp * hyers_ulam_constant(cycle.negated());
        }
    }
    throw std::invalid_argument("unknown family");
}

enum class Verdict { Stable, NotStableUnitModulus, DegenerateZeroFactor };

enum class SideState { Ok, UnitModulus, ZeroFactor };

/// Analysis of one signed coefficient cycle (lambda or -lambda).
struct SideReport {
    double e = 0.0; // signed e(nh)
    SideState state = SideState::Ok;
    std::optional<ReciprocalSums> sums;
    std::optional<double> k0;
    bool minimal = false; // K0 is the minimum constant iff |e| > 1
};

struct StabilityReport {
    PeriodicCycle cycle;
    EquationFamily family = EquationFamily::Hill;
    SideReport positive; // lambda side, Dx - lambda x
    SideReport negative; // -lambda side, Dy + lambda y
    std::optional<double> composite;
    Verdict verdict = Verdict::Stable;
};

namespace detail {

inline SideReport analyze_side(const PeriodicCycle& cycle) {
    SideReport side;
    side.e = discrete_exponential(cycle, cycle.period());
    bool zero_factor = false;
    for (TimeIndex k = 0; k < cycle.period(); ++k) {
        if (std::abs(cycle.factor_at(k)) <= kZeroFactorTolerance) zero_factor = true;
    }
    if (zero_factor) {
        side.state = SideState::ZeroFactor;
        return side;
    }
    side.sums = reciprocal_sums(cycle);
    const double mag = std::abs(side.e);
    if (std::abs(mag - 1.0) <= kUnitModulusTolerance) {
        side.state = SideState::UnitModulus;
        return side;
    }
    side.k0 = cycle.h() * mag / std::abs(1.0 - mag) * side.sums->max();
    side.minimal = mag > 1.0;
    return side;
}

} // namespace detail

/// Full verdict for one cycle under one family. Sides the family does not
/// use are still reported but do not affect the verdict; this is what lets
/// a first-order analysis tolerate lambda_k = +1/h.
inline StabilityReport analyze_stability(const PeriodicCycle& cycle,
                                         EquationFamily family = EquationFamily::Hill) {
    StabilityReport report{cycle, family, detail::analyze_side(cycle),
                           detail::analyze_side(cycle.negated()), std::nullopt,
                           Verdict::Stable};

    const bool need_pos = family_needs_positive_side(family);
    const bool need_neg = family_needs_negative_side(family);
    const auto state_of = [](const SideReport& s) { return s.state; };
    if ((need_pos && state_of(report.positive) == SideState::ZeroFactor) ||
        (need_neg && state_of(report.negative) == SideState::ZeroFactor)) {
        report.verdict = Verdict::DegenerateZeroFactor;
        return report;
    }
    if ((need_pos && state_of(report.positive) == SideState::UnitModulus) ||
        (need_neg && state_of(report.negative) == SideState::UnitModulus)) {
        report.verdict = Verdict::NotStableUnitModulus;
        return report;
    }

    const double kp = report.positive.k0.value_or(1.0);
    const double kn = report.negative.k0.value_or(1.0);
    switch (family) {
        case EquationFamily::FirstHomogeneous: report.composite = kp; break;
        case EquationFamily::FirstNonhomogeneous: report.composite = kn; break;
        case EquationFamily::Hill:
        case EquationFamily::HillNonhomogeneous: report.composite = kp * kn; break;
        case EquationFamily::Pqr:
        case EquationFamily::Pqr3: report.composite = kp * kn * kn; break;
        case EquationFamily::Pqr2:
        case EquationFamily::Pqr4: report.composite = kp * kp * kn; break;
    }
    return report;
}

} // namespace hus
