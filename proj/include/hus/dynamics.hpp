#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hus/grid.hpp"
#include "hus/stability.hpp"

namespace hus {

/// Simulation aborts once a sample magnitude passes this; expanding cycles
/// grow geometrically and would otherwise run into infinities.
inline constexpr double kOverflowGuard = 1e300;

/// Recipe for a bounded residual sequence |r(k)| <= epsilon injected into a
/// recursion. Realizations are deterministic: the random pattern hands the
/// seed to a fixed 64-bit generator and maps bits to [-eps, eps] directly,
/// so results do not depend on the standard library's distribution.
struct ResidualProfile {
    enum class Kind { ConstantPlus, ConstantMinus, Alternating, RandomUniform, Explicit };

    Kind kind = Kind::RandomUniform;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> values; // Explicit only

    static ResidualProfile constant_plus(double eps) { return {Kind::ConstantPlus, eps, 0, {}}; }
    static ResidualProfile constant_minus(double eps) { return {Kind::ConstantMinus, eps, 0, {}}; }
    static ResidualProfile alternating(double eps) { return {Kind::Alternating, eps, 0, {}}; }
    static ResidualProfile random_uniform(double eps, std::uint64_t seed) {
        return {Kind::RandomUniform, eps, seed, {}};
    }
    static ResidualProfile explicit_values(double eps, std::vector<double> vals) {
        ResidualProfile p{Kind::Explicit, eps, 0, std::move(vals)};
        for (double v : p.values) {
            if (!(std::abs(v) <= eps)) {
                throw std::invalid_argument("explicit residual exceeds epsilon");
            }
        }
        return p;
    }

    /// Residual values for grid indices start, start+1, ..., start+count-1.
    /// The alternating pattern keys off the absolute index parity.
    std::vector<double> realize(TimeIndex start, std::size_t count) const {
        if (epsilon < 0.0 || !std::isfinite(epsilon)) {
            throw std::invalid_argument("epsilon must be finite and >= 0");
        }
        std::vector<double> r(count);
        switch (kind) {
            case Kind::ConstantPlus:
                for (auto& v : r) v = epsilon;
                break;
            case Kind::ConstantMinus:
                for (auto& v : r) v = -epsilon;
                break;
            case Kind::Alternating:
                for (std::size_t i = 0; i < count; ++i) {
                    r[i] = ((start + static_cast<TimeIndex>(i)) % 2 == 0) ? epsilon : -epsilon;
                }
                break;
            case Kind::RandomUniform: {
                std::uint64_t state = seed + 0x9e3779b97f4a7c15ULL;
                auto next = [&state]() {
                    // splitmix64
                    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
                    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
                    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
                    return z ^ (z >> 31);
                };
                for (auto& v : r) {
                    const double u = static_cast<double>(next() >> 11) * 0x1.0p-53; // [0,1)
                    v = epsilon * (2.0 * u - 1.0);
                }
                break;
            }
            case Kind::Explicit:
                if (values.size() < count) {
                    throw std::invalid_argument("explicit residual list shorter than window");
                }
                for (std::size_t i = 0; i < count; ++i) r[i] = values[i];
                break;
        }
        return r;
    }
};

/// One concrete equation: family, base cycle, the derived coefficient
/// cycles, and an optional forcing term for the forced families.
struct EquationSpec {
    EquationFamily family = EquationFamily::Hill;
    PeriodicCycle cycle;
    std::optional<PeriodicCycle> hill_coeff;        // order 2
    std::optional<ThirdOrderCoefficients> third;    // order 3
    std::optional<Trajectory> forcing;

    int order() const { return equation_order(family); }

    /// +1 for Dy + lambda y = f, -1 for Dx - lambda x = f (first order only).
    int first_order_sign() const {
        return family == EquationFamily::FirstNonhomogeneous ? +1 : -1;
    }

    static EquationSpec make(EquationFamily family, PeriodicCycle cycle,
                             std::optional<Trajectory> forcing = std::nullopt) {
        EquationSpec spec{family, std::move(cycle), std::nullopt, std::nullopt,
                          std::move(forcing)};
        const int ord = spec.order();
        if (ord == 2) spec.hill_coeff = hill_coefficient_cycle(spec.cycle);
        if (ord == 3) {
            spec.third = third_order_coefficients(spec.cycle, family);
            if (spec.forcing) {
                throw std::invalid_argument("third-order families are homogeneous");
            }
        }
        return spec;
    }
};

namespace detail {

inline void check_overflow(double v) {
    if (!(std::abs(v) < kOverflowGuard)) {
        throw SimulationOverflowError("trajectory sample exceeded 1e300");
    }
}

inline double forcing_value(const std::optional<Trajectory>& forcing, TimeIndex k) {
    return forcing ? (*forcing)[k] : 0.0;
}

/// Integrates the family recursion from `initial` at index `start`, adding
/// extra[i] to the forcing at residual slot i. Window has steps+1 samples.
inline Trajectory integrate(const EquationSpec& spec, std::span<const double> initial,
                            TimeIndex start, TimeIndex steps, std::span<const double> extra) {
    const double h = spec.cycle.h();
    const int ord = spec.order();
    if (static_cast<int>(initial.size()) != ord) {
        throw std::invalid_argument("need one initial value per equation order");
    }
    if (steps < ord) throw std::invalid_argument("window shorter than equation order");

    std::vector<double> y(static_cast<std::size_t>(steps + 1));
    for (int i = 0; i < ord; ++i) y[static_cast<std::size_t>(i)] = initial[static_cast<std::size_t>(i)];

    const auto extra_at = [&](TimeIndex i) {
        return (i < static_cast<TimeIndex>(extra.size())) ? extra[static_cast<std::size_t>(i)] : 0.0;
    };

    switch (ord) {
        case 1: {
            const int sign = spec.first_order_sign();
            for (TimeIndex k = 0; k < steps; ++k) {
                const double lam = spec.cycle.value_at(start + k);
                const double f = forcing_value(spec.forcing, start + k) + extra_at(k);
                const double factor = (sign < 0) ? 1.0 + h * lam : 1.0 - h * lam;
                const auto i = static_cast<std::size_t>(k);
                y[i + 1] = factor * y[i] + h * f;
                check_overflow(y[i + 1]);
            }
            break;
        }
        case 2: {
            const PeriodicCycle& a = *spec.hill_coeff;
            for (TimeIndex k = 0; k + 2 <= steps; ++k) {
                const double f = forcing_value(spec.forcing, start + k) + extra_at(k);
                const auto i = static_cast<std::size_t>(k);
                y[i + 2] = 2.0 * y[i + 1] - y[i] + h * h * (f - a.value_at(start + k) * y[i]);
                check_overflow(y[i + 2]);
            }
            break;
        }
        case 3: {
            const ThirdOrderCoefficients& c = *spec.third;
            const double h2 = h * h, h3 = h * h * h;
            for (TimeIndex k = 0; k + 3 <= steps; ++k) {
                const auto i = static_cast<std::size_t>(k);
                const double d1 = (y[i + 1] - y[i]) / h;
                const double d2 = (y[i + 2] - 2.0 * y[i + 1] + y[i]) / h2;
                const double f = extra_at(k);
                const double d3 = f - c.p.value_at(start + k) * d2 -
                                  c.q.value_at(start + k) * d1 - c.r.value_at(start + k) * y[i];
                y[i + 3] = h3 * d3 + 3.0 * y[i + 2] - 3.0 * y[i + 1] + y[i];
                check_overflow(y[i + 3]);
            }
            break;
        }
    }
    return Trajectory(h, start, std::move(y));
}

} // namespace detail

/// Exact forward simulation of the family recursion over {start .. start+steps}.
inline Trajectory simulate(const EquationSpec& spec, std::span<const double> initial,
                           TimeIndex steps, TimeIndex start = 0) {
    return detail::integrate(spec, initial, start, steps, {});
}

/// First-order step map. sign '-' solves Dx - lambda x = f via
/// x(t+h) = (1 + h lambda) x + h f; sign '+' solves Dy + lambda y = f via
/// y(t+h) = (1 - h lambda) y + h f.
inline Trajectory simulate_first_order(const PeriodicCycle& cycle, char sign,
                                       const std::optional<Trajectory>& forcing, double y0,
                                       TimeIndex steps) {
    const auto family = (sign == '+') ? EquationFamily::FirstNonhomogeneous
                                      : EquationFamily::FirstHomogeneous;
    const double init[1] = {y0};
    return simulate(EquationSpec::make(family, cycle, forcing), init, steps);
}

inline Trajectory simulate_hill(const PeriodicCycle& cycle,
                                const std::optional<Trajectory>& forcing, double y0, double y1,
                                TimeIndex steps) {
    const auto family = forcing ? EquationFamily::HillNonhomogeneous : EquationFamily::Hill;
    const double init[2] = {y0, y1};
    return simulate(EquationSpec::make(family, cycle, forcing), init, steps);
}

inline Trajectory simulate_third(const PeriodicCycle& cycle, EquationFamily family, double y0,
                                 double y1, double y2, TimeIndex steps) {
    const double init[3] = {y0, y1, y2};
    return simulate(EquationSpec::make(family, cycle), init, steps);
}

/// Pointwise residual of `tr` under the spec's equation: the order-th
/// difference expression minus the forcing. The result window loses `order`
/// samples at the right edge.
inline Trajectory residual(const EquationSpec& spec, const Trajectory& tr) {
    const int ord = spec.order();
    if (tr.size() <= ord) throw WindowError("trajectory too short for residual");
    const TimeIndex count = tr.size() - ord;
    std::vector<double> r(static_cast<std::size_t>(count));
    for (TimeIndex k = tr.start(); k < tr.start() + count; ++k) {
        double lhs = 0.0;
        switch (ord) {
            case 1: {
                const double lam = spec.cycle.value_at(k);
                lhs = delta_h(tr, k) + spec.first_order_sign() * lam * tr[k];
                break;
            }
            case 2:
                lhs = delta2_h(tr, k) + spec.hill_coeff->value_at(k) * tr[k];
                break;
            case 3:
                lhs = delta3_h(tr, k) + spec.third->p.value_at(k) * delta2_h(tr, k) +
                      spec.third->q.value_at(k) * delta_h(tr, k) +
                      spec.third->r.value_at(k) * tr[k];
                break;
        }
        r[static_cast<std::size_t>(k - tr.start())] = lhs - detail::forcing_value(spec.forcing, k);
    }
    return Trajectory(tr.h(), tr.start(), std::move(r));
}

/// Scale used by relative residual tolerances: max(1, sup |tr|).
inline double trajectory_scale(const Trajectory& tr) { return std::max(1.0, tr.sup_abs()); }

/// Integrates the recursion with the profile's realization injected as extra
/// forcing, so the returned trajectory's residual equals that realization.
inline Trajectory perturb(const EquationSpec& spec, const ResidualProfile& profile,
                          std::span<const double> initial, TimeIndex steps,
                          TimeIndex start = 0) {
    const int ord = spec.order();
    if (steps < ord) throw std::invalid_argument("window shorter than equation order");
    const auto count = static_cast<std::size_t>(steps - ord + 1);
    const std::vector<double> r = profile.realize(start, count);
    return detail::integrate(spec, initial, start, steps, r);
}

} // namespace hus
