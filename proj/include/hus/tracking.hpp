#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hus/dynamics.hpp"
#include "hus/grid.hpp"
#include "hus/stability.hpp"

namespace hus {

/// Exact solution found near an approximate one, with the achieved and
/// certified deviation bounds over the input window.
struct TrackingResult {
    Trajectory exact;
    double epsilon = 0.0;           // measured sup residual of the input
    double constant = 0.0;          // family stability constant K
    double certified_bound = 0.0;   // K * epsilon
    double sup_deviation = 0.0;
    double ratio = 0.0;             // sup_deviation / certified_bound, 0 if bound is 0
    double exact_residual_sup = 0.0;
    TimeIndex window = 0;           // steps in the input window
};

/// Result of the extremal residual-pattern search.
struct OracleEstimate {
    double best_ratio = 0.0;
    std::string best_pattern;       // '+'/'-' per residual slot
    TimeIndex horizon = 0;
    bool exhaustive = false;
    double constant = 0.0;
    double epsilon = 0.0;
};

namespace detail {

struct DeviationStage {
    std::vector<double> d; // deviation samples over the stage window
    double k0 = 0.0;       // constant of the effective cycle
};

/// Solves the driven deviation recursion d(k+1) = F(k) d(k) + h r(k), where
/// F(k) = 1 + h * eff(kh), over a window of `npoints` samples starting at
/// grid index `start`, with `res` holding r over the first npoints-1 slots.
///
/// The anchor realizes the variation-of-constants bound: when |e(nh)| < 1
/// every deviation mode decays, so d(start) = 0 keeps the partial sums below
/// K0 * eps; when |e(nh)| > 1 the window-end anchor d(end) = 0 equals the
/// backward tail sum, again below K0 * eps. Working on d directly avoids the
/// cancellation that subtracting two geometrically growing trajectories
/// would cause.
inline DeviationStage solve_deviation(const PeriodicCycle& eff, std::span<const double> res,
                                      TimeIndex start, std::size_t npoints) {
    if (npoints < 2 || res.size() != npoints - 1) {
        throw WindowError("deviation window/residual size mismatch");
    }
    const double h = eff.h();
    const ReciprocalSums sums = reciprocal_sums(eff); // throws DegenerateError on zero factor
    const double e_mag = std::abs(discrete_exponential(eff, eff.period()));
    if (std::abs(e_mag - 1.0) <= kUnitModulusTolerance) {
        throw NotStableError("|e(nh)| = 1: tracking constant undefined");
    }

    DeviationStage stage;
    stage.k0 = h * e_mag / std::abs(1.0 - e_mag) * sums.max();
    stage.d.assign(npoints, 0.0);

    double eps = 0.0;
    for (double r : res) eps = std::max(eps, std::abs(r));

    if (e_mag < 1.0) {
        for (std::size_t i = 0; i + 1 < npoints; ++i) {
            stage.d[i + 1] = eff.factor_at(start + static_cast<TimeIndex>(i)) * stage.d[i] +
                             h * res[i];
        }
    } else {
        // The end anchor stands in for the limit of psi/e; certify that the
        // truncated tail would not move it by more than 1e-3 of the bound.
        if (eps > 0.0) {
            double log_p = 0.0;
            for (std::size_t i = 0; i + 1 < npoints; ++i) {
                log_p += std::log(std::abs(eff.factor_at(start + static_cast<TimeIndex>(i))));
            }
            const TimeIndex end_index = start + static_cast<TimeIndex>(npoints) - 1;
            const double s_end =
                sums.values[static_cast<std::size_t>(end_index % eff.period())];
            const double log_tail =
                std::log(eps * h * s_end * e_mag / (e_mag - 1.0)) - log_p;
            if (log_tail >= std::log(1e-3 * stage.k0 * eps)) {
                throw InconclusiveError("window too short to pin the expanding-mode anchor");
            }
        }
        for (std::size_t i = npoints - 1; i-- > 0;) {
            stage.d[i] = (stage.d[i + 1] - h * res[i]) /
                         eff.factor_at(start + static_cast<TimeIndex>(i));
        }
    }
    return stage;
}

inline double sup_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline TrackingResult finish(const EquationSpec& spec, const Trajectory& input,
                             std::span<const double> deviation, double constant, double eps) {
    std::vector<double> x(input.samples().begin(), input.samples().end());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= deviation[i];
    TrackingResult out{Trajectory(input.h(), input.start(), std::move(x)),
                       eps,
                       constant,
                       constant * eps,
                       sup_abs(deviation),
                       0.0,
                       0.0,
                       input.steps()};
    if (out.certified_bound > 0.0) out.ratio = out.sup_deviation / out.certified_bound;
    out.exact_residual_sup = residual(spec, out.exact).sup_abs();
    return out;
}

} // namespace detail

/// Tracks an approximate first-order solution. sign '-' targets
/// Dx - lambda x = f, sign '+' targets Dy + lambda y = f; the deviation obeys
/// the homogeneous equation with cycle lambda resp. -lambda.
inline TrackingResult track_first_order(const PeriodicCycle& cycle, char sign,
                                        const std::optional<Trajectory>& forcing,
                                        const Trajectory& psi) {
    if (psi.size() < 2) throw WindowError("first-order tracking needs >= 2 samples");
    const auto family = (sign == '+') ? EquationFamily::FirstNonhomogeneous
                                      : EquationFamily::FirstHomogeneous;
    const EquationSpec spec = EquationSpec::make(family, cycle, forcing);
    const Trajectory res = residual(spec, psi);
    const double eps = res.sup_abs();
    const PeriodicCycle eff = (sign == '+') ? cycle.negated() : cycle;
    const auto stage = detail::solve_deviation(eff, res.samples(), psi.start(),
                                               static_cast<std::size_t>(psi.size()));
    return detail::finish(spec, psi, stage.d, stage.k0, eps);
}

/// Tracks an approximate Hill solution via the order-reducing substitution
/// psi = D xi + lambda xi (one grid step back): the first stage tracks psi
/// against the homogeneous first-order equation, the second tracks xi
/// against the forced first-order equation whose right side is the stage-one
/// solution. Both stages run on deviations only; the final deviation applied
/// to xi is an exact Hill solution.
inline TrackingResult track_hill(const PeriodicCycle& cycle,
                                 const std::optional<Trajectory>& forcing,
                                 const Trajectory& xi) {
    if (xi.size() < 3) throw WindowError("Hill tracking needs >= 3 samples");
    const auto family = forcing ? EquationFamily::HillNonhomogeneous : EquationFamily::Hill;
    const EquationSpec spec = EquationSpec::make(family, cycle, forcing);
    const Trajectory res = residual(spec, xi);
    const double eps = res.sup_abs();
    const auto n = static_cast<std::size_t>(xi.size());

    const auto stage1 = detail::solve_deviation(cycle, res.samples(), xi.start() + 1, n - 1);
    // stage-two residual: xi against D eta + lambda eta = x(t+h) is exactly
    // the stage-one deviation shifted by one step.
    const auto stage2 = detail::solve_deviation(cycle.negated(), stage1.d, xi.start(), n);
    return detail::finish(spec, xi, stage2.d, stage1.k0 * stage2.k0, eps);
}

/// Tracks an approximate third-order solution through the family's cascade:
/// Pqr/Pqr2 reduce by one order (psi = D xi +/- lambda xi, two steps back)
/// and track through the Hill pair, then close with a first-order stage;
/// Pqr3/Pqr4 reduce by two orders at once (second-order psi) and close with
/// a forced Hill pair.
inline TrackingResult track_third(const PeriodicCycle& cycle, EquationFamily family,
                                  const Trajectory& xi) {
    if (equation_order(family) != 3) throw std::invalid_argument("not a third-order family");
    if (xi.size() < 4) throw WindowError("third-order tracking needs >= 4 samples");
    const EquationSpec spec = EquationSpec::make(family, cycle);
    const Trajectory res = residual(spec, xi);
    const double eps = res.sup_abs();
    const auto n = static_cast<std::size_t>(xi.size());
    const TimeIndex s = xi.start();
    const PeriodicCycle neg = cycle.negated();

    if (family == EquationFamily::Pqr || family == EquationFamily::Pqr2) {
        // Hill tracking of psi on [s+2, s+steps+1], then the closing stage.
        const auto h1 = detail::solve_deviation(cycle, res.samples(), s + 3, n - 2);
        const auto h2 = detail::solve_deviation(neg, h1.d, s + 2, n - 1);
        const PeriodicCycle& closing = (family == EquationFamily::Pqr) ? neg : cycle;
        const auto f1 = detail::solve_deviation(closing, h2.d, s, n);
        return detail::finish(spec, xi, f1.d, h1.k0 * h2.k0 * f1.k0, eps);
    }

    // Pqr3/Pqr4: first-order tracking of the second-order psi, then the
    // forced Hill pair on the full window.
    const PeriodicCycle& opening = (family == EquationFamily::Pqr3) ? neg : cycle;
    const auto f1 = detail::solve_deviation(opening, res.samples(), s + 2, n - 2);
    const auto h1 = detail::solve_deviation(cycle, f1.d, s + 1, n - 1);
    const auto h2 = detail::solve_deviation(neg, h1.d, s, n);
    return detail::finish(spec, xi, h2.d, f1.k0 * h1.k0 * h2.k0, eps);
}

/// Dispatch on the spec's family.
inline TrackingResult track(const EquationSpec& spec, const Trajectory& input) {
    switch (equation_order(spec.family)) {
        case 1:
            return track_first_order(spec.cycle, spec.first_order_sign() > 0 ? '+' : '-',
                                     spec.forcing, input);
        case 2:
            return track_hill(spec.cycle, spec.forcing, input);
        default:
            return track_third(spec.cycle, spec.family, input);
    }
}

/// Evaluates both sides of the family's order-reduction identity on an
/// arbitrary trajectory and returns the largest pointwise discrepancy. The
/// identity is algebraic, so the result should sit at rounding level for any
/// input whatsoever.
inline double cascade_residual_identity_check(const PeriodicCycle& cycle, EquationFamily family,
                                              const Trajectory& xi) {
    const double h = cycle.h();
    const TimeIndex s = xi.start();
    const TimeIndex m = xi.end();
    const PeriodicCycle a = hill_coefficient_cycle(cycle);
    const auto lam = [&](TimeIndex k) { return cycle.value_at(k); };

    double worst = 0.0;
    const auto record = [&](double lhs, double rhs) {
        worst = std::max(worst, std::abs(lhs - rhs));
    };

    switch (family) {
        case EquationFamily::Hill:
        case EquationFamily::HillNonhomogeneous: {
            if (xi.size() < 3) throw WindowError("identity check needs >= 3 samples");
            std::vector<double> p;
            for (TimeIndex k = s + 1; k <= m; ++k) {
                p.push_back(delta_h(xi, k - 1) + lam(k - 1) * xi[k - 1]);
            }
            const Trajectory psi(h, s + 1, std::move(p));
            for (TimeIndex j = s + 1; j + 1 <= m; ++j) {
                record(delta_h(psi, j) - lam(j) * psi[j],
                       delta2_h(xi, j - 1) + a.value_at(j - 1) * xi[j - 1]);
            }
            break;
        }
        case EquationFamily::Pqr:
        case EquationFamily::Pqr2: {
            if (xi.size() < 5) throw WindowError("identity check needs >= 5 samples");
            const double sign = (family == EquationFamily::Pqr) ? 1.0 : -1.0;
            const ThirdOrderCoefficients c = third_order_coefficients(cycle, family);
            std::vector<double> p;
            for (TimeIndex k = s + 2; k <= m + 1; ++k) {
                p.push_back(delta_h(xi, k - 2) + sign * lam(k - 2) * xi[k - 2]);
            }
            const Trajectory psi(h, s + 2, std::move(p));
            for (TimeIndex j = s + 2; j + 2 <= m + 1; ++j) {
                const TimeIndex t = j - 2;
                record(delta2_h(psi, j) + a.value_at(j) * psi[j],
                       delta3_h(xi, t) + c.p.value_at(t) * delta2_h(xi, t) +
                           c.q.value_at(t) * delta_h(xi, t) + c.r.value_at(t) * xi[t]);
            }
            break;
        }
        case EquationFamily::Pqr3:
        case EquationFamily::Pqr4: {
            if (xi.size() < 5) throw WindowError("identity check needs >= 5 samples");
            const double sign = (family == EquationFamily::Pqr3) ? 1.0 : -1.0;
            const ThirdOrderCoefficients c = third_order_coefficients(cycle, family);
            std::vector<double> p;
            for (TimeIndex k = s + 2; k <= m; ++k) {
                p.push_back(delta2_h(xi, k - 2) + a.value_at(k - 2) * xi[k - 2]);
            }
            const Trajectory psi(h, s + 2, std::move(p));
            for (TimeIndex j = s + 2; j + 1 <= m; ++j) {
                const TimeIndex t = j - 2;
                record(delta_h(psi, j) + sign * lam(j) * psi[j],
                       delta3_h(xi, t) + c.p.value_at(t) * delta2_h(xi, t) +
                           c.q.value_at(t) * delta_h(xi, t) + c.r.value_at(t) * xi[t]);
            }
            break;
        }
        default:
            throw std::invalid_argument("identity check covers Hill and third-order families");
    }
    return worst;
}

namespace detail {

/// min over theta of sup_k |target_k - sum_i theta_i basis_i(k)|.
/// The objective is a supremum of absolute affine functions, hence convex;
/// one-dimensional slices are minimized exactly by ternary search.
inline double min_sup_deviation(std::span<const double> target,
                                const std::vector<std::vector<double>>& basis) {
    const std::size_t npoints = target.size();
    const std::size_t dim = basis.size();
    std::vector<double> theta(dim, 0.0);

    const auto objective_shift = [&](const std::vector<double>& residual_now, std::size_t coord,
                                     double step) {
        double worst = 0.0;
        for (std::size_t k = 0; k < npoints; ++k) {
            worst = std::max(worst, std::abs(residual_now[k] - step * basis[coord][k]));
        }
        return worst;
    };

    std::vector<double> resid(target.begin(), target.end());
    const auto refresh = [&]() {
        for (std::size_t k = 0; k < npoints; ++k) {
            double v = target[k];
            for (std::size_t i = 0; i < dim; ++i) v -= theta[i] * basis[i][k];
            resid[k] = v;
        }
    };

    // Least-squares warm start (normal equations, dim <= 3).
    if (dim > 1) {
        double g[3][3] = {};
        double b[3] = {};
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                for (std::size_t k = 0; k < npoints; ++k) g[i][j] += basis[i][k] * basis[j][k];
            }
            for (std::size_t k = 0; k < npoints; ++k) b[i] += basis[i][k] * target[k];
        }
        // Gaussian elimination with partial pivoting on the tiny system.
        std::size_t idx[3] = {0, 1, 2};
        bool singular = false;
        for (std::size_t col = 0; col < dim && !singular; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < dim; ++r) {
                if (std::abs(g[idx[r]][col]) > std::abs(g[idx[piv]][col])) piv = r;
            }
            std::swap(idx[col], idx[piv]);
            if (std::abs(g[idx[col]][col]) < 1e-300) { singular = true; break; }
            for (std::size_t r = col + 1; r < dim; ++r) {
                const double f = g[idx[r]][col] / g[idx[col]][col];
                for (std::size_t cc = col; cc < dim; ++cc) g[idx[r]][cc] -= f * g[idx[col]][cc];
                b[idx[r]] -= f * b[idx[col]];
            }
        }
        if (!singular) {
            for (std::size_t col = dim; col-- > 0;) {
                double v = b[idx[col]];
                for (std::size_t cc = col + 1; cc < dim; ++cc) v -= g[idx[col]][cc] * theta[cc];
                theta[col] = v / g[idx[col]][col];
            }
        }
        refresh();
    }

    const int sweeps = (dim == 1) ? 1 : 60;
    double best = objective_shift(resid, 0, 0.0);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (std::size_t i = 0; i < dim; ++i) {
            double lo = 0.0, hi = 0.0;
            bool any = false;
            for (std::size_t k = 0; k < npoints; ++k) {
                if (std::abs(basis[i][k]) < 1e-300) continue;
                const double q = resid[k] / basis[i][k];
                if (!any) { lo = hi = q; any = true; }
                lo = std::min(lo, q);
                hi = std::max(hi, q);
            }
            if (!any) continue;
            const double tol = std::max(1e-14, 1e-12 * (hi - lo));
            while (hi - lo > tol) {
                const double m1 = lo + (hi - lo) / 3.0;
                const double m2 = hi - (hi - lo) / 3.0;
                if (objective_shift(resid, i, m1) <= objective_shift(resid, i, m2)) hi = m2;
                else lo = m1;
            }
            const double step = 0.5 * (lo + hi);
            theta[i] += step;
            for (std::size_t k = 0; k < npoints; ++k) resid[k] -= step * basis[i][k];
        }
        const double now = objective_shift(resid, 0, 0.0);
        if (sweep > 0 && now >= best * (1.0 - 1e-13)) { best = std::min(best, now); break; }
        best = std::min(best, now);
    }
    return best;
}

} // namespace detail

/// Searches residual sign patterns {-eps, +eps}^horizon for the one whose
/// best exact tracker still sits farthest from it, relative to the certified
/// bound K*eps. Exhaustive when 2^horizon fits the budget; otherwise a
/// seeded random sample topped up with the aligned and alternating patterns,
/// which are the structural worst-case candidates.
inline OracleEstimate extremal_ratio_oracle(const PeriodicCycle& cycle, EquationFamily family,
                                            TimeIndex horizon, std::uint64_t budget,
                                            double epsilon = 1e-3, std::uint64_t seed = 0) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("oracle needs epsilon > 0");
    if (horizon < 1) throw std::invalid_argument("oracle needs horizon >= 1");
    const int ord = equation_order(family);
    const EquationSpec spec = EquationSpec::make(family, cycle);
    const double constant = composite_constant(cycle, family);
    const TimeIndex steps = horizon + ord - 1;

    std::vector<std::vector<double>> basis;
    for (int i = 0; i < ord; ++i) {
        std::vector<double> init(static_cast<std::size_t>(ord), 0.0);
        init[static_cast<std::size_t>(i)] = 1.0;
        const Trajectory b = simulate(spec, init, steps);
        basis.emplace_back(b.samples().begin(), b.samples().end());
    }

    OracleEstimate out;
    out.horizon = horizon;
    out.constant = constant;
    out.epsilon = epsilon;
    out.exhaustive = horizon < 63 && (std::uint64_t{1} << horizon) <= budget;

    const std::vector<double> zeros(static_cast<std::size_t>(ord), 0.0);
    std::vector<double> res(static_cast<std::size_t>(horizon));
    const auto evaluate = [&](std::uint64_t bits) {
        for (std::size_t i = 0; i < res.size(); ++i) {
            res[i] = (bits >> i & 1u) ? epsilon : -epsilon;
        }
        const Trajectory psi = detail::integrate(spec, zeros, 0, steps, res);
        const double m = detail::min_sup_deviation(psi.samples(), basis);
        const double ratio = m / (constant * epsilon);
        if (ratio > out.best_ratio) {
            out.best_ratio = ratio;
            out.best_pattern.clear();
            for (std::size_t i = 0; i < res.size(); ++i) {
                out.best_pattern.push_back(res[i] > 0 ? '+' : '-');
            }
        }
    };

    if (out.exhaustive) {
        const std::uint64_t total = std::uint64_t{1} << horizon;
        for (std::uint64_t bits = 0; bits < total; ++bits) evaluate(bits);
    } else {
        const std::uint64_t all = (horizon >= 64) ? ~std::uint64_t{0}
                                                  : (std::uint64_t{1} << horizon) - 1;
        std::uint64_t alternating = 0;
        for (TimeIndex i = 0; i < horizon; i += 2) alternating |= std::uint64_t{1} << i;
        evaluate(all);
        evaluate(0);
        evaluate(alternating);
        evaluate(all & ~alternating);
        std::uint64_t state = seed + 0x9e3779b97f4a7c15ULL;
        for (std::uint64_t n = 0; n < budget; ++n) {
            std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            evaluate((z ^ (z >> 31)) & all);
        }
    }
    return out;
}

} // namespace hus
