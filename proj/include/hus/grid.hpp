#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hus/errors.hpp"

namespace hus {

/// Grid index k; the physical time is t = k*h. Kept integral so that
/// phase arithmetic (k mod n) is exact, unlike accumulating t in doubles.
using TimeIndex = std::int64_t;

/// Validated positive step size of the uniform grid {0, h, 2h, ...}.
class StepSize {
public:
    explicit StepSize(double value) : value_(value) {
        if (!std::isfinite(value) || value <= 0.0) {
            throw std::invalid_argument("step size must be finite and > 0");
        }
    }

    double value() const noexcept { return value_; }
    operator double() const noexcept { return value_; }

private:
    double value_;
};

/// Real n-cycle coefficient on the grid: value_at(k) = values[k mod n].
///
/// The main constructor rejects representations whose true period is a
/// proper divisor of n; with_period_as_given() skips that check so that a
/// cycle can be deliberately stored with a repeated value list.
class PeriodicCycle {
public:
    PeriodicCycle(double h, std::vector<double> values)
        : PeriodicCycle(StepSize(h), std::move(values), true) {}

    PeriodicCycle(StepSize h, std::vector<double> values)
        : PeriodicCycle(h, std::move(values), true) {}

    static PeriodicCycle with_period_as_given(double h, std::vector<double> values) {
        return PeriodicCycle(StepSize(h), std::move(values), false);
    }

    double h() const noexcept { return h_.value(); }
    TimeIndex period() const noexcept { return static_cast<TimeIndex>(values_.size()); }
    double omega() const noexcept { return static_cast<double>(period()) * h(); }
    std::span<const double> values() const noexcept { return values_; }

    double value_at(TimeIndex k) const noexcept {
        const TimeIndex n = period();
        TimeIndex m = k % n;
        if (m < 0) m += n;
        return values_[static_cast<std::size_t>(m)];
    }

    /// Recursion factor 1 + h*lambda(kh).
    double factor_at(TimeIndex k) const noexcept { return 1.0 + h() * value_at(k); }

    PeriodicCycle negated() const {
        std::vector<double> neg(values_.size());
        for (std::size_t i = 0; i < values_.size(); ++i) neg[i] = -values_[i];
        return PeriodicCycle(h_, std::move(neg), false);
    }

    /// Smallest divisor d of n such that the value list repeats with period d.
    TimeIndex minimal_period() const noexcept {
        const TimeIndex n = period();
        for (TimeIndex d = 1; d < n; ++d) {
            if (n % d != 0) continue;
            bool repeats = true;
            for (TimeIndex i = d; i < n && repeats; ++i) {
                repeats = values_[static_cast<std::size_t>(i)] ==
                          values_[static_cast<std::size_t>(i - d)];
            }
            if (repeats) return d;
        }
        return n;
    }

private:
    PeriodicCycle(StepSize h, std::vector<double> values, bool enforce_minimal)
        : h_(h), values_(std::move(values)) {
        if (values_.empty()) throw std::invalid_argument("cycle needs at least one value");
        for (double v : values_) {
            if (!std::isfinite(v)) throw std::invalid_argument("cycle values must be finite");
        }
        if (enforce_minimal && minimal_period() != period()) {
            throw std::invalid_argument("cycle period is not minimal");
        }
    }

    StepSize h_;
    std::vector<double> values_;
};

/// Finite window of a real-valued grid sequence. Samples are addressed by
/// absolute grid index, so shifted windows (start > 0) keep their phase
/// relative to any n-cycle coefficient.
class Trajectory {
public:
    Trajectory(double h, TimeIndex start, std::vector<double> samples)
        : h_(h), start_(start), samples_(std::move(samples)) {
        if (start_ < 0) throw std::invalid_argument("trajectory start must be >= 0");
        if (samples_.empty()) throw std::invalid_argument("trajectory must be non-empty");
        for (double v : samples_) {
            if (!std::isfinite(v)) throw std::invalid_argument("trajectory samples must be finite");
        }
    }

    double h() const noexcept { return h_.value(); }
    TimeIndex start() const noexcept { return start_; }
    TimeIndex end() const noexcept { return start_ + size() - 1; }
    TimeIndex size() const noexcept { return static_cast<TimeIndex>(samples_.size()); }
    /// Window length in steps (number of samples minus one).
    TimeIndex steps() const noexcept { return size() - 1; }

    bool contains(TimeIndex k) const noexcept { return k >= start_ && k <= end(); }

    double operator[](TimeIndex k) const {
        if (!contains(k)) {
            throw WindowError("index " + std::to_string(k) + " outside window [" +
                              std::to_string(start_) + ", " + std::to_string(end()) + "]");
        }
        return samples_[static_cast<std::size_t>(k - start_)];
    }

    std::span<const double> samples() const noexcept { return samples_; }

    double sup_abs() const noexcept {
        double m = 0.0;
        for (double v : samples_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    StepSize h_;
    TimeIndex start_;
    std::vector<double> samples_;
};

inline double coefficient_at(const PeriodicCycle& cycle, TimeIndex k) {
    if (k < 0) throw std::invalid_argument("time index must be >= 0");
    return cycle.value_at(k);
}

/// Forward difference (tr[k+1] - tr[k]) / h. Needs k and k+1 in the window.
inline double delta_h(const Trajectory& tr, TimeIndex k) {
    return (tr[k + 1] - tr[k]) / tr.h();
}

inline double delta2_h(const Trajectory& tr, TimeIndex k) {
    return (delta_h(tr, k + 1) - delta_h(tr, k)) / tr.h();
}

inline double delta3_h(const Trajectory& tr, TimeIndex k) {
    return (delta2_h(tr, k + 1) - delta2_h(tr, k)) / tr.h();
}

/// Discrete exponential: the running product of factors 1 + h*lambda(jh)
/// for j < k, with the empty product equal to 1. Factors may be negative or
/// zero; callers that cannot tolerate zeros check separately.
inline double discrete_exponential(const PeriodicCycle& cycle, TimeIndex k) {
    if (k < 0) throw std::invalid_argument("time index must be >= 0");
    double product = 1.0;
    for (TimeIndex j = 0; j < k; ++j) product *= cycle.factor_at(j);
    return product;
}

inline PeriodicCycle negate_cycle(const PeriodicCycle& cycle) { return cycle.negated(); }

} // namespace hus
