#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "hus/stability.hpp"
#include "oracles.hpp"

using namespace hus;

namespace {

PeriodicCycle three_cycle(double h, double A) { return PeriodicCycle(h, {0.0, A, -A}); }

} // namespace

TEST_CASE("phase sums of the 3-cycle {0, A, -A}", "[stability]") {
    const double h = 1.0, A = 0.6;
    const double up = std::abs(1.0 + A * h), dn = std::abs(1.0 - A * h);

    const ReciprocalSums pos = reciprocal_sums(three_cycle(h, A));
    REQUIRE(pos.values.size() == 3);
    CHECK(pos.values[0] == Approx(1.0 + 1.0 / up + 1.0 / (up * dn)).epsilon(1e-14));
    CHECK(pos.values[1] == Approx(1.0 / up + 2.0 / (up * dn)).epsilon(1e-14));
    CHECK(pos.values[2] == Approx(2.0 / dn + 1.0 / (up * dn)).epsilon(1e-14));

    const ReciprocalSums neg = reciprocal_sums(three_cycle(h, A).negated());
    CHECK(neg.values[0] == Approx(1.0 + 1.0 / dn + 1.0 / (dn * up)).epsilon(1e-14));
    CHECK(neg.values[1] == Approx(1.0 / dn + 2.0 / (dn * up)).epsilon(1e-14));
    CHECK(neg.values[2] == Approx(2.0 / up + 1.0 / (dn * up)).epsilon(1e-14));
}

TEST_CASE("phase sums of the 2-cycle {A, B} and a constant cycle", "[stability]") {
    const double h = 0.25, A = 0.8, B = 2.5;
    const double fa = std::abs(1.0 + A * h), fb = std::abs(1.0 + B * h);
    const ReciprocalSums s = reciprocal_sums(PeriodicCycle(h, {A, B}));
    REQUIRE(s.values.size() == 2);
    CHECK(s.values[0] == Approx(1.0 / fa + 1.0 / (fa * fb)).epsilon(1e-14));
    CHECK(s.values[1] == Approx(1.0 / fb + 1.0 / (fa * fb)).epsilon(1e-14));

    const ReciprocalSums one = reciprocal_sums(PeriodicCycle(2.0, {0.7}));
    REQUIRE(one.values.size() == 1);
    CHECK(one.values[0] == Approx(1.0 / std::abs(1.0 + 2.0 * 0.7)).epsilon(1e-15));
}

TEST_CASE("phase sums match the brute-force evaluation", "[stability][property]") {
    test_oracle::Rng rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + trial % 5;
        const double h = 0.1 + (rng.uniform() + 1.0);
        std::vector<double> vals;
        for (std::size_t i = 0; i < n; ++i) vals.push_back(2.0 * rng.uniform());
        bool degenerate = false;
        for (double v : vals) degenerate |= std::abs(1.0 + h * v) <= 1e-6;
        if (degenerate) continue;
        const PeriodicCycle c = PeriodicCycle::with_period_as_given(h, vals);
        const ReciprocalSums sums = reciprocal_sums(c);
        REQUIRE(sums.values.size() == n);
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(sums.values[k] ==
                  Approx(test_oracle::brute_s_sum(h, vals, k)).epsilon(1e-12));
            CHECK(sums.values[k] > 0.0);
        }
        CHECK(sums.argmax_index == test_oracle::brute_argmax(h, vals));
    }
}

TEST_CASE("first-order constant for a constant cycle is 1/lambda", "[stability]") {
    const double h = 0.4, lambda = 1.3; // lambda in (0, 1/h) = (0, 2.5)
    CHECK(hyers_ulam_constant(PeriodicCycle(h, {lambda})) == Approx(1.0 / lambda).epsilon(1e-14));
    CHECK(hyers_ulam_constant(PeriodicCycle(h, {-lambda})) == Approx(1.0 / lambda).epsilon(1e-14));
}

TEST_CASE("first-order constant of the pi two-cycle", "[stability]") {
    for (double h : {0.05, 0.1, 0.3, 0.7, 1.5}) {
        const PeriodicCycle c(h, {M_PI, 2.0 * M_PI});
        const double expect = 2.0 * (1.0 + h * M_PI) / (M_PI * (3.0 + 2.0 * h * M_PI));
        CHECK(hyers_ulam_constant(c) == Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("first-order constant of {0, 1/2, -1/2} at h = 1", "[stability]") {
    const PeriodicCycle c = three_cycle(1.0, 0.5);
    // frozen from the direct sum evaluation: e = 3/4, max sum = S_2 = 16/3
    const ReciprocalSums sums = reciprocal_sums(c);
    CHECK(sums.argmax_index == 2);
    CHECK(sums.max() == Approx(16.0 / 3.0).epsilon(1e-14));
    CHECK(discrete_exponential(c, 3) == Approx(0.75).epsilon(1e-15));
    CHECK(hyers_ulam_constant(c) == Approx(16.0).epsilon(1e-13));
    CHECK(hyers_ulam_constant(c.negated()) == Approx(14.0).epsilon(1e-13));
    CHECK(hyers_ulam_constant(c) == Approx(test_oracle::brute_k0(1.0, {0.0, 0.5, -0.5})));
}

TEST_CASE("degenerate and unit-modulus cycles are rejected", "[stability]") {
    CHECK_THROWS_AS(hyers_ulam_constant(PeriodicCycle(1.0, {-1.0})), DegenerateError);
    CHECK_THROWS_AS(reciprocal_sums(PeriodicCycle(0.5, {-2.0})), DegenerateError);
    CHECK_THROWS_AS(hyers_ulam_constant(PeriodicCycle(1.0, {0.0})), NotStableError);
    // |e(3h)| = |1 - h^2 A^2| = 1 at A = sqrt(2)/h
    CHECK_THROWS_AS(hyers_ulam_constant(three_cycle(1.0, std::sqrt(2.0))), NotStableError);
}

TEST_CASE("stability verdicts", "[stability]") {
    SECTION("unit modulus at A = sqrt(2)/h") {
        const StabilityReport r = analyze_stability(three_cycle(0.5, std::sqrt(2.0) / 0.5));
        CHECK(r.verdict == Verdict::NotStableUnitModulus);
        CHECK_FALSE(r.positive.k0.has_value());
        CHECK_FALSE(r.composite.has_value());
    }
    SECTION("zero factor at lambda = -1/h") {
        const StabilityReport r = analyze_stability(PeriodicCycle(2.0, {-0.5}));
        CHECK(r.verdict == Verdict::DegenerateZeroFactor);
        CHECK(r.positive.state == SideState::ZeroFactor);
        CHECK_FALSE(r.positive.sums.has_value());
    }
    SECTION("pi two-cycle at h = 0.1 is stable with a composite constant") {
        const StabilityReport r =
            analyze_stability(PeriodicCycle(0.1, {M_PI, 2.0 * M_PI}), EquationFamily::Pqr);
        CHECK(r.verdict == Verdict::Stable);
        REQUIRE(r.composite.has_value());
        REQUIRE(r.positive.k0.has_value());
        REQUIRE(r.negative.k0.has_value());
        CHECK(*r.composite ==
              Approx(*r.positive.k0 * (*r.negative.k0) * (*r.negative.k0)).epsilon(1e-14));
        CHECK(r.positive.minimal);       // e(2h) = (1+h pi)(1+2h pi) > 1
        CHECK_FALSE(r.negative.minimal); // |e_neg(2h)| < 1 at h = 0.1
    }
    SECTION("one-sided zero factor only degrades the families that need it") {
        const PeriodicCycle c(1.0, {1.0}); // lambda = +1/h
        CHECK(analyze_stability(c, EquationFamily::FirstHomogeneous).verdict == Verdict::Stable);
        CHECK(analyze_stability(c, EquationFamily::Hill).verdict ==
              Verdict::DegenerateZeroFactor);
        CHECK(analyze_stability(c, EquationFamily::FirstNonhomogeneous).verdict ==
              Verdict::DegenerateZeroFactor);
    }
}

TEST_CASE("Hill coefficient cycles", "[stability]") {
    SECTION("3-cycle {0, A, -A}") {
        const double h = 0.5, A = 1.7;
        const PeriodicCycle a = hill_coefficient_cycle(three_cycle(h, A));
        CHECK(a.value_at(0) == Approx(A / h).epsilon(1e-14));
        CHECK(a.value_at(1) == Approx(A * (A * h - 2.0) / h).epsilon(1e-14));
        CHECK(a.value_at(2) == Approx(A / h).epsilon(1e-14));
    }
    SECTION("2-cycle {A, B}") {
        const double h = 0.25, A = 0.9, B = 2.1;
        const PeriodicCycle a = hill_coefficient_cycle(PeriodicCycle(h, {A, B}));
        CHECK(a.value_at(0) == Approx((B - A * (1.0 + B * h)) / h).epsilon(1e-14));
        CHECK(a.value_at(1) == Approx((A - B * (1.0 + A * h)) / h).epsilon(1e-14));
    }
    SECTION("constant cycle gives -lambda^2") {
        const PeriodicCycle a = hill_coefficient_cycle(PeriodicCycle(0.3, {1.1}));
        CHECK(a.value_at(0) == Approx(-1.1 * 1.1).epsilon(1e-14));
    }
}

TEST_CASE("third-order coefficient cycles", "[stability]") {
    SECTION("pqr family on the pi two-cycle") {
        const double h = 0.25;
        const double pi = M_PI;
        const ThirdOrderCoefficients c =
            third_order_coefficients(PeriodicCycle(h, {pi, 2.0 * pi}), EquationFamily::Pqr);
        CHECK(c.p.value_at(0) == Approx(pi).epsilon(1e-14));
        CHECK(c.p.value_at(1) == Approx(2.0 * pi).epsilon(1e-14));
        CHECK(c.q.value_at(0) == Approx(-pi / h - 2.0 * pi * pi).epsilon(1e-13));
        CHECK(c.q.value_at(1) == Approx(pi / h - 2.0 * pi * pi).epsilon(1e-13));
        CHECK(c.r.value_at(0) ==
              Approx(-2.0 * pi / (h * h) + pi * pi / h - 2.0 * pi * pi * pi).epsilon(1e-13));
        // second difference of the 2-cycle at an odd index is +2 pi / h^2
        CHECK(c.r.value_at(1) ==
              Approx(2.0 * pi / (h * h) - 2.0 * pi * pi / h - 4.0 * pi * pi * pi).epsilon(1e-13));
    }
    SECTION("pqr2 family with a constant cycle") {
        const double lambda = 0.8;
        const ThirdOrderCoefficients c =
            third_order_coefficients(PeriodicCycle(1.0, {lambda}), EquationFamily::Pqr2);
        CHECK(c.p.value_at(0) == Approx(-lambda).epsilon(1e-14));
        CHECK(c.q.value_at(0) == Approx(-lambda * lambda).epsilon(1e-14));
        CHECK(c.r.value_at(0) == Approx(lambda * lambda * lambda).epsilon(1e-14));
    }
    SECTION("pqr family with a constant cycle") {
        const double lambda = 0.8;
        const ThirdOrderCoefficients c =
            third_order_coefficients(PeriodicCycle(1.0, {lambda}), EquationFamily::Pqr);
        CHECK(c.p.value_at(0) == Approx(lambda).epsilon(1e-14));
        CHECK(c.q.value_at(0) == Approx(-lambda * lambda).epsilon(1e-14));
        CHECK(c.r.value_at(0) == Approx(-lambda * lambda * lambda).epsilon(1e-14));
    }
}

TEST_CASE("composite constants", "[stability]") {
    SECTION("constant cycle, Hill family, contracting regime") {
        const double h = 0.5, lambda = 0.9; // in (0, 1/h)
        CHECK(composite_constant(PeriodicCycle(h, {lambda}), EquationFamily::Hill) ==
              Approx(1.0 / (lambda * lambda)).epsilon(1e-13));
    }
    SECTION("constant cycle, Hill family, other regimes") {
        const double h = 0.5;
        for (double lambda : {2.5, 3.7, 5.0}) { // (1/h, 2/h) and beyond
            CHECK(composite_constant(PeriodicCycle(h, {lambda}), EquationFamily::Hill) ==
                  Approx(h / (lambda * std::abs(2.0 - h * lambda))).epsilon(1e-13));
        }
    }
    SECTION("pi two-cycle, pqr family, small h") {
        const double h = 0.1, pi = M_PI; // h < 1/(2 pi)
        const double expect = 2.0 * (1.0 + h * pi) * (2.0 - h * pi) * (2.0 - h * pi) /
                              (pi * pi * pi * (3.0 + 2.0 * h * pi) * (3.0 - 2.0 * h * pi) *
                               (3.0 - 2.0 * h * pi));
        CHECK(composite_constant(PeriodicCycle(h, {pi, 2.0 * pi}), EquationFamily::Pqr) ==
              Approx(expect).epsilon(1e-13));
    }
    SECTION("{0, 1/2, -1/2} at h = 1, Hill family") {
        CHECK(composite_constant(three_cycle(1.0, 0.5), EquationFamily::Hill) ==
              Approx(224.0).epsilon(1e-13));
    }
    SECTION("first-order families reduce to one-sided constants") {
        const PeriodicCycle c = three_cycle(1.0, 0.5);
        CHECK(composite_constant(c, EquationFamily::FirstHomogeneous) == Approx(16.0));
        CHECK(composite_constant(c, EquationFamily::FirstNonhomogeneous) == Approx(14.0));
    }
}

TEST_CASE("constant is invariant under repeated-cycle representation", "[stability][property]") {
    test_oracle::Rng rng(19);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + trial % 3;
        const double h = 0.2 + (rng.uniform() + 1.0) / 2.0;
        std::vector<double> vals;
        for (std::size_t i = 0; i < n; ++i) vals.push_back(1.5 * rng.uniform());
        const PeriodicCycle base = PeriodicCycle::with_period_as_given(h, vals);
        double k0_base = 0.0;
        try {
            k0_base = hyers_ulam_constant(base);
        } catch (const Error&) {
            continue; // degenerate or unit-modulus draw
        }
        for (int m : {2, 3}) {
            std::vector<double> rep;
            for (int r = 0; r < m; ++r) rep.insert(rep.end(), vals.begin(), vals.end());
            const PeriodicCycle repeated = PeriodicCycle::with_period_as_given(h, rep);
            CHECK(hyers_ulam_constant(repeated) == Approx(k0_base).epsilon(1e-12));
        }
    }
}

TEST_CASE("argmax case table for the 3-cycle", "[stability][property]") {
    // For A in (0, 1/h) the largest positive-side sum is S_2 and the largest
    // negative-side sum is S_1.
    for (double h : {0.5, 1.0, 2.0}) {
        for (double frac : {0.15, 0.4, 0.65, 0.9}) {
            const double A = frac / h;
            CHECK(reciprocal_sums(three_cycle(h, A)).argmax_index == 2);
            CHECK(reciprocal_sums(three_cycle(h, A).negated()).argmax_index == 1);
        }
    }
}

TEST_CASE("Hill composite is invariant under cycle negation", "[stability][property]") {
    test_oracle::Rng rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 1 + trial % 4;
        const double h = 0.2 + (rng.uniform() + 1.0) / 2.0;
        std::vector<double> vals;
        for (std::size_t i = 0; i < n; ++i) vals.push_back(1.5 * rng.uniform());
        const PeriodicCycle c = PeriodicCycle::with_period_as_given(h, vals);
        double k = 0.0;
        try {
            k = composite_constant(c, EquationFamily::Hill);
        } catch (const Error&) {
            continue;
        }
        CHECK(composite_constant(c.negated(), EquationFamily::Hill) ==
              Approx(k).epsilon(1e-12));
    }
}
