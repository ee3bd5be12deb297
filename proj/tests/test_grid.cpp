#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "hus/grid.hpp"
#include "oracles.hpp"

using namespace hus;

TEST_CASE("coefficient_at wraps by grid index", "[grid]") {
    const double A = 1.25;
    PeriodicCycle c3(1.0, {0.0, A, -A});
    CHECK(coefficient_at(c3, 0) == 0.0);
    CHECK(coefficient_at(c3, 4) == A);
    CHECK(coefficient_at(c3, 5) == -A);

    PeriodicCycle constant(0.5, {2.0});
    for (TimeIndex k : {0, 1, 7, 100}) CHECK(coefficient_at(constant, k) == 2.0);

    PeriodicCycle pis(0.1, {M_PI, 2.0 * M_PI});
    CHECK(coefficient_at(pis, 3) == 2.0 * M_PI);

    CHECK_THROWS_AS(coefficient_at(c3, -1), std::invalid_argument);
}

TEST_CASE("forward differences", "[grid]") {
    SECTION("constant trajectory has zero slope") {
        Trajectory tr(0.25, 0, {3.0, 3.0, 3.0, 3.0});
        CHECK(delta_h(tr, 0) == 0.0);
        CHECK(delta_h(tr, 2) == 0.0);
    }
    SECTION("identity samples have slope one") {
        const double h = 0.2;
        std::vector<double> s;
        for (int k = 0; k < 6; ++k) s.push_back(k * h);
        Trajectory tr(h, 0, s);
        for (TimeIndex k = 0; k < 5; ++k) CHECK(delta_h(tr, k) == Approx(1.0).epsilon(1e-15));
    }
    SECTION("second difference from the (1,2,4,8) table") {
        Trajectory tr(1.0, 0, {1.0, 2.0, 4.0, 8.0});
        CHECK(delta2_h(tr, 0) == 1.0);
        CHECK(delta2_h(tr, 1) == 2.0);
        CHECK(delta3_h(tr, 0) == 1.0);
    }
    SECTION("out-of-window access is rejected") {
        Trajectory tr(1.0, 2, {1.0, 2.0, 4.0});
        CHECK_THROWS_AS(delta_h(tr, 4), WindowError);
        CHECK_THROWS_AS(tr[1], WindowError);
        CHECK(delta_h(tr, 2) == 1.0);
    }
}

TEST_CASE("discrete exponential", "[grid]") {
    SECTION("empty product is exactly one") {
        PeriodicCycle c(0.3, {1.0, -2.0});
        CHECK(discrete_exponential(c, 0) == 1.0);
    }
    SECTION("three-cycle {0, A, -A} over one period") {
        const double h = 0.5, A = 1.2;
        PeriodicCycle c(h, {0.0, A, -A});
        CHECK(discrete_exponential(c, 3) == Approx(1.0 - h * h * A * A).epsilon(1e-15));
    }
    SECTION("two-cycle {A, B} over one period") {
        const double h = 0.25, A = 0.8, B = 2.5;
        PeriodicCycle c(h, {A, B});
        CHECK(discrete_exponential(c, 2) == Approx((1 + A * h) * (1 + B * h)).epsilon(1e-15));
        PeriodicCycle neg = c.negated();
        CHECK(discrete_exponential(neg, 2) == Approx((1 - A * h) * (1 - B * h)).epsilon(1e-15));
    }
}

TEST_CASE("negate_cycle", "[grid]") {
    PeriodicCycle c(1.0, {0.0, 1.5, -1.5});
    const PeriodicCycle n = negate_cycle(c);
    CHECK(n.value_at(1) == -1.5);
    CHECK(n.value_at(2) == 1.5);
    const PeriodicCycle nn = negate_cycle(n);
    for (TimeIndex k = 0; k < 3; ++k) CHECK(nn.value_at(k) == c.value_at(k));

    PeriodicCycle pis(0.1, {M_PI, 2.0 * M_PI});
    CHECK(negate_cycle(pis).value_at(0) == -M_PI);
}

TEST_CASE("cycle validation", "[grid]") {
    CHECK_THROWS_AS(StepSize(0.0), std::invalid_argument);
    CHECK_THROWS_AS(StepSize(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(PeriodicCycle(1.0, {}), std::invalid_argument);
    // non-minimal representations need the relaxed constructor
    CHECK_THROWS_AS(PeriodicCycle(1.0, {2.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(PeriodicCycle(1.0, {1.0, 2.0, 1.0, 2.0}), std::invalid_argument);
    const PeriodicCycle repeated = PeriodicCycle::with_period_as_given(1.0, {1.0, 2.0, 1.0, 2.0});
    CHECK(repeated.period() == 4);
    CHECK(repeated.minimal_period() == 2);
    CHECK(PeriodicCycle(1.0, {1.0, 2.0, 2.0}).minimal_period() == 3);
}

TEST_CASE("exponential satisfies the semigroup property over periods", "[grid][property]") {
    test_oracle::Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 4;
        const double h = 0.1 + 0.9 * (rng.uniform() + 1.0) / 2.0;
        std::vector<double> vals;
        for (int i = 0; i < n; ++i) vals.push_back(2.0 * rng.uniform());
        const PeriodicCycle c = PeriodicCycle::with_period_as_given(h, vals);
        const double en = discrete_exponential(c, n);
        for (TimeIndex t : {0, 1, 3, 7}) {
            const double lhs = discrete_exponential(c, t + n);
            const double rhs = discrete_exponential(c, t) * en;
            CHECK(lhs == Approx(rhs).margin(1e-12 * (1.0 + std::abs(rhs))));
        }
    }
}

TEST_CASE("exponential solves the first-order recursion", "[grid][property]") {
    test_oracle::Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + trial % 3;
        const double h = 0.2 + (rng.uniform() + 1.0) / 2.0;
        std::vector<double> vals;
        for (int i = 0; i < n; ++i) vals.push_back(1.5 * rng.uniform());
        const PeriodicCycle c = PeriodicCycle::with_period_as_given(h, vals);
        std::vector<double> e;
        for (TimeIndex k = 0; k <= 24; ++k) e.push_back(discrete_exponential(c, k));
        Trajectory tr(h, 0, e);
        for (TimeIndex k = 0; k < 24; ++k) {
            const double res = delta_h(tr, k) - c.value_at(k) * tr[k];
            CHECK(std::abs(res) <= 1e-12 * std::max(1.0, std::abs(tr[k])));
        }
    }
}

TEST_CASE("delta_h is linear", "[grid][property]") {
    test_oracle::Rng rng(11);
    const double h = 0.5;
    std::vector<double> u, v, w;
    const double a = 2.25, b = -0.75;
    for (int k = 0; k < 20; ++k) {
        u.push_back(rng.uniform());
        v.push_back(rng.uniform());
        w.push_back(a * u.back() + b * v.back());
    }
    Trajectory tu(h, 0, u), tv(h, 0, v), tw(h, 0, w);
    for (TimeIndex k = 0; k < 19; ++k) {
        CHECK(delta_h(tw, k) ==
              Approx(a * delta_h(tu, k) + b * delta_h(tv, k)).margin(1e-14));
    }
}
