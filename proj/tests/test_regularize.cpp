#include "helpers.hpp"
#include "nsavg/regularize.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace nsavg;
using namespace nsavg::testing;
using Catch::Matchers::WithinAbs;

TEST_CASE("phi clamps to [-1, 1]", "[regularize]") {
    CHECK(phi(2.0) == 1.0);
    CHECK(phi(-0.5) == -0.5);
    CHECK(phi(-3.0) == -1.0);
    CHECK(phi(1.0) == 1.0);
    CHECK(phi(-1.0) == -1.0);
    CHECK(phi(0.0) == 0.0);
}

TEST_CASE("phi_delta scales by delta and validates it", "[regularize]") {
    CHECK(phi_delta(0.05, 0.1) == Catch::Approx(0.5));
    CHECK(phi_delta(0.2, 0.1) == 1.0);
    CHECK_THROWS_AS(phi_delta(0.1, 0.0), BadDelta);
    CHECK_THROWS_AS(phi_delta(0.1, -0.5), BadDelta);
    CHECK_THROWS_AS(phi_delta(0.1, 1.5), BadDelta);
    CHECK_THROWS_AS(phi_delta(0.1, std::nan("")), BadDelta);
    CHECK_NOTHROW(phi_delta(0.1, 1.0));
}

TEST_CASE("phi_delta equals sgn once delta <= |u|", "[regularize]") {
    for (double u : {0.01, -0.01}) {
        for (double d : {0.01, 0.005, 1e-3, 1e-6}) CHECK(phi_delta(u, d) == sign(u));
        CHECK(std::abs(phi_delta(u, 0.1)) < 1.0);
    }
}

TEST_CASE("phi_delta is globally 1/delta-Lipschitz on random pairs", "[regularize][property]") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> U(-10.0, 10.0);
    for (double d : {1.0, 0.1, 0.01}) {
        double worst = 0.0;
        for (int k = 0; k < 10000; ++k) {
            const double a = U(rng), b = U(rng);
            const double lhs = std::abs(phi_delta(a, d) - phi_delta(b, d));
            worst = std::max(worst, lhs - std::abs(a - b) / d);
        }
        CHECK(worst <= 1e-15);
    }
}

TEST_CASE("Z_delta on Sigma is F1, and agrees with Z where |h| >= delta", "[regularize]") {
    const PiecewiseSystem sys = registry_get("time-switch-1d");
    const Regularization reg(sys, 0.5);
    // cos(pi / 2) is 6e-17, so phi contributes at rounding level only.
    CHECK_THAT(reg.eval(kPi / 2, vec({0.0}), 0.0)[0], WithinAbs(0.0, 1e-15));
    CHECK_THAT(reg.eval(kPi / 2, vec({0.3}), 0.0)[0], WithinAbs(sys.F1()(kPi / 2, vec({0.3}))[0], 1e-15));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ut(0.0, kTwoPi), ux(-1.0, 1.0);
    for (double d : {0.5, 0.1, 0.01}) {
        const Regularization r(sys, d);
        int compared = 0;
        for (int k = 0; k < 2000; ++k) {
            const double t = ut(rng);
            const Vector x = vec({ux(rng)});
            if (std::abs(sys.h()(t, x)) <= d) continue;
            CHECK(r.eval(t, x, 0.1)[0] == evaluate_Z(sys, t, x, 0.1)[0]);
            ++compared;
        }
        CHECK(compared > 100);
    }
}

TEST_CASE("Z_delta is continuous across Sigma", "[regularize]") {
    const PiecewiseSystem sys = registry_get("time-switch-1d");
    const Regularization reg(sys, 0.01);
    const Vector x = vec({0.2});
    const double t = kPi / 2;
    for (double dt : {1e-4, 1e-6, 1e-8}) {
        CHECK(std::abs(reg.eval(t + dt, x, 0.0)[0] - reg.eval(t - dt, x, 0.0)[0]) <= 2.0 * dt / 0.01 + 1e-12);
    }
}

TEST_CASE("Z_delta carries the eps-order pieces", "[regularize]") {
    const SmoothField one(1, kTwoPi, [](double, const Vector&, double) { return vec({1.0}); });
    const SmoothField two(1, kTwoPi, [](double, const Vector&, double) { return vec({2.0}); });
    auto h = SwitchingFunction::analytic(
        kTwoPi, [](double t, const Vector&) { return std::cos(t); }, [](double t, const Vector&) { return -std::sin(t); },
        [](double, const Vector&) { return vec({0.0}); });
    const PiecewiseSystem sys("with-r", one, one, two, one, h, Box::interval(-1, 1));
    const Regularization reg(sys, 0.5);
    // h(0) = 1 >= delta: w = 1, Z = F1 + F2 + eps (R1 + R2) = 2 + 3 eps.
    CHECK(reg.eval(0.0, vec({0.0}), 0.1)[0] == Catch::Approx(2.3));
    // h(pi/2) = 0: w = 0, Z = F1 + eps R1.
    CHECK(reg.eval(kPi / 2, vec({0.0}), 0.1)[0] == Catch::Approx(1.2));
}

TEST_CASE("empirical x-Lipschitz quotient is finite for each delta", "[regularize][property]") {
    const PiecewiseSystem sys = registry_get("lp-planar");
    double prev = 0.0;
    for (double d : {1.0, 0.1, 0.01}) {
        const double L = empirical_lipschitz_x(Regularization(sys, d), 0.0, 2000, 99);
        CHECK(std::isfinite(L));
        CHECK(L > 0.0);
        prev = std::max(prev, L);
    }
    CHECK(std::isfinite(prev));
}

TEST_CASE("alternative transition functions plug in", "[regularize]") {
    const PiecewiseSystem sys = registry_get("time-switch-1d");
    const Regularization reg(sys, 0.1, [](double u) { return std::tanh(u); });
    CHECK(reg.weight(0.0, vec({0.0})) == Catch::Approx(std::tanh(10.0)));
}
