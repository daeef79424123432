#include "helpers.hpp"
#include "nsavg/lcapp.hpp"
#include "nsavg/quadrature.hpp"

#include <catch_amalgamated.hpp>

using namespace nsavg;
using namespace nsavg::testing;
using Catch::Matchers::WithinAbs;

namespace {

SwitchingFunction time_only(std::function<double(double)> g) {
    return SwitchingFunction::finite_difference(kTwoPi, [g](double t, const Vector&) { return g(t); });
}

void check_times(const std::vector<double>& got, const std::vector<double>& expected, double tol) {
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK_THAT(got[i], WithinAbs(expected[i], tol));
}

}  // namespace

TEST_CASE("switch times of cos t are pi/2 and 3pi/2", "[quadrature]") {
    const auto st = isolate_switch_times(time_only([](double t) { return std::cos(t); }), vec({0.0}));
    check_times(st.times, {kPi / 2, 3 * kPi / 2}, 1e-14);
    CHECK_FALSE(st.scan_too_coarse);
    for (double t : st.times) CHECK(std::abs(std::cos(t)) <= st.refinement_tol);
}

TEST_CASE("constant h has no switch times", "[quadrature]") {
    const auto st = isolate_switch_times(time_only([](double) { return 1.0; }), vec({0.0}));
    CHECK(st.times.empty());
}

TEST_CASE("sin 2t switches at every multiple of pi/2 including both endpoints", "[quadrature]") {
    const auto st = isolate_switch_times(time_only([](double t) { return std::sin(2 * t); }), vec({0.0}));
    check_times(st.times, {0.0, kPi / 2, kPi, 3 * kPi / 2, kTwoPi}, 1e-14);
}

TEST_CASE("tangential zeros are found by local minimization", "[quadrature]") {
    // 1 - cos t touches zero at t = 0 and 2 pi only.
    const auto a = isolate_switch_times(time_only([](double t) { return 1.0 - std::cos(t); }), vec({0.0}));
    check_times(a.times, {0.0, kTwoPi}, 1e-12);
    // 1 + sin t touches zero at 3 pi / 2, between scan nodes.
    const auto b = isolate_switch_times(time_only([](double t) { return 1.0 + std::sin(t); }), vec({0.0}));
    REQUIRE(b.times.size() == 1);
    CHECK_THAT(b.times[0], WithinAbs(3 * kPi / 2, 1e-6));
    // A dip through zero narrower than the scan spacing yields its two crossings.
    const auto c = isolate_switch_times(
        time_only([](double t) { return (t - 1.0) * (t - 1.0) - 1e-6; }), vec({0.0}));
    check_times(c.times, {1.0 - 1e-3, 1.0 + 1e-3}, 1e-12);
}

TEST_CASE("identically vanishing h is refused as non-isolated", "[quadrature]") {
    CHECK_THROWS_AS(isolate_switch_times(time_only([](double) { return 0.0; }), vec({0.0})), NonIsolatedZeros);
    CHECK_THROWS_AS(
        isolate_switch_times(time_only([](double t) { return t < 3.0 ? 0.0 : std::sin(t - 3.0) - 1.0; }), vec({0.0})),
        NonIsolatedZeros);
}

TEST_CASE("adaptive Gauss-Kronrod integrates smooth functions to tolerance", "[quadrature]") {
    const auto r = integrate_adaptive([](double t) { return vec({std::exp(t), std::sin(t)}); }, 0.0, 2.0);
    CHECK_THAT(r.value[0], WithinAbs(std::exp(2.0) - 1.0, 1e-12));
    CHECK_THAT(r.value[1], WithinAbs(1.0 - std::cos(2.0), 1e-12));
    CHECK(r.error_estimate <= 1e-9);
    const auto peak = integrate_adaptive([](double t) { return vec({1.0 / (1e-4 + t * t)}); }, -1.0, 1.0);
    CHECK_THAT(peak.value[0], WithinAbs(2.0 / 1e-2 * std::atan(1.0 / 1e-2), 1e-8));
    QuadratureSpec tight;
    tight.max_depth = 2;
    CHECK_THROWS_AS(integrate_adaptive([](double t) { return vec({std::sqrt(std::abs(t))}); }, -1.0, 1.0, tight),
                    MaxDepthExceeded);
}

TEST_CASE("sgn(cos t) integrates to 0 and sgn(cos t) cos t to 4", "[quadrature]") {
    const auto s0 = cos_switched("sgn-cos", [](double, double) { return 0.0; }, [](double, double) { return 1.0; });
    const auto i0 = integrate_piecewise(s0, vec({0.0}));
    CHECK_THAT(i0.value[0], WithinAbs(0.0, 1e-10));
    CHECK(std::abs(i0.value[0]) <= std::max(i0.error_estimate, 1e-15));

    const auto s1 = cos_switched("abs-cos", [](double, double) { return 0.0; },
                                 [](double t, double) { return std::cos(t); });
    const auto i1 = integrate_piecewise(s1, vec({0.0}));
    CHECK_THAT(i1.value[0], WithinAbs(4.0, 1e-9));
    CHECK(std::abs(i1.value[0] - 4.0) <= std::max(i1.error_estimate, 1e-14));
    CHECK(i1.breakpoints.size() == 4);
}

TEST_CASE("LP integrand at r = 1 integrates to -2 pi / 5", "[quadrature]") {
    const auto r = integrate_piecewise(lcapp::lp_system(), vec({1.0}));
    CHECK_THAT(r.value[0], WithinAbs(-2.0 * kPi / 5.0, 1e-9));
    CHECK(std::abs(r.value[0] + 2.0 * kPi / 5.0) <= std::max(r.error_estimate, 1e-13));
}

TEST_CASE("integral is stable under doubling the scan density", "[quadrature][property]") {
    const auto sys = cos_switched("mix", [](double t, double x) { return x * std::sin(t) + 0.3; },
                                  [](double t, double x) { return std::exp(std::cos(t)) * x; });
    QuadratureSpec a, b;
    b.scan_points = 2 * a.scan_points;
    for (double z : {-0.8, 0.1, 0.9}) {
        const auto ra = integrate_piecewise(sys, vec({z}), a);
        const auto rb = integrate_piecewise(sys, vec({z}), b);
        CHECK(std::abs(ra.value[0] - rb.value[0]) <= 2.0 * std::max(ra.error_estimate + rb.error_estimate, 1e-14));
    }
}

TEST_CASE("flipping F2 changes only the sgn-weighted part", "[quadrature][property]") {
    auto f1 = [](double t, double x) { return std::sin(3 * t) + x; };
    auto f2 = [](double t, double x) { return std::cos(t) * x + 1.0; };
    const auto plus = cos_switched("p", f1, f2);
    const auto minus = cos_switched("m", f1, [f2](double t, double x) { return -f2(t, x); });
    const auto zero = cos_switched("z", f1, [](double, double) { return 0.0; });
    for (double z : {-0.5, 0.25}) {
        const double a = integrate_piecewise(plus, vec({z})).value[0];
        const double b = integrate_piecewise(minus, vec({z})).value[0];
        const double c = integrate_piecewise(zero, vec({z})).value[0];
        CHECK_THAT(a + b, WithinAbs(2.0 * c, 1e-10));
    }
}

TEST_CASE("state-dependent switching splits where h(t, z) = 0", "[quadrature]") {
    // h = x - cos t: for z = 0.5 the switch times are +-pi/3 (mod 2 pi).
    const auto sys = system_1d(
        "x-minus-cos", [](double, double) { return 0.0; }, [](double, double) { return 1.0; },
        [](double t, double x) { return x - std::cos(t); }, [](double t, double) { return std::sin(t); },
        [](double, double) { return 1.0; });
    const auto r = integrate_piecewise(sys, vec({0.5}));
    check_times(r.switches.times, {kPi / 3, 5 * kPi / 3}, 1e-13);
    // sgn(h) = -1 on [0, pi/3) and (5pi/3, 2pi], +1 between.
    CHECK_THAT(r.value[0], WithinAbs(4 * kPi / 3 - 2 * kPi / 3, 1e-10));
}

TEST_CASE("regularized quadrature splits at h = +-delta", "[quadrature]") {
    const auto sys = cos_switched("sgn-cos", [](double, double) { return 0.0; },
                                  [](double t, double) { return std::cos(t); });
    for (double d : {0.5, 0.1, 0.01}) {
        // |cos t| where |cos t| > d, cos^2 t / d inside the ramp; four symmetric quarters.
        const double a = std::acos(d);
        const double outer = 4.0 * std::sin(a);
        const double ramp = 4.0 / d * (0.5 * (kPi / 2 - a) - 0.25 * std::sin(2 * a));
        const auto r = integrate_regularized(sys, vec({0.0}), d);
        CHECK_THAT(r.value[0], WithinAbs(outer + ramp, 1e-10));
        CHECK(r.breakpoints.size() >= 6);
    }
}
