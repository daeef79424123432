#include "helpers.hpp"
#include "nsavg/ode.hpp"

#include <catch_amalgamated.hpp>

using namespace nsavg;
using namespace nsavg::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("exponential growth to tolerance", "[ode]") {
    const ode::Rhs f = [](double, const Vector& x) { return Vector(x); };
    const auto r = ode::integrate_segment(f, 0.0, vec({1.0}), 2.0, {});
    CHECK(r.t == 2.0);
    CHECK_THAT(r.x[0], WithinRel(std::exp(2.0), 1e-11));
    CHECK_FALSE(r.stopped);
}

TEST_CASE("harmonic oscillator conserves the circle over ten periods", "[ode]") {
    const ode::Rhs f = [](double, const Vector& x) { return vec({x[1], -x[0]}); };
    const auto r = ode::integrate_segment(f, 0.0, vec({1.0, 0.0}), 10 * kTwoPi, {});
    CHECK_THAT(r.x[0], WithinAbs(1.0, 1e-9));
    CHECK_THAT(r.x[1], WithinAbs(0.0, 1e-9));
}

TEST_CASE("dense output is accurate inside every step", "[ode]") {
    const ode::Rhs f = [](double t, const Vector& x) { return vec({std::cos(t) * x[0]}); };
    std::vector<ode::DenseStep> steps;
    ode::Controls c;
    c.max_step = 0.5;
    ode::integrate_segment(f, 0.0, vec({1.0}), 6.0, c, {}, &steps);
    REQUIRE(steps.size() >= 12);
    double worst = 0.0;
    for (const auto& s : steps) {
        CHECK_THAT(s.at(s.t0)[0], WithinRel(std::exp(std::sin(s.t0)), 1e-10));
        for (double u : {0.1, 0.37, 0.5, 0.83}) {
            const double t = s.t0 + u * s.h;
            worst = std::max(worst, std::abs(s.at(t)[0] - std::exp(std::sin(t))));
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("a step monitor stops integration at the requested time", "[ode]") {
    const ode::Rhs f = [](double, const Vector&) { return vec({1.0}); };
    const ode::StepMonitor stop = [](const ode::DenseStep& s) -> std::optional<double> {
        if (s.t0 <= 0.75 && 0.75 <= s.t1()) return 0.75;
        return std::nullopt;
    };
    const auto r = ode::integrate_segment(f, 0.0, vec({0.0}), 3.0, {}, stop);
    CHECK(r.stopped);
    CHECK(r.t == 0.75);
    CHECK_THAT(r.x[0], WithinAbs(0.75, 1e-14));
}

TEST_CASE("finite-time blow-up is a step failure", "[ode]") {
    const ode::Rhs f = [](double, const Vector& x) { return Vector(x.array().square()); };
    ode::Controls c;
    c.max_steps = 20000;
    CHECK_THROWS_AS(ode::integrate_segment(f, 0.0, vec({1.0}), 2.0, c), StepFailure);
}

TEST_CASE("max_step bounds every accepted step", "[ode]") {
    const ode::Rhs f = [](double, const Vector&) { return vec({0.0}); };
    std::vector<ode::DenseStep> steps;
    ode::Controls c;
    c.max_step = 0.1;
    ode::integrate_segment(f, 0.0, vec({0.0}), 1.0, c, {}, &steps);
    for (const auto& s : steps) CHECK(s.h <= 0.1 + 1e-15);
    CHECK_THAT(steps.back().t1(), WithinAbs(1.0, 1e-15));
}
