#include "helpers.hpp"
#include "nsavg/filippov.hpp"
#include "nsavg/lcapp.hpp"

#include <catch_amalgamated.hpp>

using namespace nsavg;
using namespace nsavg::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// x' = eps (-x + s) with s = sgn(cos t): exact affine Poincare map P(z) = q z + c.
struct AffineMap {
    double q, c;
    [[nodiscard]] double operator()(double z) const { return q * z + c; }
    [[nodiscard]] double fixed_point() const { return c / (1.0 - q); }
};

AffineMap time_switch_map(double eps) {
    auto flow = [eps](double x, double s, double dt) { return s + (x - s) * std::exp(-eps * dt); };
    auto run = [&](double z) {
        double x = flow(z, 1.0, kPi / 2);
        x = flow(x, -1.0, kPi);
        return flow(x, 1.0, kPi / 2);
    };
    const double c = run(0.0);
    return {run(1.0) - c, c};
}

PiecewiseSystem unit_switch() {
    return cos_switched("unit", [](double, double) { return 0.0; }, [](double, double) { return 1.0; });
}

ZeroCandidate zero_at(double a, int degree) {
    ZeroCandidate z;
    z.a = vec({a});
    z.degree = degree;
    return z;
}

}  // namespace

TEST_CASE("pure time switching rises then falls", "[filippov]") {
    // X = 1, Y = -1 with h = cos t, eps = 1: x = t up to pi / 2, then back down.
    const auto sys = unit_switch();
    const auto tr = integrate(sys, vec({0.0}), 1.0, 0.0, kTwoPi);
    CHECK_THAT(tr.state_at(kPi / 2)[0], WithinAbs(kPi / 2, 1e-10));
    CHECK_THAT(tr.state_at(kPi)[0], WithinAbs(0.0, 1e-10));
    CHECK_THAT(tr.final_state()[0], WithinAbs(0.0, 1e-10));
    REQUIRE(tr.events.size() == 2);
    CHECK_THAT(tr.events[0].t_star, WithinAbs(kPi / 2, 1e-11));
    CHECK_THAT(tr.events[1].t_star, WithinAbs(3 * kPi / 2, 1e-11));
    CHECK(tr.events[0].direction == CrossingDirection::plus_to_minus);
    CHECK(tr.events[1].direction == CrossingDirection::minus_to_plus);
    for (const auto& ev : tr.events) CHECK(ev.transversality > 0.0);
}

TEST_CASE("trajectory invariants: ordered events, constant sign of h between them", "[filippov][property]") {
    const auto sys = registry_get("time-switch-1d");
    for (double z : {-0.7, 0.0, 0.4}) {
        const auto tr = integrate(sys, vec({z}), 0.3, 0.0, 3 * kTwoPi);
        for (std::size_t i = 1; i < tr.events.size(); ++i) CHECK(tr.events[i].t_star > tr.events[i - 1].t_star);
        std::vector<double> cuts{0.0};
        for (const auto& ev : tr.events) cuts.push_back(ev.t_star);
        cuts.push_back(3 * kTwoPi);
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
            const double s = sign(sys.h()(mid, tr.state_at(mid)));
            for (int j = 1; j < 20; ++j) {
                const double t = cuts[k] + (cuts[k + 1] - cuts[k]) * j / 20.0;
                CHECK(sign(sys.h()(t, tr.state_at(t))) == s);
            }
        }
    }
}

TEST_CASE("const-switch slides at x = 0", "[filippov]") {
    const auto sys = registry_get("const-switch");
    try {
        integrate(sys, vec({0.5}), 1.0, 0.0, kTwoPi);
        FAIL("expected SlidingEncountered");
    } catch (const SlidingEncountered& e) {
        CHECK(std::string(e.what()).find("sliding encountered at t=") != std::string::npos);
        CHECK(e.category() == ErrorCategory::hypothesis);
    }
}

TEST_CASE("Poincare map of smooth reference fields", "[filippov]") {
    const auto c = cos_switched("c", [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
    for (double eps : {0.1, 0.01}) CHECK_THAT(poincare(c, vec({0.2}), eps)[0], WithinAbs(0.2 + eps * kTwoPi, 1e-12));
    const auto decay = registry_get("linear-decay-1d");
    for (double eps : {0.5, 0.1, 1e-3}) {
        CHECK_THAT(poincare(decay, vec({0.8}), eps)[0], WithinRel(0.8 * std::exp(-eps * kTwoPi), 1e-11));
    }
    CHECK(poincare(registry_get("time-switch-1d"), vec({0.3}), 0.0)[0] == 0.3);
}

TEST_CASE("Poincare map of time-switch-1d matches the exact affine map", "[filippov]") {
    const auto sys = registry_get("time-switch-1d");
    for (double eps : {0.5, 0.1, 0.01, -0.1}) {
        const AffineMap P = time_switch_map(eps);
        for (double z : {-0.5, 0.0, 0.6}) CHECK_THAT(poincare(sys, vec({z}), eps)[0], WithinAbs(P(z), 1e-11));
    }
}

TEST_CASE("regularized Poincare map limits", "[filippov]") {
    const auto sys = registry_get("time-switch-1d");
    CHECK(poincare_regularized(sys, vec({0.3}), 0.0, 0.1)[0] == 0.3);

    // |h| = |2 + cos t| > delta: the fields never enter the band.
    const auto far = system_1d(
        "far", [](double, double x) { return -x; }, [](double, double) { return 1.0; },
        [](double t, double) { return 2.0 + std::cos(t); }, [](double t, double) { return -std::sin(t); },
        [](double, double) { return 0.0; });
    CHECK_THAT(poincare_regularized(far, vec({0.2}), 0.3, 0.5)[0], WithinAbs(poincare(far, vec({0.2}), 0.3)[0], 1e-11));

    const double P = poincare(sys, vec({0.2}), 0.1)[0];
    double prev = std::numeric_limits<double>::infinity();
    for (double d : {0.5, 0.1, 1e-2, 1e-3, 1e-4}) {
        const double gap = std::abs(poincare_regularized(sys, vec({0.2}), 0.1, d)[0] - P);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("crossing indicator examples", "[filippov]") {
    CHECK_THAT(crossing_indicator(registry_get("time-switch-1d"), kPi / 2, vec({0.3}), 0.0), WithinAbs(1.0, 1e-15));
    CHECK(crossing_indicator(registry_get("const-switch"), 1.0, vec({0.0}), 0.0) == 0.0);
    CHECK(crossing_indicator(registry_get("const-switch"), 1.0, vec({0.0}), 0.1) < 0.0);
    // LP at the grazing point: d_t h = 0, so the product is eps^2 X Y with X = 19/50, Y = 2000/754.
    const double eps = 0.01;
    CHECK_THAT(crossing_indicator(lcapp::lp_system(), 0.0, vec({1.0}), eps),
               WithinRel(eps * eps * 0.38 * 2000.0 / 754.0, 1e-12));
}

TEST_CASE("hypothesis (ii) validator", "[filippov]") {
    const auto cos_rep = validate_hypothesis_ii(registry_get("time-switch-1d"), Box::interval(-1, 1), 9);
    CHECK(cos_rep.pass);
    CHECK_THAT(cos_rep.min_margin, WithinAbs(1.0, 1e-12));
    CHECK(cos_rep.sigma_points > 0);

    const auto x_rep = validate_hypothesis_ii(registry_get("const-switch"), Box::interval(-1, 1), 9);
    CHECK_FALSE(x_rep.pass);
    CHECK(x_rep.min_margin == 0.0);
    REQUIRE_FALSE(x_rep.witnesses.empty());

    // h = x - cos t on |x| <= 1/2: Sigma is x = cos t, |d_t h| = |sin t| >= sqrt(3) / 2 with equality at the box edge.
    const auto moving = system_1d(
        "moving", [](double, double) { return 0.0; }, [](double, double) { return 1.0; },
        [](double t, double x) { return x - std::cos(t); }, [](double t, double) { return std::sin(t); },
        [](double, double) { return 1.0; });
    const auto m = validate_hypothesis_ii(moving, Box::interval(-0.5, 0.5), 8);
    CHECK(m.pass);
    CHECK_THAT(m.min_margin, WithinAbs(std::sqrt(3.0) / 2.0, 1e-9));
    for (const auto& w : m.witnesses) CHECK_THAT(w.margin, WithinAbs(std::abs(std::sin(w.t)), 1e-12));
}

TEST_CASE("hypothesis (ii') validator", "[filippov]") {
    const auto ts = registry_get("time-switch-1d");
    const auto a = validate_hypothesis_ii(ts, Box::interval(-1, 1), 9);
    const auto b = validate_hypothesis_ii_prime(ts, Box::interval(-1, 1), 9, 0.1);
    CHECK(b.pass == a.pass);
    CHECK(b.degenerate_points == 0);

    // LP grazing point: lhs = eps (F1^2 - F2^2) / 2 = eps X Y / 2.
    const auto lp = lcapp::lp_system();
    const double eps = 0.05;
    CHECK_THAT(ii_prime_lhs(lp, 0.0, vec({1.0}), eps), WithinRel(eps * 0.38 * (2000.0 / 754.0) / 2.0, 1e-12));
    const auto lp_rep = validate_hypothesis_ii_prime(lp, lp.domain(), 9, eps);
    CHECK(lp_rep.degenerate_points > 0);
    CHECK(lp_rep.pass);
    CHECK_FALSE(validate_hypothesis_ii(lp, lp.domain(), 9).pass);

    // F1 = 0 at a degenerate point: lhs = -eps F2^2 / 2.
    const auto bad = system_1d(
        "bad", [](double, double) { return 0.0; }, [](double, double) { return 1.0; },
        [](double t, double x) { return x - std::cos(t); }, [](double t, double) { return std::sin(t); },
        [](double, double) { return 1.0; });
    CHECK_THAT(ii_prime_lhs(bad, 0.0, vec({1.0}), eps), WithinAbs(-eps / 2.0, 1e-15));
    CHECK_FALSE(validate_hypothesis_ii_prime(bad, Box::interval(-1, 1), 8, eps).pass);
    CHECK_THROWS_AS(validate_hypothesis_ii_prime(lp, lp.domain(), 9, 0.0), ConfigError);
}

TEST_CASE("expansion error is O(eps)", "[filippov]") {
    // Smooth linear decay: e(eps) = |z ((exp(-eps T) - 1) / eps + T)| exactly.
    const auto decay = registry_get("linear-decay-1d");
    const std::vector<double> eps{1e-1, 1e-2, 1e-3};
    const auto rows = check_poincare_expansion(decay, vec({0.5}), eps, 0.1);
    for (const auto& r : rows) {
        const double exact = std::abs(0.5 * ((std::exp(-r.eps * kTwoPi) - 1.0) / r.eps + kTwoPi));
        CHECK_THAT(r.error, WithinRel(exact, 1e-6));
    }
    const auto ts = check_poincare_expansion(registry_get("time-switch-1d"), vec({0.5}), eps, 1e-3);
    REQUIRE(ts.size() == 3);
    CHECK(ts[1].error / ts[2].error >= 5.0);
    CHECK_THROWS_AS(check_poincare_expansion(decay, vec({0.5}), {0.1, 0.0}, 0.1), ConfigError);
}

TEST_CASE("periodic orbits: equilibrium, exact fixed points, degree-zero refusal", "[filippov]") {
    for (double eps : {0.1, 0.01}) {
        const auto c = find_periodic(registry_get("linear-decay-1d"), zero_at(0.0, -1), eps, CertifyMode::two_sided);
        CHECK(c.z_eps[0] == 0.0);
        CHECK(c.distance == 0.0);
    }
    const auto ts = registry_get("time-switch-1d");
    for (double eps : {1e-1, 1e-2, 1e-3, -1e-2}) {
        const auto c = find_periodic(ts, zero_at(0.0, -1), eps, CertifyMode::two_sided);
        CHECK_THAT(c.z_eps[0], WithinAbs(time_switch_map(eps).fixed_point(), 1e-10));
        CHECK(c.fixed_point_residual <= 1e-10);
        CHECK(c.distance <= 1.0 * std::abs(eps));
        CHECK(c.degree == -1);
    }
    CHECK_THROWS_AS(find_periodic(registry_get("square-1d"), zero_at(0.0, 0), 0.1, CertifyMode::two_sided), DegreeZero);
    CHECK_THROWS_AS(find_periodic(ts, zero_at(0.0, -1), -0.1, CertifyMode::positive_only), ConfigError);
    CHECK_THROWS_AS(find_periodic(ts, zero_at(0.0, -1), 0.0, CertifyMode::two_sided), ConfigError);
    CHECK_THROWS_AS(find_periodic(ts, ZeroCandidate{vec({0.0})}, 0.1, CertifyMode::two_sided), ConfigError);
}

TEST_CASE("the certified orbit does not depend on the Newton seed", "[filippov][property]") {
    const auto ts = registry_get("time-switch-1d");
    const double want = time_switch_map(0.05).fixed_point();
    for (double a : {-0.2, -0.05, 0.05, 0.2}) {
        const auto c = find_periodic(ts, zero_at(a, -1), 0.05, CertifyMode::two_sided);
        CHECK_THAT(c.z_eps[0], WithinAbs(want, 1e-10));
    }
}

TEST_CASE("eps sweep certificates shrink toward the averaged zero", "[filippov]") {
    const auto ts = registry_get("time-switch-1d");
    const auto certs = certify_sweep(ts, zero_at(0.0, -1), kDefaultEpsSweep, CertifyMode::two_sided);
    CHECK(certs.size() == 6);
    CHECK(distances_decreasing(certs, 1.0));
    CHECK(distances_decreasing(certs, -1.0));
    const auto pos = certify_sweep(ts, zero_at(0.0, -1), kDefaultEpsSweep, CertifyMode::positive_only);
    CHECK(pos.size() == 3);
    for (const auto& c : pos) CHECK(c.eps > 0.0);
}

TEST_CASE("end-to-end pipeline outcomes", "[filippov]") {
    const auto ok = run_pipeline(registry_get("time-switch-1d"));
    CHECK(ok.status == PipelineStatus::ok);
    REQUIRE(ok.zeros.size() == 1);
    CHECK(std::abs(ok.zeros[0].zero.a[0]) <= 1e-10);
    REQUIRE(ok.zeros[0].degree.has_value());
    CHECK(ok.zeros[0].degree->value == -1);
    CHECK(ok.zeros[0].certificates.size() == 6);

    const auto slide = run_pipeline(registry_get("const-switch"));
    CHECK(slide.status == PipelineStatus::hypothesis_violation);

    const auto deg0 = run_pipeline(registry_get("square-1d"));
    CHECK(deg0.status == PipelineStatus::hypothesis_violation);
    REQUIRE_FALSE(deg0.zeros.empty());
    CHECK(deg0.zeros[0].certificates.empty());
    CHECK(deg0.zeros[0].failure.find("DegreeZero") != std::string::npos);
}
