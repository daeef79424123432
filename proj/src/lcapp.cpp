#include "nsavg/lcapp.hpp"

#include "nsavg/expr.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nsavg::lcapp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return w >= kTwoPi ? 0.0 : w;
}

}  // namespace

double inner_coefficient(double theta, InnerCoefficient kind) {
    const double c = std::cos(2.0 * theta), s = std::sin(2.0 * theta);
    const double num = 2300.0 * c - 4623.0 * s - 300.0;
    return kind == InnerCoefficient::rational ? num / (5377.0 - 4623.0 * c - 2300.0 * s) : num / 1500.0;
}

PiecewiseSystem lp_system(InnerCoefficient kind) {
    const SmoothField X(1, kTwoPi, [](double, const Vector& x, double) { return Vector(kOuterCoefficient * x); });
    const SmoothField Y(1, kTwoPi, [kind](double t, const Vector& x, double) {
        return Vector(inner_coefficient(t, kind) * x);
    });
    auto h = SwitchingFunction::analytic(
        kTwoPi, [](double t, const Vector& x) { return x[0] * std::cos(t) - 1.0; },
        [](double t, const Vector& x) { return -x[0] * std::sin(t); },
        [](double t, const Vector&) { return Vector::Constant(1, std::cos(t)); });
    return PiecewiseSystem::from_branches(kind == InnerCoefficient::rational ? "lp-planar" : "lp-planar-constant-denominator",
                                          X, Y, std::move(h), Box::interval(0.5, 1.5));
}

std::string to_string(Branch b) {
    return b == Branch::negative_theta0 ? "negative_theta0" : "positive_theta0";
}

double theta0_from_r0(double r0, Branch branch) {
    if (!(r0 >= 1.0)) throw ConfigError(fmt::format("r0 must be >= 1, got {}", r0));
    const double a = std::acos(1.0 / r0);
    return branch == Branch::positive_theta0 ? a : -a;
}

double arctan_term(double theta) {
    const double c = std::cos(theta);
    if (std::abs(c) < 1e-15) throw expr::DomainError(fmt::format("sec({:.17g}) is undefined", theta));
    return std::atan((23.0 * c - 100.0 * std::sin(theta)) / (15.0 * c)) / 5.0;
}

double log_term(double theta) {
    return 0.5 * std::log(std::abs(4623.0 * std::cos(2.0 * theta) + 2300.0 * std::sin(2.0 * theta) - 5377.0));
}

double inner_antiderivative(double theta) { return arctan_term(theta) - log_term(theta); }

std::array<double, 2> cycle_residuals(double r0, double theta1, Branch branch) {
    const double t0 = theta0_from_r0(r0, branch);
    const double outer = kOuterCoefficient * (theta1 - t0);
    const double res1 = std::exp(outer) * r0 * std::cos(theta1) - 1.0;
    const double res2 = outer + arctan_term(t0) - arctan_term(theta1) - log_term(t0) + log_term(theta1) - 2.0 * kPi / 5.0;
    return {res1, res2};
}

VectorMap cycle_map(Branch branch) {
    return [branch](const Vector& p) {
        const auto r = cycle_residuals(p[0], p[1], branch);
        return Vector((Vector(2) << r[0], r[1]).finished());
    };
}

std::vector<CycleSolution> solve_cycles(const SolveOptions& opts) {
    std::vector<CycleSolution> found;
    const double fd = 1e-7;
    for (Branch branch : {Branch::negative_theta0, Branch::positive_theta0}) {
        const VectorMap F = cycle_map(branch);
        auto keep_valid = [](Vector p) {
            p[0] = std::max(p[0], 1.0);
            p[1] = std::clamp(p[1], -kPi / 2 + 1e-9, kPi / 2 - 1e-9);
            return p;
        };
        for (int i = 0; i < opts.seeds_per_axis; ++i) {
            for (int j = 0; j < opts.seeds_per_axis; ++j) {
                const double u = opts.seeds_per_axis > 1 ? static_cast<double>(i) / (opts.seeds_per_axis - 1) : 0.5;
                const double v = opts.seeds_per_axis > 1 ? static_cast<double>(j) / (opts.seeds_per_axis - 1) : 0.5;
                Vector p(2);
                p << opts.r0_lo + u * (opts.r0_hi - opts.r0_lo), opts.theta1_lo + v * (opts.theta1_hi - opts.theta1_lo);
                try {
                    Vector g = F(p);
                    int it = 0;
                    for (; it < opts.max_iterations && g.norm() > opts.residual_tol; ++it) {
                        Matrix J(2, 2);
                        for (int k = 0; k < 2; ++k) {
                            Vector pp = p, pm = p;
                            pp[k] += fd;
                            pm[k] -= fd;
                            J.col(k) = (F(keep_valid(pp)) - F(keep_valid(pm))) / (pp[k] - pm[k]);
                        }
                        const Vector step = J.fullPivLu().solve(-g);
                        if (!step.allFinite()) break;
                        double lambda = 1.0;
                        bool accepted = false;
                        for (int k = 0; k < 30; ++k, lambda *= 0.5) {
                            const Vector pn = keep_valid(p + lambda * step);
                            const Vector gn = F(pn);
                            if (gn.norm() < g.norm()) {
                                p = pn;
                                g = gn;
                                accepted = true;
                                break;
                            }
                        }
                        if (!accepted) break;
                    }
                    if (!(g.cwiseAbs().maxCoeff() <= 1e-12)) continue;
                    CycleSolution s;
                    s.r0 = p[0];
                    s.theta0 = theta0_from_r0(p[0], branch);
                    s.theta1 = p[1];
                    s.branch = branch;
                    s.residuals = {g[0], g[1]};
                    s.iterations = it;
                    // Geometry of a cycle crossing x = 1 twice with the outer arc from theta0 to theta1.
                    if (!(s.r0 > 1.0 && s.theta1 > 0.0 && s.theta1 < kPi / 2 && s.theta0 < s.theta1)) continue;
                    const bool dup = std::any_of(found.begin(), found.end(), [&](const CycleSolution& o) {
                        return o.branch == s.branch && std::abs(o.r0 - s.r0) < opts.dedupe &&
                               std::abs(o.theta1 - s.theta1) < opts.dedupe;
                    });
                    if (!dup) found.push_back(s);
                } catch (const Error&) {
                    continue;
                }
            }
        }
    }
    std::sort(found.begin(), found.end(), [](const CycleSolution& a, const CycleSolution& b) { return a.r0 < b.r0; });
    return found;
}

double averaged_f_app(double r, const QuadratureSpec& spec, InnerCoefficient kind) {
    if (!(r > 0.0)) throw ConfigError("averaged_f_app needs r > 0");
    return AveragedFunction(lp_system(kind), spec)(Vector::Constant(1, r))[0];
}

double averaged_f_closed_form(double r) {
    if (r <= 1.0) return -2.0 * kPi / 5.0 * r;
    const double a = std::acos(1.0 / r);
    // The arctan term jumps by pi/5 at pi/2 and 3pi/2 inside [a, 2pi - a].
    const double inner = inner_antiderivative(kTwoPi - a) - inner_antiderivative(a) - 2.0 * kPi / 5.0;
    return r * (kOuterCoefficient * 2.0 * a + inner);
}

ClosureCheck verify_cycle_by_integration(const CycleSolution& sol, InnerCoefficient kind,
                                         const IntegratorControls& controls) {
    const PiecewiseSystem sys = lp_system(kind);
    ClosureCheck out;
    out.trajectory = integrate(sys, Vector::Constant(1, sol.r0), 1.0, sol.theta0, sol.theta0 + kTwoPi, controls);
    const double r_end = out.trajectory.final_state()[0];
    out.closure_residual = std::abs(r_end - sol.r0) / sol.r0;
    out.second_crossing = std::numeric_limits<double>::quiet_NaN();
    for (const auto& ev : out.trajectory.events) {
        if (ev.t_star > sol.theta0 + 1e-9) {
            out.second_crossing = ev.t_star;
            break;
        }
    }
    out.crossing_error = std::isnan(out.second_crossing) ? std::numeric_limits<double>::infinity()
                                                         : std::abs(out.second_crossing - sol.theta1);
    return out;
}

std::vector<DegreeResult> degree_at_cycles(const std::vector<CycleSolution>& sols, double radius) {
    std::vector<DegreeResult> out;
    for (const auto& s : sols) {
        const Vector c = (Vector(2) << s.r0, s.theta1).finished();
        double r = std::min(radius, 0.5 * (s.r0 - 1.0));
        for (int attempt = 0;; ++attempt) {
            try {
                out.push_back(degree_2d(cycle_map(s.branch), DegreeRegion::ball(c, r)));
                break;
            } catch (const BoundaryZero&) {
                if (attempt >= 20) throw;
                r *= 0.5;
            }
        }
    }
    return out;
}

double CycleCurve::r_at(double theta) const {
    const double s = theta0 + wrap_2pi(theta - theta0);
    return trajectory.state_at(s)[0];
}

CycleCurve cycle_curve(const CycleSolution& sol, int samples) {
    CycleCurve c;
    c.theta0 = sol.theta0;
    c.trajectory = verify_cycle_by_integration(sol).trajectory;
    for (int k = 0; k <= samples; ++k) {
        const double th = sol.theta0 + kTwoPi * k / samples;
        c.theta.push_back(th);
        c.r.push_back(c.trajectory.state_at(th)[0]);
    }
    for (const auto& ev : c.trajectory.events) {
        const double w = wrap_2pi(ev.t_star);
        const bool seen = std::any_of(c.crossings.begin(), c.crossings.end(), [&](double o) {
            const double d = std::abs(o - w);
            return std::min(d, kTwoPi - d) < 1e-8;
        });
        if (!seen) c.crossings.push_back(w);
    }
    std::sort(c.crossings.begin(), c.crossings.end());
    return c;
}

TopologyReport check_topology(const std::vector<CycleCurve>& curves, int grid) {
    TopologyReport rep;
    bool twice = true;
    for (const auto& c : curves) {
        rep.crossings_per_curve.push_back(static_cast<int>(c.crossings.size()));
        twice = twice && c.crossings.size() == 2;
    }
    // Curves are star-shaped about the origin, so disjointness is strict ordering of r(theta).
    std::vector<std::size_t> order(curves.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rep.nested = true;
    rep.min_gap = std::numeric_limits<double>::infinity();
    if (curves.size() > 1) {
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return curves[a].r_at(0.0) < curves[b].r_at(0.0); });
        for (int k = 0; k < grid; ++k) {
            const double th = kTwoPi * k / grid;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                const double gap = curves[order[i + 1]].r_at(th) - curves[order[i]].r_at(th);
                rep.min_gap = std::min(rep.min_gap, gap);
                if (!(gap > 0.0)) rep.nested = false;
            }
        }
    }
    rep.pass = twice && rep.nested && !curves.empty();
    return rep;
}

}  // namespace nsavg::lcapp
