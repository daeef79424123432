#pragma once

// The planar discontinuous piecewise-linear system in polar form
//
//   dr/dtheta = eps * g(theta) * r,  g = 19/50 on r cos(theta) >= 1 and the
//   inner coefficient on r cos(theta) < 1,
//
// its limit-cycle equations in (r0, theta1), and independent checks of the
// three cycles by full-turn integration and by the winding number.

#include "nsavg/degree.hpp"
#include "nsavg/filippov.hpp"

#include <array>
#include <vector>

namespace nsavg::lcapp {

inline constexpr double kOuterCoefficient = 19.0 / 50.0;

/// rational: (2300 cos 2t - 4623 sin 2t - 300) / (5377 - 4623 cos 2t - 2300 sin 2t),
/// the exact derivative of the closed-form antiderivative used by the cycle equations.
/// constant_denominator: the same numerator over the constant 1500 (does not close the cycles).
enum class InnerCoefficient { rational, constant_denominator };

double inner_coefficient(double theta, InnerCoefficient kind = InnerCoefficient::rational);

/// State r in a 1-dimensional box [0.5, 1.5], time theta, period 2 pi, h = r cos(theta) - 1.
PiecewiseSystem lp_system(InnerCoefficient kind = InnerCoefficient::rational);

enum class Branch { negative_theta0, positive_theta0 };

std::string to_string(Branch b);

/// +-arccos(1/r0) by branch; 0 at r0 = 1. Throws ConfigError for r0 < 1.
double theta0_from_r0(double r0, Branch branch);

/// (1/5) atan(sec(t) (23 cos t - 100 sin t) / 15); DomainError where sec is undefined.
double arctan_term(double theta);
/// (1/2) log |4623 cos 2t + 2300 sin 2t - 5377|.
double log_term(double theta);
/// arctan_term - log_term: an antiderivative of the rational inner coefficient between
/// consecutive odd multiples of pi/2.
double inner_antiderivative(double theta);

/// res1 = exp(19 (t1 - t0) / 50) r0 cos t1 - 1,
/// res2 = 19 (t1 - t0) / 50 + A(t0) - A(t1) - L(t0) + L(t1) - 2 pi / 5.
std::array<double, 2> cycle_residuals(double r0, double theta1, Branch branch);

/// (r0, theta1) -> (res1, res2).
VectorMap cycle_map(Branch branch);

struct CycleSolution {
    double r0 = 0.0;
    double theta0 = 0.0;
    double theta1 = 0.0;
    Branch branch = Branch::negative_theta0;
    std::array<double, 2> residuals{};
    int iterations = 0;
};

struct SolveOptions {
    int seeds_per_axis = 12;
    double r0_lo = 1.001, r0_hi = 1.3;
    double theta1_lo = 0.1, theta1_hi = 1.2;
    double residual_tol = 1e-13;
    double dedupe = 1e-6;
    int max_iterations = 60;
};

/// Damped Newton from every grid seed on both branches; deduplicated, sorted by r0.
std::vector<CycleSolution> solve_cycles(const SolveOptions& opts = {});

/// f(r) = int_0^{2 pi} F(theta, r) / eps dtheta by split quadrature.
double averaged_f_app(double r, const QuadratureSpec& spec = {}, InnerCoefficient kind = InnerCoefficient::rational);
/// Closed form of averaged_f_app from the antiderivative pieces (r >= 1).
double averaged_f_closed_form(double r);

struct ClosureCheck {
    double closure_residual = 0.0;     // |r(theta0 + 2 pi) - r0| / r0
    double second_crossing = 0.0;      // angle of the crossing after theta0
    double crossing_error = 0.0;       // |second_crossing - theta1|
    Trajectory trajectory;
};

/// Integrates one full turn from (theta0, r0) with eps = 1.
ClosureCheck verify_cycle_by_integration(const CycleSolution& sol,
                                         InnerCoefficient kind = InnerCoefficient::rational,
                                         const IntegratorControls& controls = {});

/// Winding number of cycle_map around each solution on a small circle (halved on BoundaryZero).
std::vector<DegreeResult> degree_at_cycles(const std::vector<CycleSolution>& sols, double radius = 1e-3);

struct CycleCurve {
    double theta0 = 0.0;
    Trajectory trajectory;          // one turn from (theta0, r0)
    std::vector<double> theta;      // uniform samples over [theta0, theta0 + 2 pi]
    std::vector<double> r;
    std::vector<double> crossings;  // distinct x = 1 crossing angles modulo 2 pi, in [0, 2 pi)

    /// r at any angle, reduced into the integrated turn.
    [[nodiscard]] double r_at(double theta) const;
};

CycleCurve cycle_curve(const CycleSolution& sol, int samples = 720);

struct TopologyReport {
    std::vector<int> crossings_per_curve;
    bool nested = false;  // r_i(theta) strictly ordered on a common grid
    double min_gap = 0.0;
    bool pass = false;
};

/// Every curve crosses x = 1 exactly twice and the curves do not intersect.
TopologyReport check_topology(const std::vector<CycleCurve>& curves, int grid = 2048);

}  // namespace nsavg::lcapp
