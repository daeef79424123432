#pragma once

// Averaged function f(z) = int_0^T F1 + sgn(h) F2 dt, its phi-regularized
// counterpart f_delta, and zero search over the domain box.

#include "nsavg/quadrature.hpp"

#include <optional>
#include <vector>

namespace nsavg {

enum class AveragingMode { discontinuous, regularized };

class AveragedFunction {
public:
    explicit AveragedFunction(PiecewiseSystem sys, QuadratureSpec spec = {});
    static AveragedFunction regularized(PiecewiseSystem sys, double delta, QuadratureSpec spec = {});

    [[nodiscard]] Vector operator()(const Vector& z) const { return eval(z).value; }
    [[nodiscard]] PiecewiseIntegral eval(const Vector& z) const;

    [[nodiscard]] const PiecewiseSystem& system() const { return sys_; }
    [[nodiscard]] const QuadratureSpec& spec() const { return spec_; }
    [[nodiscard]] AveragingMode mode() const { return mode_; }
    [[nodiscard]] double delta() const { return delta_; }

    [[nodiscard]] VectorMap as_map() const;

private:
    PiecewiseSystem sys_;
    QuadratureSpec spec_;
    AveragingMode mode_ = AveragingMode::discontinuous;
    double delta_ = 0.0;
};

Vector eval_f(const AveragedFunction& av, const Vector& z);

struct ZeroCandidate {
    Vector a;
    double residual_norm = 0.0;
    double isolation_radius = 0.0;
    std::optional<int> degree;      // filled by the degree module
    bool jacobian_singular = false;  // warning: Newton ran into a singular Jacobian
    int iterations = 0;
};

struct ZeroSearchOptions {
    double zero_tol = 1e-10;   // |f| <= zero_tol * (1 + |f(seed)|)
    double step_tol = 1e-12;
    int max_iterations = 100;
    int max_halvings = 20;
    double seed_tol = 1e-8;      // scan: a node with |f| below this seeds directly
    double isolation_start = 0.05;  // initial isolation radius as a fraction of the smallest box width
    int isolation_shrinks = 20;
};

/// Cells of a uniform grid (grid_per_axis cells per axis) on which every
/// component of f brackets zero at the corners are flagged; each flagged cell
/// with the smallest corner residual among its flagged neighbours seeds at its centre.
std::vector<Vector> scan_zeros(const VectorMap& f, const Box& box, int grid_per_axis,
                               const ZeroSearchOptions& opts = {});
std::vector<Vector> scan_zeros(const AveragedFunction& av, int grid_per_axis, const ZeroSearchOptions& opts = {});

/// Damped Newton with a central-difference Jacobian, steps clipped to the box.
ZeroCandidate refine_zero(const VectorMap& f, const Vector& seed, const Box& box, const ZeroSearchOptions& opts = {});
ZeroCandidate refine_zero(const AveragedFunction& av, const Vector& seed, const ZeroSearchOptions& opts = {});

/// Points on the sphere |z - center| = radius used as the boundary sample of U:
/// 2 points in 1D, 64 in 2D, 2n*32 otherwise.
std::vector<Vector> sphere_samples(const Vector& center, double radius);

/// Largest radius r = r0 / 2^k with f nonzero on the sampled sphere of radius r.
double isolation_radius(const VectorMap& f, const Vector& a, double r0, double tol, int shrinks);

/// Central-difference Jacobian with step cbrt(eps) (1 + |z_j|).
Matrix fd_jacobian(const VectorMap& f, const Vector& z, const Vector& fz, double rel_step = 0.0);

struct DeltaDiscrepancy {
    double delta;
    double discrepancy;  // |f_delta(z) - f(z)|_inf, 0 when below the quadrature noise floor
    double raw;          // the same without the noise floor
    double noise_floor;  // combined quadrature error estimate
};

std::vector<DeltaDiscrepancy> check_fdelta_convergence(const PiecewiseSystem& sys, const Vector& z,
                                                       const std::vector<double>& deltas, const QuadratureSpec& spec = {});

/// Nonincreasing with 10% slack: d[k+1] <= 1.1 d[k].
bool is_nonincreasing(const std::vector<DeltaDiscrepancy>& table, double slack = 0.1);

struct ContinuityRow {
    double radius;
    double modulus;  // max |f(z) - f(z0)| over the sampled sphere
};

std::vector<ContinuityRow> check_continuity(const VectorMap& f, const Vector& z0, const std::vector<double>& radii);

}  // namespace nsavg
