#pragma once

// Discontinuity-aware integration over one period: the zeros of
// t -> h(t, z) are isolated first, then F1 +- F2 is integrated on each
// smooth subinterval with adaptive Gauss-Kronrod (7, 15) panels.

#include "nsavg/systems.hpp"

#include <vector>

namespace nsavg {

struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_depth = 40;
    int scan_points = 256;
    double refinement_tol = 1e-12;     // |h| accepted as zero: refinement_tol * (1 + max |h| on scan)
    double isolation_factor = 1e-9;    // zeros closer than isolation_factor * T are merged
    bool check_scan = true;            // rescan with 2x points and flag a count mismatch
    int max_panels = 20000;

    void validate() const;
};

struct SwitchTimes {
    Vector z;
    std::vector<double> times;
    double refinement_tol = 0.0;
    bool scan_too_coarse = false;  // advisory: doubling scan_points changed the count
};

/// Ordered isolated zeros of a scalar function of t on [a, b].
/// Throws NonIsolatedZeros if |g| is below tolerance on 3 consecutive scan points.
std::vector<double> isolate_zeros(const std::function<double(double)>& g, double a, double b,
                                  const QuadratureSpec& spec, bool periodic, bool* too_coarse = nullptr);

SwitchTimes isolate_switch_times(const SwitchingFunction& h, const Vector& z, const QuadratureSpec& spec = {});

struct IntegralResult {
    Vector value;
    double error_estimate = 0.0;
    int panels = 0;
};

/// Globally adaptive GK(7,15) integral of a smooth vector integrand on [a, b].
/// Throws MaxDepthExceeded (with the partial estimate in the message) when a
/// panel would be bisected beyond max_depth.
IntegralResult integrate_adaptive(const std::function<Vector(double)>& g, double a, double b,
                                  const QuadratureSpec& spec = {});

struct PiecewiseIntegral {
    Vector value;
    double error_estimate = 0.0;
    SwitchTimes switches;
    std::vector<double> breakpoints;  // 0, the switch times, T
};

/// Integral over [0, T] of F1(t, z) + sgn(h(t, z)) F2(t, z).
PiecewiseIntegral integrate_piecewise(const PiecewiseSystem& sys, const Vector& z, const QuadratureSpec& spec = {});

/// Integral over [0, T] of F1(t, z) + phi(h(t, z) / delta) F2(t, z), split at h = +-delta.
PiecewiseIntegral integrate_regularized(const PiecewiseSystem& sys, const Vector& z, double delta,
                                        const QuadratureSpec& spec = {});

}  // namespace nsavg
