#pragma once

// phi-regularization of a piecewise system: sgn(h) is replaced by the
// continuous ramp phi(h / delta).

#include "nsavg/systems.hpp"

#include <cstdint>
#include <vector>

namespace nsavg {

/// Piecewise-linear transition function: clamp(u, -1, 1).
double phi(double u);

/// phi(u / delta); throws BadDelta unless delta is in (0, 1].
double phi_delta(double u, double delta);

using TransitionFn = std::function<double(double)>;

/// Default delta sweep for convergence studies.
inline const std::vector<double> kDefaultDeltaSweep{1e-1, 1e-2, 1e-3, 1e-4};

class Regularization {
public:
    Regularization(const PiecewiseSystem& base, double delta, TransitionFn transition = phi);

    [[nodiscard]] double delta() const { return delta_; }
    [[nodiscard]] const PiecewiseSystem& base() const { return base_; }

    /// phi(h(t, x) / delta).
    [[nodiscard]] double weight(double t, const Vector& x) const;

    /// F1 + w F2 + eps (R1 + w R2), w = phi_delta(h(t, x)); continuous across Sigma.
    [[nodiscard]] Vector eval(double t, const Vector& x, double eps) const;

private:
    PiecewiseSystem base_;
    double delta_;
    TransitionFn transition_;
};

/// Largest observed |Z_delta(t, x) - Z_delta(t, y)| / |x - y| over random
/// pairs in the domain box (uniform t in [0, T]). Reported, not bounded.
double empirical_lipschitz_x(const Regularization& reg, double eps, int pairs, std::uint64_t seed = 1);

}  // namespace nsavg
