#pragma once

// Dormand-Prince 5(4) with the 4th-order continuous extension.

#include "nsavg/core.hpp"

#include <optional>
#include <vector>

namespace nsavg::ode {

using Rhs = std::function<Vector(double t, const Vector& x)>;

struct Controls {
    double rtol = 1e-12;
    double atol = 1e-14;
    double h_init = 0.0;    // 0: chosen from the initial slope
    double max_step = 0.0;  // 0: span / 64
    long max_steps = 2'000'000;
};

/// Dense output on one accepted step [t0, t0 + h].
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    Vector r1, r2, r3, r4, r5;

    [[nodiscard]] double t1() const { return t0 + h; }
    [[nodiscard]] Vector at(double t) const;
};

/// Called after every accepted step. Returning a time inside the step stops
/// integration there (the state is taken from the dense output).
using StepMonitor = std::function<std::optional<double>(const DenseStep&)>;

struct SegmentResult {
    double t = 0.0;
    Vector x;
    bool stopped = false;
    long steps = 0;
    long rejected = 0;
};

/// Integrates x' = rhs(t, x) from (t0, x0) to t1 (t1 > t0). Throws StepFailure
/// when the step size underflows or max_steps is exceeded.
SegmentResult integrate_segment(const Rhs& rhs, double t0, const Vector& x0, double t1, const Controls& controls,
                                const StepMonitor& monitor = {}, std::vector<DenseStep>* record = nullptr);

}  // namespace nsavg::ode
