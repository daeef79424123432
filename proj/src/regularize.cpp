#include "nsavg/regularize.hpp"

#include <algorithm>
#include <random>

namespace nsavg {

double phi(double u) { return std::clamp(u, -1.0, 1.0); }

double phi_delta(double u, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw BadDelta("delta must lie in (0, 1], got " + std::to_string(delta));
    return phi(u / delta);
}

Regularization::Regularization(const PiecewiseSystem& base, double delta, TransitionFn transition)
    : base_(base), delta_(delta), transition_(std::move(transition)) {
    if (!(delta > 0.0 && delta <= 1.0)) throw BadDelta("delta must lie in (0, 1], got " + std::to_string(delta));
}

double Regularization::weight(double t, const Vector& x) const { return transition_(base_.h()(t, x) / delta_); }

Vector Regularization::eval(double t, const Vector& x, double eps) const {
    const double w = weight(t, x);
    Vector v = base_.F1()(t, x, eps) + w * base_.F2()(t, x, eps);
    if (eps != 0.0) v += eps * (base_.R1()(t, x, eps) + w * base_.R2()(t, x, eps));
    return v;
}

double empirical_lipschitz_x(const Regularization& reg, double eps, int pairs, std::uint64_t seed) {
    const Box& box = reg.base().domain();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&] {
        Vector x(box.dim());
        for (int i = 0; i < box.dim(); ++i) x[i] = box.lo[i] + unit(rng) * (box.hi[i] - box.lo[i]);
        return x;
    };
    double worst = 0.0;
    for (int k = 0; k < pairs; ++k) {
        const double t = unit(rng) * reg.base().period();
        const Vector a = draw();
        const Vector b = draw();
        const double dx = (a - b).norm();
        if (dx == 0.0) continue;
        worst = std::max(worst, (reg.eval(t, a, eps) - reg.eval(t, b, eps)).norm() / dx);
    }
    return worst;
}

}  // namespace nsavg
