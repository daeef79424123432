#pragma once

#include "nsavg/systems.hpp"

#include <cmath>
#include <numbers>

namespace nsavg::testing {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

using Scalar1 = std::function<double(double t, double x)>;

/// 1-dimensional system from scalar F1, F2 and h(t, x) with analytic partials.
inline PiecewiseSystem system_1d(const std::string& label, Scalar1 f1, Scalar1 f2, Scalar1 h, Scalar1 h_t,
                                 Scalar1 h_x, double lo = -1.0, double hi = 1.0, double T = kTwoPi) {
    auto wrap = [](Scalar1 g) {
        return [g](double t, const Vector& x, double) { return Vector(Vector::Constant(1, g(t, x[0]))); };
    };
    auto sw = SwitchingFunction::analytic(
        T, [h](double t, const Vector& x) { return h(t, x[0]); },
        [h_t](double t, const Vector& x) { return h_t(t, x[0]); },
        [h_x](double t, const Vector& x) { return Vector(Vector::Constant(1, h_x(t, x[0]))); });
    return PiecewiseSystem(label, SmoothField(1, T, wrap(f1)), SmoothField(1, T, wrap(f2)), SmoothField::zero(1, T),
                           SmoothField::zero(1, T), sw, Box::interval(lo, hi));
}

/// h = cos t switching with the given F1, F2.
inline PiecewiseSystem cos_switched(const std::string& label, Scalar1 f1, Scalar1 f2) {
    return system_1d(
        label, std::move(f1), std::move(f2), [](double t, double) { return std::cos(t); },
        [](double t, double) { return -std::sin(t); }, [](double, double) { return 0.0; });
}

}  // namespace nsavg::testing
