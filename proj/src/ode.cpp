#include "nsavg/ode.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nsavg::ode {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double error_norm(const Vector& err, const Vector& y0, const Vector& y1, const Controls& c) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = c.atol + c.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double q = err[i] / sc;
        acc += q * q;
    }
    return std::sqrt(acc / std::max<Eigen::Index>(1, err.size()));
}

double initial_step(const Rhs& rhs, double t0, const Vector& x0, const Vector& f0, double span, const Controls& c) {
    Vector sc = (c.atol + c.rtol * x0.cwiseAbs().array()).matrix();
    const double d0 = (x0.cwiseQuotient(sc)).norm() / std::sqrt(static_cast<double>(x0.size()));
    const double d1n = (f0.cwiseQuotient(sc)).norm() / std::sqrt(static_cast<double>(x0.size()));
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, span);
    const Vector x1 = x0 + h0 * f0;
    const Vector f1 = rhs(t0 + h0, x1);
    const double d2 = ((f1 - f0).cwiseQuotient(sc)).norm() / std::sqrt(static_cast<double>(x0.size())) / h0;
    const double dm = std::max(d1n, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
    return std::min({100.0 * h0, h1, span});
}

}  // namespace

Vector DenseStep::at(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
}

SegmentResult integrate_segment(const Rhs& rhs, double t0, const Vector& x0, double t1, const Controls& controls,
                                const StepMonitor& monitor, std::vector<DenseStep>* record) {
    SegmentResult out;
    out.t = t0;
    out.x = x0;
    const double span = t1 - t0;
    if (!(span > 0.0)) return out;

    const double max_step = controls.max_step > 0.0 ? controls.max_step : span / 64.0;
    double t = t0;
    Vector y = x0;
    Vector k1 = rhs(t, y);
    double h = controls.h_init > 0.0 ? controls.h_init : initial_step(rhs, t, y, k1, span, controls);
    // The slope estimate collapses for states near 0 with atol-dominated scales; rejections shrink the seed anyway.
    h = std::min(std::max(h, 1e-6 * span), max_step);
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t0), std::abs(t1));

    bool last = false;
    while (!last) {
        if (out.steps + out.rejected >= controls.max_steps) {
            throw StepFailure(fmt::format("exceeded {} steps at t = {:.17g}", controls.max_steps, t));
        }
        if (t + h >= t1 || t1 - (t + h) < h_min) {
            h = t1 - t;
            last = true;
        }
        if (h < h_min && !last) throw StepFailure(fmt::format("step size underflow at t = {:.17g}", t));

        const Vector k2 = rhs(t + c2 * h, y + h * (a21 * k1));
        const Vector k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const Vector k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vector ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const double tnew = last ? t1 : t + h;
        const Vector k7 = rhs(tnew, ynew);
        const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double en = error_norm(err, y, ynew, controls);
        if (!std::isfinite(en)) {
            throw StepFailure(fmt::format("non-finite state near t = {:.17g}", t));
        }
        if (en > 1.0) {
            ++out.rejected;
            last = false;
            h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
            continue;
        }

        DenseStep ds;
        ds.t0 = t;
        ds.h = tnew - t;
        ds.r1 = y;
        ds.r2 = ynew - y;
        ds.r3 = h * k1 - ds.r2;
        ds.r4 = ds.r2 - h * k7 - ds.r3;
        ds.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        ++out.steps;

        if (monitor) {
            if (auto stop = monitor(ds)) {
                const double ts = std::clamp(*stop, ds.t0, ds.t1());
                if (record) {
                    DenseStep cut = ds;
                    record->push_back(std::move(cut));
                }
                out.t = ts;
                out.x = ts == ds.t1() ? ynew : ds.at(ts);
                out.stopped = true;
                return out;
            }
        }
        if (record) record->push_back(ds);

        t = tnew;
        y = ynew;
        k1 = k7;
        const double fac = en == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2)));
        h = std::min(max_step, h * fac);
    }
    out.t = t1;
    out.x = y;
    return out;
}

}  // namespace nsavg::ode
