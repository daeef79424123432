#include "nsavg/systems.hpp"

#include "nsavg/lcapp.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace nsavg {

namespace {

void probe(const SmoothField& field, const char* name, int n, const Vector& at) {
    const Vector v = field(0.0, at, 0.0);
    if (v.size() != n) {
        throw DimensionMismatch(std::string(name) + " returns a vector of length " + std::to_string(v.size()) +
                                ", expected " + std::to_string(n));
    }
    if (!v.allFinite()) {
        throw ConfigError(std::string(name) + " is not finite at the domain center");
    }
}

}  // namespace

SmoothField::SmoothField(int n, double T, FieldFn fn) : dim(n), period(T), eval(std::move(fn)) {
    if (n <= 0) throw ConfigError("field dimension must be positive");
    if (!(T > 0.0)) throw ConfigError("field period must be positive");
}

SmoothField SmoothField::zero(int n, double T) {
    return SmoothField(n, T, [n](double, const Vector&, double) { return Vector(Vector::Zero(n)); });
}

SwitchingFunction SwitchingFunction::analytic(double T, ScalarFn h, ScalarFn h_t, GradientFn h_x) {
    SwitchingFunction s;
    s.value = std::move(h);
    s.dt = std::move(h_t);
    s.dx = std::move(h_x);
    s.mode = GradientMode::analytic;
    s.period = T;
    return s;
}

SwitchingFunction SwitchingFunction::finite_difference(double T, ScalarFn h, double rel_step) {
    if (rel_step <= 0.0) rel_step = std::cbrt(std::numeric_limits<double>::epsilon());
    SwitchingFunction s;
    s.value = h;
    s.mode = GradientMode::finite_difference;
    s.period = T;
    s.fd_step = rel_step;
    s.dt = [h, rel_step](double t, const Vector& x) {
        const double step = rel_step * (1.0 + std::abs(t));
        return (h(t + step, x) - h(t - step, x)) / (2.0 * step);
    };
    s.dx = [h, rel_step](double t, const Vector& x) {
        Vector g(x.size());
        Vector xp = x;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double step = rel_step * (1.0 + std::abs(x[i]));
            xp[i] = x[i] + step;
            const double fp = h(t, xp);
            xp[i] = x[i] - step;
            const double fm = h(t, xp);
            xp[i] = x[i];
            g[i] = (fp - fm) / (2.0 * step);
        }
        return g;
    };
    return s;
}

PiecewiseSystem::PiecewiseSystem(std::string label, SmoothField F1, SmoothField F2, SmoothField R1,
                                 SmoothField R2, SwitchingFunction h, Box domain)
    : label_(std::move(label)),
      dim_(F1.dim),
      period_(F1.period),
      F1_(std::move(F1)),
      F2_(std::move(F2)),
      R1_(std::move(R1)),
      R2_(std::move(R2)),
      h_(std::move(h)),
      domain_(std::move(domain)) {
    for (const SmoothField* f : {&F2_, &R1_, &R2_}) {
        if (f->dim != dim_) throw DimensionMismatch("field dimensions differ in system " + label_);
        if (std::abs(f->period - period_) > 1e-14 * period_) {
            throw ConfigError("field periods differ in system " + label_);
        }
    }
    if (std::abs(h_.period - period_) > 1e-14 * period_) {
        throw ConfigError("switching function period differs in system " + label_);
    }
    if (domain_.dim() != dim_) throw DimensionMismatch("domain box dimension differs in system " + label_);
    if (!h_.value || !h_.dt || !h_.dx) throw ConfigError("switching function incomplete in system " + label_);
    const Vector c = domain_.center();
    probe(F1_, "F1", dim_, c);
    probe(F2_, "F2", dim_, c);
    probe(R1_, "R1", dim_, c);
    probe(R2_, "R2", dim_, c);
}

PiecewiseSystem PiecewiseSystem::from_branches(std::string label, const SmoothField& X, const SmoothField& Y,
                                               SwitchingFunction h, Box domain) {
    auto [F1, F2] = decompose(X, Y);
    const int n = X.dim;
    const double T = X.period;
    return PiecewiseSystem(std::move(label), std::move(F1), std::move(F2), SmoothField::zero(n, T),
                           SmoothField::zero(n, T), std::move(h), std::move(domain));
}

Vector PiecewiseSystem::X(double t, const Vector& x, double eps) const {
    Vector v = F1_(t, x, eps) + F2_(t, x, eps);
    if (eps != 0.0) v += eps * (R1_(t, x, eps) + R2_(t, x, eps));
    return v;
}

Vector PiecewiseSystem::Y(double t, const Vector& x, double eps) const {
    Vector v = F1_(t, x, eps) - F2_(t, x, eps);
    if (eps != 0.0) v += eps * (R1_(t, x, eps) - R2_(t, x, eps));
    return v;
}

SmoothField PiecewiseSystem::X_field() const {
    return SmoothField(dim_, period_, [F1 = F1_, F2 = F2_, R1 = R1_, R2 = R2_](double t, const Vector& x, double eps) {
        Vector v = F1(t, x, eps) + F2(t, x, eps);
        if (eps != 0.0) v += eps * (R1(t, x, eps) + R2(t, x, eps));
        return v;
    });
}

SmoothField PiecewiseSystem::Y_field() const {
    return SmoothField(dim_, period_, [F1 = F1_, F2 = F2_, R1 = R1_, R2 = R2_](double t, const Vector& x, double eps) {
        Vector v = F1(t, x, eps) - F2(t, x, eps);
        if (eps != 0.0) v += eps * (R1(t, x, eps) - R2(t, x, eps));
        return v;
    });
}

Vector PiecewiseSystem::blended(double t, const Vector& x, double s) const {
    return F1_(t, x, 0.0) + s * F2_(t, x, 0.0);
}

std::pair<SmoothField, SmoothField> decompose(const SmoothField& X, const SmoothField& Y) {
    if (X.dim != Y.dim) {
        throw DimensionMismatch("X has dimension " + std::to_string(X.dim) + ", Y has " + std::to_string(Y.dim));
    }
    if (std::abs(X.period - Y.period) > 1e-14 * X.period) throw ConfigError("X and Y have different periods");
    auto xe = X.eval;
    auto ye = Y.eval;
    SmoothField F1(X.dim, X.period, [xe, ye](double t, const Vector& x, double eps) {
        return Vector(0.5 * (xe(t, x, eps) + ye(t, x, eps)));
    });
    SmoothField F2(X.dim, X.period, [xe, ye](double t, const Vector& x, double eps) {
        return Vector(0.5 * (xe(t, x, eps) - ye(t, x, eps)));
    });
    return {std::move(F1), std::move(F2)};
}

std::pair<SmoothField, SmoothField> decompose(const PiecewiseSystem& sys) {
    return decompose(sys.X_field(), sys.Y_field());
}

double manifold_tolerance(double t, const Vector& x, double factor) {
    return factor * (1.0 + std::abs(t) + (x.size() ? x.cwiseAbs().maxCoeff() : 0.0));
}

Vector evaluate_Z(const PiecewiseSystem& sys, double t, const Vector& x, double eps, double tolerance_factor) {
    const double hv = sys.h()(t, x);
    if (std::abs(hv) <= manifold_tolerance(t, x, tolerance_factor)) {
        throw OnSwitchingManifold("h(t, x) = " + std::to_string(hv) + " at t = " + std::to_string(t));
    }
    return hv > 0.0 ? sys.X(t, x, eps) : sys.Y(t, x, eps);
}

namespace {

Vector constant(double c) {
    Vector v(1);
    v << c;
    return v;
}

PiecewiseSystem time_switch_1d() {
    constexpr double T = 2.0 * std::numbers::pi;
    SmoothField F1(1, T, [](double, const Vector& x, double) { return Vector(-x); });
    SmoothField F2(1, T, [](double, const Vector&, double) { return constant(1.0); });
    auto h = SwitchingFunction::analytic(
        T, [](double t, const Vector&) { return std::cos(t); },
        [](double t, const Vector&) { return -std::sin(t); },
        [](double, const Vector&) { return constant(0.0); });
    return PiecewiseSystem("time-switch-1d", F1, F2, SmoothField::zero(1, T), SmoothField::zero(1, T), h,
                           Box::interval(-1.0, 1.0));
}

PiecewiseSystem const_switch() {
    constexpr double T = 2.0 * std::numbers::pi;
    SmoothField X(1, T, [](double, const Vector&, double) { return constant(-1.0); });
    SmoothField Y(1, T, [](double, const Vector&, double) { return constant(1.0); });
    auto h = SwitchingFunction::analytic(
        T, [](double, const Vector& x) { return x[0]; }, [](double, const Vector&) { return 0.0; },
        [](double, const Vector&) { return constant(1.0); });
    return PiecewiseSystem::from_branches("const-switch", X, Y, h, Box::interval(-1.0, 1.0));
}

// F1 = x^2, F2 = 0: averaged function 2 pi z^2 with a degenerate zero at 0.
PiecewiseSystem square_1d() {
    constexpr double T = 2.0 * std::numbers::pi;
    SmoothField F1(1, T, [](double, const Vector& x, double) { return constant(x[0] * x[0]); });
    auto h = SwitchingFunction::analytic(
        T, [](double t, const Vector&) { return std::cos(t); },
        [](double t, const Vector&) { return -std::sin(t); },
        [](double, const Vector&) { return constant(0.0); });
    return PiecewiseSystem("square-1d", F1, SmoothField::zero(1, T), SmoothField::zero(1, T),
                           SmoothField::zero(1, T), h, Box::interval(-1.0, 1.0));
}

// F1 = -x, F2 = 0: the smooth reference case, P(z) = z exp(-eps T).
PiecewiseSystem linear_decay_1d() {
    constexpr double T = 2.0 * std::numbers::pi;
    SmoothField F1(1, T, [](double, const Vector& x, double) { return Vector(-x); });
    auto h = SwitchingFunction::analytic(
        T, [](double t, const Vector&) { return std::cos(t); },
        [](double t, const Vector&) { return -std::sin(t); },
        [](double, const Vector&) { return constant(0.0); });
    return PiecewiseSystem("linear-decay-1d", F1, SmoothField::zero(1, T), SmoothField::zero(1, T),
                           SmoothField::zero(1, T), h, Box::interval(-1.0, 1.0));
}

}  // namespace

std::vector<std::string> registry_labels() {
    return {"lp-planar", "time-switch-1d", "const-switch", "square-1d", "linear-decay-1d"};
}

PiecewiseSystem registry_get(const std::string& label) {
    if (label == "lp-planar") return lcapp::lp_system();
    if (label == "time-switch-1d") return time_switch_1d();
    if (label == "const-switch") return const_switch();
    if (label == "square-1d") return square_1d();
    if (label == "linear-decay-1d") return linear_decay_1d();
    throw UnknownLabel("no built-in system named '" + label + "'");
}

}  // namespace nsavg
