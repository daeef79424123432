#pragma once

// Time-periodic piecewise vector fields Z = (X, Y)_h stored in the
// perturbative sgn form
//
//   x' = eps * (F1 + sgn(h) F2) + eps^2 * (R1 + sgn(h) R2).
//
// Fields are stored with the leading eps factor removed: the branch
// field X(t, x, eps) is F1 + F2 + eps (R1 + R2), and the ODE actually
// integrated is x' = eps * X(t, x, eps) on h > 0.

#include "nsavg/core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nsavg {

using FieldFn = std::function<Vector(double t, const Vector& x, double eps)>;
using ScalarFn = std::function<double(double t, const Vector& x)>;
using GradientFn = std::function<Vector(double t, const Vector& x)>;

struct SmoothField {
    int dim = 0;
    double period = 0.0;
    FieldFn eval;

    SmoothField() = default;
    SmoothField(int n, double T, FieldFn fn);

    Vector operator()(double t, const Vector& x, double eps = 0.0) const { return eval(t, x, eps); }

    /// Identically zero field.
    static SmoothField zero(int n, double T);
};

enum class GradientMode { analytic, finite_difference };

/// Scalar switching function h with its partial derivatives.
struct SwitchingFunction {
    ScalarFn value;
    ScalarFn dt;  // partial_t h
    GradientFn dx;  // partial_x h
    GradientMode mode = GradientMode::analytic;
    double period = 0.0;
    double fd_step = 0.0;  // relative step factor when mode is finite_difference

    double operator()(double t, const Vector& x) const { return value(t, x); }

    static SwitchingFunction analytic(double T, ScalarFn h, ScalarFn h_t, GradientFn h_x);
    /// Central differences with step `rel_step * (1 + |argument|)`; the default
    /// rel_step is cbrt(machine epsilon).
    static SwitchingFunction finite_difference(double T, ScalarFn h, double rel_step = 0.0);
};

class PiecewiseSystem {
public:
    /// Builds from the sgn-form pieces. R1/R2 may be SmoothField::zero.
    PiecewiseSystem(std::string label, SmoothField F1, SmoothField F2, SmoothField R1, SmoothField R2,
                    SwitchingFunction h, Box domain);

    /// Builds from eps-free branch fields X (h > 0) and Y (h < 0); R1 = R2 = 0.
    static PiecewiseSystem from_branches(std::string label, const SmoothField& X, const SmoothField& Y,
                                         SwitchingFunction h, Box domain);

    [[nodiscard]] const std::string& label() const { return label_; }
    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] double period() const { return period_; }
    [[nodiscard]] const Box& domain() const { return domain_; }
    [[nodiscard]] const SwitchingFunction& h() const { return h_; }
    [[nodiscard]] const SmoothField& F1() const { return F1_; }
    [[nodiscard]] const SmoothField& F2() const { return F2_; }
    [[nodiscard]] const SmoothField& R1() const { return R1_; }
    [[nodiscard]] const SmoothField& R2() const { return R2_; }

    /// Branch fields with the leading eps removed.
    [[nodiscard]] Vector X(double t, const Vector& x, double eps) const;
    [[nodiscard]] Vector Y(double t, const Vector& x, double eps) const;
    [[nodiscard]] SmoothField X_field() const;
    [[nodiscard]] SmoothField Y_field() const;

    /// eps-free averaging integrand F1 + s F2 for a fixed sign s in [-1, 1].
    [[nodiscard]] Vector blended(double t, const Vector& x, double s) const;

private:
    std::string label_;
    int dim_;
    double period_;
    SmoothField F1_, F2_, R1_, R2_;
    SwitchingFunction h_;
    Box domain_;
};

/// (F1, F2) = ((X + Y) / 2, (X - Y) / 2).
std::pair<SmoothField, SmoothField> decompose(const SmoothField& X, const SmoothField& Y);
std::pair<SmoothField, SmoothField> decompose(const PiecewiseSystem& sys);

/// Default manifold tolerance 1e-12 (1 + |t| + |x|_inf).
double manifold_tolerance(double t, const Vector& x, double factor = 1e-12);

/// Z(t, x, eps): X if h > 0, Y if h < 0. Throws OnSwitchingManifold within the tolerance.
Vector evaluate_Z(const PiecewiseSystem& sys, double t, const Vector& x, double eps,
                  double tolerance_factor = 1e-12);

/// Built-in systems: "lp-planar", "time-switch-1d", "const-switch",
/// "square-1d", "linear-decay-1d".
PiecewiseSystem registry_get(const std::string& label);
std::vector<std::string> registry_labels();

}  // namespace nsavg
