#pragma once

// Shared vocabulary: vector type, domain boxes, and the error hierarchy.

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace nsavg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A map R^n -> R^m given pointwise.
using VectorMap = std::function<Vector(const Vector&)>;

/// Broad failure classes; the CLI maps each to an exit code.
enum class ErrorCategory {
    config,      // malformed input, unknown names, bad parameters
    hypothesis,  // a hypothesis of the averaging result is falsified (sliding, non-isolated zeros, zero degree)
    numerical,   // a numerical method failed to reach its tolerance
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}
    [[nodiscard]] ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

#define NSAVG_DEFINE_ERROR(Name, Category)                                  \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& what)                              \
            : Error(ErrorCategory::Category, std::string(#Name ": ") + what) {} \
    }

NSAVG_DEFINE_ERROR(DimensionMismatch, config);
NSAVG_DEFINE_ERROR(UnknownLabel, config);
NSAVG_DEFINE_ERROR(BadDelta, config);
NSAVG_DEFINE_ERROR(ConfigError, config);
NSAVG_DEFINE_ERROR(OnSwitchingManifold, numerical);
NSAVG_DEFINE_ERROR(NonIsolatedZeros, hypothesis);
NSAVG_DEFINE_ERROR(MaxDepthExceeded, numerical);
NSAVG_DEFINE_ERROR(NoConvergence, numerical);
NSAVG_DEFINE_ERROR(JacobianSingular, numerical);
NSAVG_DEFINE_ERROR(BoundaryZero, numerical);
NSAVG_DEFINE_ERROR(RefinementExhausted, numerical);
NSAVG_DEFINE_ERROR(SlidingEncountered, hypothesis);
NSAVG_DEFINE_ERROR(StepFailure, numerical);
NSAVG_DEFINE_ERROR(DegreeZero, hypothesis);
NSAVG_DEFINE_ERROR(HypothesisViolation, hypothesis);

#undef NSAVG_DEFINE_ERROR

/// Axis-aligned box [lo, hi] in R^n.
struct Box {
    Vector lo;
    Vector hi;

    Box() = default;
    Box(Vector lower, Vector upper);
    static Box interval(double a, double b);

    [[nodiscard]] int dim() const { return static_cast<int>(lo.size()); }
    [[nodiscard]] Vector center() const { return 0.5 * (lo + hi); }
    [[nodiscard]] Vector width() const { return hi - lo; }
    [[nodiscard]] bool contains(const Vector& x) const;
    [[nodiscard]] Vector clip(const Vector& x) const;
};

inline double sign(double u) { return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0); }

}  // namespace nsavg
