#pragma once

// Brouwer degree d(f, V, 0) of a continuous map on a bounded region:
// sign change in 1D, boundary winding number in 2D, and the sign of the
// Jacobian determinant at a regular isolated zero in any dimension.

#include "nsavg/core.hpp"

#include <string>
#include <vector>

namespace nsavg {

enum class DegreeMethod { sign_change_1d, winding_2d, jacobian_sign_nd };

std::string to_string(DegreeMethod m);

struct DegreeRegion {
    enum class Kind { interval, ball, box };
    Kind kind = Kind::ball;
    Vector center;   // ball
    double radius = 0.0;
    Vector lo, hi;   // interval (1D) and box
    int boundary_samples = 512;

    static DegreeRegion interval(double a, double b);
    static DegreeRegion ball(Vector center, double radius, int samples = 512);
    static DegreeRegion box(Vector lo, Vector hi, int samples = 512);

    [[nodiscard]] int dim() const;
    /// Boundary point at arc parameter s in [0, 1) (2D regions only).
    [[nodiscard]] Vector boundary_point(double s) const;
};

struct DegreeResult {
    int value = 0;
    DegreeMethod method = DegreeMethod::sign_change_1d;
    double min_boundary_norm = 0.0;
    int refinement_depth = 0;
};

struct DegreeOptions {
    double boundary_tol = 1e-10;  // |f| <= boundary_tol * (1 + max |f| on the boundary) counts as a zero
    int max_depth = 30;
    double max_residue = 0.1;
    double singular_tol = 1e-10;  // sigma_min / sigma_max below this is singular
};

DegreeResult degree_1d(const VectorMap& f, double a, double b, const DegreeOptions& opts = {});
DegreeResult degree_2d(const VectorMap& f, const DegreeRegion& region, const DegreeOptions& opts = {});
/// Sign of det J_f(a) by central differences with step scaled to `radius`.
/// Throws SingularJacobian when the Jacobian is numerically rank deficient.
DegreeResult degree_jacobian_sign(const VectorMap& f, const Vector& a, double radius, const DegreeOptions& opts = {});

/// Dispatch by dimension: 1D interval, 2D winding, nD Jacobian sign at the region center.
DegreeResult degree(const VectorMap& f, const DegreeRegion& region, const DegreeOptions& opts = {});

class SingularJacobian : public Error {
public:
    explicit SingularJacobian(const std::string& what)
        : Error(ErrorCategory::numerical, "SingularJacobian: " + what) {}
};

struct AxiomCheck {
    std::string name;
    int expected = 0;
    int actual = 0;
    bool pass = false;
    std::string detail;
};

struct AxiomReport {
    std::vector<AxiomCheck> checks;
    [[nodiscard]] bool all_pass() const;
};

/// Normalization, additivity and homotopy invariance on built-in map families.
AxiomReport axiom_suite();

}  // namespace nsavg
