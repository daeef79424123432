#include "nsavg/degree.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nsavg {

std::string to_string(DegreeMethod m) {
    switch (m) {
        case DegreeMethod::sign_change_1d: return "sign-change-1d";
        case DegreeMethod::winding_2d: return "winding-2d";
        case DegreeMethod::jacobian_sign_nd: return "jacobian-sign-nd";
    }
    return "unknown";
}

DegreeRegion DegreeRegion::interval(double a, double b) {
    if (!(a < b)) throw ConfigError("degree interval must satisfy a < b");
    DegreeRegion r;
    r.kind = Kind::interval;
    r.lo = Vector::Constant(1, a);
    r.hi = Vector::Constant(1, b);
    r.center = Vector::Constant(1, 0.5 * (a + b));
    r.radius = 0.5 * (b - a);
    r.boundary_samples = 2;
    return r;
}

DegreeRegion DegreeRegion::ball(Vector center, double radius, int samples) {
    if (!(radius > 0.0)) throw ConfigError("degree ball radius must be positive");
    if (samples < 8) throw ConfigError("boundary_samples must be at least 8");
    DegreeRegion r;
    r.kind = Kind::ball;
    r.center = std::move(center);
    r.radius = radius;
    r.boundary_samples = samples;
    return r;
}

DegreeRegion DegreeRegion::box(Vector lo, Vector hi, int samples) {
    const Box checked(lo, hi);
    if (samples < 8) throw ConfigError("boundary_samples must be at least 8");
    DegreeRegion r;
    r.kind = Kind::box;
    r.lo = checked.lo;
    r.hi = checked.hi;
    r.center = checked.center();
    r.radius = 0.5 * checked.width().minCoeff();
    r.boundary_samples = samples;
    return r;
}

int DegreeRegion::dim() const {
    return static_cast<int>(kind == Kind::ball ? center.size() : lo.size());
}

Vector DegreeRegion::boundary_point(double s) const {
    if (kind == Kind::ball) {
        const double a = 2.0 * std::numbers::pi * s;
        Vector p = center;
        p[0] += radius * std::cos(a);
        p[1] += radius * std::sin(a);
        return p;
    }
    // Counterclockwise rectangle, parametrized by arc length.
    const double w = hi[0] - lo[0], h = hi[1] - lo[1];
    double d = s * 2.0 * (w + h);
    Vector p(2);
    if (d < w) {
        p << lo[0] + d, lo[1];
    } else if ((d -= w) < h) {
        p << hi[0], lo[1] + d;
    } else if ((d -= h) < w) {
        p << hi[0] - d, hi[1];
    } else {
        d -= w;
        p << lo[0], hi[1] - d;
    }
    return p;
}

DegreeResult degree_1d(const VectorMap& f, double a, double b, const DegreeOptions& opts) {
    Vector p(1);
    p[0] = a;
    const double fa = f(p)[0];
    p[0] = b;
    const double fb = f(p)[0];
    const double tol = opts.boundary_tol * (1.0 + std::max(std::abs(fa), std::abs(fb)));
    if (std::abs(fa) <= tol || std::abs(fb) <= tol) {
        throw BoundaryZero(fmt::format("f vanishes at an interval endpoint (f(a) = {:.3e}, f(b) = {:.3e})", fa, fb));
    }
    DegreeResult r;
    r.value = static_cast<int>((sign(fb) - sign(fa)) / 2.0);
    r.method = DegreeMethod::sign_change_1d;
    r.min_boundary_norm = std::min(std::abs(fa), std::abs(fb));
    return r;
}

namespace {

double wrap_angle(double d) {
    while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
    while (d <= -std::numbers::pi) d += 2.0 * std::numbers::pi;
    return d;
}

struct Winding {
    const VectorMap& f;
    const DegreeRegion& region;
    const DegreeOptions& opts;
    double tol = 0.0;
    double min_norm = std::numeric_limits<double>::infinity();
    int depth_reached = 0;

    Vector sample(double s) {
        const Vector v = f(region.boundary_point(s));
        const double n = v.norm();
        if (n <= tol) {
            throw BoundaryZero(fmt::format("|f| = {:.3e} on the boundary at parameter {:.6f}", n, s));
        }
        min_norm = std::min(min_norm, n);
        return v;
    }

    double accumulate(double sa, const Vector& fa, double sb, const Vector& fb, int depth) {
        const double d = wrap_angle(std::atan2(fb[1], fb[0]) - std::atan2(fa[1], fa[0]));
        if (std::abs(d) < 0.5 * std::numbers::pi) return d;
        if (depth >= opts.max_depth) {
            throw RefinementExhausted(fmt::format("angle increment {:.3f} unresolved at depth {}", d, depth));
        }
        depth_reached = std::max(depth_reached, depth + 1);
        const double sm = 0.5 * (sa + sb);
        const Vector fm = sample(sm);
        return accumulate(sa, fa, sm, fm, depth + 1) + accumulate(sm, fm, sb, fb, depth + 1);
    }
};

}  // namespace

DegreeResult degree_2d(const VectorMap& f, const DegreeRegion& region, const DegreeOptions& opts) {
    if (region.dim() != 2) throw DimensionMismatch("winding degree needs a 2D region");
    const int n = region.boundary_samples;
    std::vector<Vector> values(n);
    double scale = 0.0;
    for (int k = 0; k < n; ++k) {
        values[k] = f(region.boundary_point(static_cast<double>(k) / n));
        if (values[k].size() != 2) throw DimensionMismatch("winding degree needs a map into R^2");
        scale = std::max(scale, values[k].norm());
    }
    Winding w{f, region, opts};
    w.tol = opts.boundary_tol * (1.0 + scale);
    for (const Vector& v : values) {
        if (v.norm() <= w.tol) throw BoundaryZero(fmt::format("|f| = {:.3e} on a boundary sample", v.norm()));
        w.min_norm = std::min(w.min_norm, v.norm());
    }
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        const int next = (k + 1) % n;
        total += w.accumulate(static_cast<double>(k) / n, values[k], static_cast<double>(k + 1) / n, values[next], 0);
    }
    const double turns = total / (2.0 * std::numbers::pi);
    const double rounded = std::round(turns);
    if (std::abs(turns - rounded) >= opts.max_residue) {
        throw RefinementExhausted(fmt::format("winding {:.6f} is not close to an integer", turns));
    }
    DegreeResult r;
    r.value = static_cast<int>(rounded);
    r.method = DegreeMethod::winding_2d;
    r.min_boundary_norm = w.min_norm;
    r.refinement_depth = w.depth_reached;
    return r;
}

DegreeResult degree_jacobian_sign(const VectorMap& f, const Vector& a, double radius, const DegreeOptions& opts) {
    const Vector fa = f(a);
    const Eigen::Index n = a.size();
    if (fa.size() != n) throw DimensionMismatch("Jacobian-sign degree needs a map R^n -> R^n");
    Matrix J(n, n);
    Vector zp = a;
    const double base = std::cbrt(std::numeric_limits<double>::epsilon());
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = std::min(base * (1.0 + std::abs(a[j])), 0.25 * radius);
        zp[j] = a[j] + h;
        const Vector fp = f(zp);
        zp[j] = a[j] - h;
        const Vector fm = f(zp);
        zp[j] = a[j];
        J.col(j) = (fp - fm) / (2.0 * h);
    }
    Eigen::JacobiSVD<Matrix> svd(J);
    const auto& sv = svd.singularValues();
    if (sv.maxCoeff() == 0.0 || sv.minCoeff() <= opts.singular_tol * sv.maxCoeff()) {
        throw SingularJacobian(fmt::format("condition estimate {:.3e} at the zero", sv.minCoeff() / sv.maxCoeff()));
    }
    DegreeResult r;
    r.value = J.determinant() > 0.0 ? 1 : -1;
    r.method = DegreeMethod::jacobian_sign_nd;
    r.min_boundary_norm = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (double s : {-1.0, 1.0}) {
            zp = a;
            zp[i] += s * radius;
            r.min_boundary_norm = std::min(r.min_boundary_norm, f(zp).norm());
        }
    }
    return r;
}

DegreeResult degree(const VectorMap& f, const DegreeRegion& region, const DegreeOptions& opts) {
    const int n = region.dim();
    if (n == 1) {
        const double a = region.kind == DegreeRegion::Kind::ball ? region.center[0] - region.radius : region.lo[0];
        const double b = region.kind == DegreeRegion::Kind::ball ? region.center[0] + region.radius : region.hi[0];
        return degree_1d(f, a, b, opts);
    }
    if (n == 2) return degree_2d(f, region, opts);
    return degree_jacobian_sign(f, region.center, region.radius, opts);
}

bool AxiomReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.pass; });
}

namespace {

Vector point2(double x, double y) {
    Vector p(2);
    p << x, y;
    return p;
}

AxiomCheck run_check(const std::string& name, int expected, const std::function<int(std::string&)>& body) {
    AxiomCheck c{name, expected, 0, false, ""};
    try {
        c.actual = body(c.detail);
        c.pass = c.actual == expected;
    } catch (const Error& e) {
        c.detail = e.what();
    }
    return c;
}

}  // namespace

AxiomReport axiom_suite() {
    AxiomReport report;
    const VectorMap identity = [](const Vector& z) { return z; };

    report.checks.push_back(run_check("normalization: identity on [-1, 1]", 1, [&](std::string&) {
        return degree_1d(identity, -1.0, 1.0).value;
    }));
    report.checks.push_back(run_check("normalization: identity on ball of radius 3", 1, [&](std::string&) {
        return degree_2d(identity, DegreeRegion::ball(point2(0, 0), 3.0)).value;
    }));
    report.checks.push_back(run_check("winding: (x^2 - y^2, 2xy) on unit circle", 2, [&](std::string&) {
        const VectorMap sq = [](const Vector& z) { return point2(z[0] * z[0] - z[1] * z[1], 2 * z[0] * z[1]); };
        return degree_2d(sq, DegreeRegion::ball(point2(0, 0), 1.0)).value;
    }));
    report.checks.push_back(run_check("constant map (1, 0) on unit circle", 0, [&](std::string&) {
        const VectorMap c = [](const Vector&) { return point2(1.0, 0.0); };
        return degree_2d(c, DegreeRegion::ball(point2(0, 0), 1.0)).value;
    }));

    report.checks.push_back(run_check("additivity: (x^2 - 1, y) on [-2, 2]^2", 0, [&](std::string& detail) {
        const VectorMap f = [](const Vector& z) { return point2(z[0] * z[0] - 1.0, z[1]); };
        const int whole = degree_2d(f, DegreeRegion::box(point2(-2, -2), point2(2, 2))).value;
        const int left = degree_2d(f, DegreeRegion::ball(point2(-1, 0), 0.5)).value;
        const int right = degree_2d(f, DegreeRegion::ball(point2(1, 0), 0.5)).value;
        // 0 must not be attained on the closed box minus the two balls.
        double min_outside = std::numeric_limits<double>::infinity();
        constexpr int grid = 80;
        for (int i = 0; i <= grid; ++i) {
            for (int j = 0; j <= grid; ++j) {
                const Vector z = point2(-2.0 + 4.0 * i / grid, -2.0 + 4.0 * j / grid);
                if ((z - point2(-1, 0)).norm() < 0.5 || (z - point2(1, 0)).norm() < 0.5) continue;
                min_outside = std::min(min_outside, f(z).norm());
            }
        }
        detail = fmt::format("d(V) = {}, d(V1) = {}, d(V2) = {}, min |f| off V1 and V2 = {:.3e}", whole, left, right,
                             min_outside);
        // Jacobian signs at (-1, 0) and (1, 0) are -1 and +1.
        if (!(min_outside > 0.0) || whole != left + right || left != -1 || right != 1) return whole + 1000;
        return whole;
    }));

    report.checks.push_back(run_check("homotopy: z + s (0.25, 0) on unit disk, s in [0, 1]", 1, [&](std::string& detail) {
        int common = 0;
        double min_norm = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 20; ++k) {
            const double s = k / 20.0;
            const VectorMap fs = [s](const Vector& z) { return Vector(z + point2(0.25 * s, 0.0)); };
            const DegreeResult r = degree_2d(fs, DegreeRegion::ball(point2(0, 0), 1.0));
            min_norm = std::min(min_norm, r.min_boundary_norm);
            if (k == 0) common = r.value;
            if (r.value != common) {
                detail = fmt::format("degree changed to {} at s = {}", r.value, s);
                return r.value;
            }
        }
        detail = fmt::format("min boundary norm along the homotopy {:.3e}", min_norm);
        return common;
    }));
    return report;
}

}  // namespace nsavg
