#include "nsavg/averaging.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace nsavg {

AveragedFunction::AveragedFunction(PiecewiseSystem sys, QuadratureSpec spec)
    : sys_(std::move(sys)), spec_(spec) {
    spec_.validate();
}

AveragedFunction AveragedFunction::regularized(PiecewiseSystem sys, double delta, QuadratureSpec spec) {
    if (!(delta > 0.0 && delta <= 1.0)) throw BadDelta("delta must lie in (0, 1], got " + std::to_string(delta));
    AveragedFunction av(std::move(sys), spec);
    av.mode_ = AveragingMode::regularized;
    av.delta_ = delta;
    return av;
}

PiecewiseIntegral AveragedFunction::eval(const Vector& z) const {
    if (mode_ == AveragingMode::regularized) return integrate_regularized(sys_, z, delta_, spec_);
    return integrate_piecewise(sys_, z, spec_);
}

VectorMap AveragedFunction::as_map() const {
    return [self = *this](const Vector& z) { return self(z); };
}

Vector eval_f(const AveragedFunction& av, const Vector& z) { return av(z); }

namespace {

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Enumerates the multi-indices of an n-dimensional grid with `count` points per axis.
std::vector<std::vector<int>> multi_indices(int n, int count) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(n, 0);
    for (;;) {
        out.push_back(idx);
        int k = 0;
        while (k < n && ++idx[k] == count) idx[k++] = 0;
        if (k == n) break;
    }
    return out;
}

std::size_t flatten(const std::vector<int>& idx, int count) {
    std::size_t f = 0;
    for (int k = static_cast<int>(idx.size()) - 1; k >= 0; --k) f = f * count + idx[k];
    return f;
}

}  // namespace

std::vector<Vector> scan_zeros(const VectorMap& f, const Box& box, int grid_per_axis, const ZeroSearchOptions& opts) {
    if (grid_per_axis < 1) throw ConfigError("grid_per_axis must be positive");
    const int n = box.dim();
    const int nodes_per_axis = grid_per_axis + 1;
    const Vector step = box.width() / grid_per_axis;

    const auto node_idx = multi_indices(n, nodes_per_axis);
    std::vector<Vector> values(node_idx.size());
    double scale = 0.0;
    for (std::size_t k = 0; k < node_idx.size(); ++k) {
        Vector z = box.lo;
        for (int i = 0; i < n; ++i) z[i] += node_idx[k][i] * step[i];
        values[flatten(node_idx[k], nodes_per_axis)] = f(z);
        scale = std::max(scale, inf_norm(values[flatten(node_idx[k], nodes_per_axis)]));
    }
    const double seed_tol = opts.seed_tol * (1.0 + scale);

    const auto cell_idx = multi_indices(n, grid_per_axis);
    const auto corner_offsets = multi_indices(n, 2);
    std::vector<char> flagged(cell_idx.size(), 0);
    std::vector<double> score(cell_idx.size(), std::numeric_limits<double>::infinity());
    for (const auto& cell : cell_idx) {
        Vector lo = Vector::Constant(values[0].size(), std::numeric_limits<double>::infinity());
        Vector hi = -lo;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& off : corner_offsets) {
            std::vector<int> node(n);
            for (int i = 0; i < n; ++i) node[i] = cell[i] + off[i];
            const Vector& v = values[flatten(node, nodes_per_axis)];
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
            best = std::min(best, inf_norm(v));
        }
        const bool brackets = (lo.array() <= 0.0).all() && (hi.array() >= 0.0).all();
        const std::size_t id = flatten(cell, grid_per_axis);
        score[id] = best;
        if (brackets || best < seed_tol) flagged[id] = 1;
    }

    // One seed per flagged cell whose corner residual is a strict local minimum among flagged
    // neighbours (ties go to the lower index), so a long flagged band still yields every zero.
    const auto neighbour_offsets = multi_indices(n, 3);
    std::vector<Vector> seeds;
    for (const auto& cell : cell_idx) {
        const std::size_t id = flatten(cell, grid_per_axis);
        if (!flagged[id]) continue;
        bool minimum = true;
        for (const auto& off : neighbour_offsets) {
            std::vector<int> nb(n);
            bool inside = true;
            for (int i = 0; i < n; ++i) {
                nb[i] = cell[i] + off[i] - 1;
                inside = inside && nb[i] >= 0 && nb[i] < grid_per_axis;
            }
            if (!inside) continue;
            const std::size_t nid = flatten(nb, grid_per_axis);
            if (nid == id || !flagged[nid]) continue;
            if (score[nid] < score[id] || (score[nid] == score[id] && nid < id)) {
                minimum = false;
                break;
            }
        }
        if (!minimum) continue;
        Vector c(n);
        for (int i = 0; i < n; ++i) c[i] = box.lo[i] + (cell[i] + 0.5) * step[i];
        seeds.push_back(c);
    }
    return seeds;
}

std::vector<Vector> scan_zeros(const AveragedFunction& av, int grid_per_axis, const ZeroSearchOptions& opts) {
    return scan_zeros(av.as_map(), av.system().domain(), grid_per_axis, opts);
}

Matrix fd_jacobian(const VectorMap& f, const Vector& z, const Vector& fz, double rel_step) {
    if (rel_step <= 0.0) rel_step = std::cbrt(std::numeric_limits<double>::epsilon());
    Matrix J(fz.size(), z.size());
    Vector zp = z;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        const double h = rel_step * (1.0 + std::abs(z[j]));
        zp[j] = z[j] + h;
        const Vector fp = f(zp);
        zp[j] = z[j] - h;
        const Vector fm = f(zp);
        zp[j] = z[j];
        J.col(j) = (fp - fm) / (2.0 * h);
    }
    return J;
}

std::vector<Vector> sphere_samples(const Vector& center, double radius) {
    const int n = static_cast<int>(center.size());
    std::vector<Vector> out;
    if (n == 1) {
        out.push_back(center.array() - radius);
        out.push_back(center.array() + radius);
        return out;
    }
    if (n == 2) {
        constexpr int count = 64;
        for (int k = 0; k < count; ++k) {
            const double a = 2.0 * std::numbers::pi * k / count;
            Vector p = center;
            p[0] += radius * std::cos(a);
            p[1] += radius * std::sin(a);
            out.push_back(std::move(p));
        }
        return out;
    }
    for (int i = 0; i < n; ++i) {
        for (double s : {-1.0, 1.0}) {
            Vector p = center;
            p[i] += s * radius;
            out.push_back(std::move(p));
        }
    }
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal;
    while (static_cast<int>(out.size()) < 2 * n * 32) {
        Vector d(n);
        for (int i = 0; i < n; ++i) d[i] = normal(rng);
        if (d.norm() == 0.0) continue;
        out.push_back(center + radius * d.normalized());
    }
    return out;
}

double isolation_radius(const VectorMap& f, const Vector& a, double r0, double tol, int shrinks) {
    double r = r0;
    for (int k = 0; k <= shrinks; ++k, r *= 0.5) {
        bool clear = true;
        for (const Vector& p : sphere_samples(a, r)) {
            // A sample where f cannot be evaluated does not certify isolation.
            double v = 0.0;
            try {
                v = inf_norm(f(p));
            } catch (const Error&) {
                v = 0.0;
            }
            if (!(v > tol)) {
                clear = false;
                break;
            }
        }
        if (clear) return r;
    }
    return 0.0;
}

namespace {

// 1D fallback when the derivative vanishes: bracket on a fine grid, then bisect.
std::optional<Vector> bisection_fallback(const VectorMap& f, const Vector& z, const Box& box) {
    constexpr int samples = 256;
    const double lo = box.lo[0], hi = box.hi[0];
    double best_dist = std::numeric_limits<double>::infinity();
    std::optional<std::pair<double, double>> bracket;
    Vector p(1);
    p[0] = lo;
    double prev_t = lo, prev_v = f(p)[0];
    for (int k = 1; k <= samples; ++k) {
        const double t = lo + (hi - lo) * k / samples;
        p[0] = t;
        const double v = f(p)[0];
        if ((v > 0.0) != (prev_v > 0.0) || v == 0.0) {
            const double d = std::abs(0.5 * (t + prev_t) - z[0]);
            if (d < best_dist) {
                best_dist = d;
                bracket = {prev_t, t};
            }
        }
        prev_t = t;
        prev_v = v;
    }
    if (!bracket) return std::nullopt;
    double a = bracket->first, b = bracket->second;
    p[0] = a;
    double fa = f(p)[0];
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        p[0] = m;
        const double fm = f(p)[0];
        if (fm == 0.0) {
            a = b = m;
            break;
        }
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Vector out(1);
    out[0] = 0.5 * (a + b);
    return out;
}

}  // namespace

ZeroCandidate refine_zero(const VectorMap& f, const Vector& seed, const Box& box, const ZeroSearchOptions& opts) {
    if (!box.contains(seed)) throw ConfigError("seed lies outside the domain box");
    ZeroCandidate out;
    Vector z = seed;
    Vector fz = f(z);
    const double tol = opts.zero_tol * (1.0 + inf_norm(fz));
    double last_step = std::numeric_limits<double>::infinity();

    auto finish = [&](int iterations) {
        out.a = z;
        out.residual_norm = inf_norm(fz);
        out.iterations = iterations;
        // A degenerate zero is flagged even when Newton stops before the Jacobian underflows.
        if (!out.jacobian_singular) {
            Eigen::JacobiSVD<Matrix> final_svd(fd_jacobian(f, z, fz));
            const auto& s = final_svd.singularValues();
            out.jacobian_singular = s.minCoeff() <= 1e-8 * std::max(1.0, s.maxCoeff());
        }
        const double r0 = opts.isolation_start * box.width().minCoeff();
        out.isolation_radius = isolation_radius(f, z, r0, tol, opts.isolation_shrinks);
        return out;
    };

    for (int it = 0; it < opts.max_iterations; ++it) {
        const double fnorm = inf_norm(fz);
        if (fnorm == 0.0 || (fnorm <= tol && last_step < opts.step_tol)) return finish(it);

        const Matrix J = fd_jacobian(f, z, fz);
        Eigen::JacobiSVD<Matrix> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const bool singular = sv.minCoeff() <= 1e-12 * std::max(1.0, sv.maxCoeff());
        if (singular) {
            out.jacobian_singular = true;
            if (fnorm <= tol) return finish(it);
            if (z.size() == 1) {
                if (auto root = bisection_fallback(f, z, box)) {
                    z = *root;
                    fz = f(z);
                    return finish(it);
                }
            }
            throw JacobianSingular(fmt::format("Jacobian singular at iteration {} with |f| = {:.3e}", it, fnorm));
        }
        const Vector step = svd.solve(-fz);

        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k <= opts.max_halvings; ++k, lambda *= 0.5) {
            const Vector zn = box.clip(z + lambda * step);
            const Vector fn = f(zn);
            if (inf_norm(fn) < fnorm) {
                last_step = (zn - z).cwiseAbs().maxCoeff();
                z = zn;
                fz = fn;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (fnorm <= tol) return finish(it);
            throw NoConvergence(fmt::format("damped Newton stalled after {} iterations with |f| = {:.3e}", it, fnorm));
        }
    }
    if (inf_norm(fz) <= tol) return finish(opts.max_iterations);
    throw NoConvergence(fmt::format("no convergence in {} iterations", opts.max_iterations));
}

ZeroCandidate refine_zero(const AveragedFunction& av, const Vector& seed, const ZeroSearchOptions& opts) {
    return refine_zero(av.as_map(), seed, av.system().domain(), opts);
}

std::vector<DeltaDiscrepancy> check_fdelta_convergence(const PiecewiseSystem& sys, const Vector& z,
                                                       const std::vector<double>& deltas, const QuadratureSpec& spec) {
    const PiecewiseIntegral f = integrate_piecewise(sys, z, spec);
    std::vector<DeltaDiscrepancy> table;
    for (double d : deltas) {
        const PiecewiseIntegral fd = integrate_regularized(sys, z, d, spec);
        const double raw = inf_norm(fd.value - f.value);
        const double floor = f.error_estimate + fd.error_estimate + spec.abs_tol;
        table.push_back({d, raw <= floor ? 0.0 : raw, raw, floor});
    }
    return table;
}

bool is_nonincreasing(const std::vector<DeltaDiscrepancy>& table, double slack) {
    for (std::size_t k = 1; k < table.size(); ++k) {
        if (table[k].discrepancy > (1.0 + slack) * table[k - 1].discrepancy) return false;
    }
    return true;
}

std::vector<ContinuityRow> check_continuity(const VectorMap& f, const Vector& z0, const std::vector<double>& radii) {
    const Vector f0 = f(z0);
    std::vector<ContinuityRow> rows;
    for (double r : radii) {
        double worst = 0.0;
        for (const Vector& p : sphere_samples(z0, r)) worst = std::max(worst, inf_norm(f(p) - f0));
        rows.push_back({r, worst});
    }
    return rows;
}

}  // namespace nsavg
