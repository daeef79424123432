#include "nsavg/filippov.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nsavg {

Vector Trajectory::state_at(double s) const {
    if (pieces.empty()) return x.front();
    auto it = std::upper_bound(pieces.begin(), pieces.end(), s,
                               [](double v, const Piece& p) { return v < p.step.t0; });
    if (it == pieces.begin()) return pieces.front().step.at(pieces.front().step.t0);
    --it;
    return it->step.at(std::min(s, it->t_end));
}

namespace {

// <grad h, (1, eps V)>.
double directional(const PiecewiseSystem& sys, double t, const Vector& x, double eps, const Vector& v) {
    return sys.h().dt(t, x) + eps * sys.h().dx(t, x).dot(v);
}

struct EventSearch {
    double event_tol;
    std::function<bool(double, const Vector&)> left_region;
    // Exact side test used while bisecting; left_region when empty.
    std::function<bool(double, const Vector&)> crossed;

    // First time within the step at which left_region holds, localized by bisection on `crossed`.
    std::optional<double> operator()(const ode::DenseStep& ds) const {
        constexpr int probes = 4;
        double prev = ds.t0;
        for (int k = 1; k <= probes; ++k) {
            const double tk = (k == probes) ? ds.t1() : ds.t0 + ds.h * k / probes;
            if (left_region(tk, ds.at(tk))) {
                const auto& test = crossed ? crossed : left_region;
                double lo = prev, hi = tk;
                while (hi - lo > event_tol) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    if (test(mid, ds.at(mid))) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return hi;
            }
            prev = tk;
        }
        return std::nullopt;
    }
};

void append_segment(Trajectory& tr, std::vector<ode::DenseStep>& steps, const ode::SegmentResult& seg) {
    for (auto& st : steps) {
        const double end = std::min(st.t1(), seg.t);
        tr.t.push_back(end);
        tr.x.push_back(end == seg.t ? seg.x : st.at(end));
        tr.pieces.push_back({std::move(st), end});
    }
    steps.clear();
}

}  // namespace

double crossing_indicator(const PiecewiseSystem& sys, double t, const Vector& x, double eps) {
    return directional(sys, t, x, eps, sys.X(t, x, eps)) * directional(sys, t, x, eps, sys.Y(t, x, eps));
}

Trajectory integrate(const PiecewiseSystem& sys, const Vector& z, double eps, double t0, double t1,
                     const IntegratorControls& controls) {
    if (z.size() != sys.dim()) throw DimensionMismatch("initial condition has the wrong dimension");
    Trajectory tr;
    tr.eps = eps;
    tr.t.push_back(t0);
    tr.x.push_back(z);

    const auto& h = sys.h();
    const double event_tol = controls.event_tol_factor * sys.period();

    auto record_crossing = [&](double t, const Vector& x, double region_before) {
        const double a = directional(sys, t, x, eps, sys.X(t, x, eps));
        const double b = directional(sys, t, x, eps, sys.Y(t, x, eps));
        const double ind = a * b;
        if (!(ind > controls.transversality_tol)) {
            throw SlidingEncountered(fmt::format("sliding encountered at t={:.17g} (crossing indicator {:.3e})", t, ind));
        }
        const double new_region = sign(a);
        if (new_region == region_before) {
            throw StepFailure(fmt::format("tangential contact with the switching manifold at t={:.17g}", t));
        }
        tr.events.push_back({t, x, ind,
                             new_region > 0 ? CrossingDirection::minus_to_plus : CrossingDirection::plus_to_minus});
        return new_region;
    };

    double region;
    const double h0 = h(t0, z);
    if (std::abs(h0) > manifold_tolerance(t0, z, controls.manifold_factor)) {
        region = sign(h0);
    } else {
        region = record_crossing(t0, z, 0.0);
    }

    double t = t0;
    Vector x = z;
    std::vector<ode::DenseStep> steps;
    while (t < t1) {
        const double s = region;
        const ode::Rhs rhs = [&sys, eps, s](double tt, const Vector& xx) {
            return Vector(eps * (s > 0 ? sys.X(tt, xx, eps) : sys.Y(tt, xx, eps)));
        };
        EventSearch search{event_tol, [&](double tt, const Vector& xx) {
                               return s * h(tt, xx) < -manifold_tolerance(tt, xx, controls.manifold_factor);
                           },
                           [&](double tt, const Vector& xx) { return s * h(tt, xx) < 0.0; }};
        const auto seg = ode::integrate_segment(rhs, t, x, t1, controls.ode, std::cref(search), &steps);
        append_segment(tr, steps, seg);
        t = seg.t;
        x = seg.x;
        if (!seg.stopped) break;
        region = record_crossing(t, x, s);
    }
    return tr;
}

Trajectory integrate_regularized(const PiecewiseSystem& sys, const Vector& z, double eps, double delta, double t0,
                                 double t1, const IntegratorControls& controls) {
    if (z.size() != sys.dim()) throw DimensionMismatch("initial condition has the wrong dimension");
    const Regularization reg(sys, delta);
    Trajectory tr;
    tr.eps = eps;
    tr.delta = delta;
    tr.t.push_back(t0);
    tr.x.push_back(z);

    // Restart at the kinks h = +-delta of the ramp so no step straddles one.
    auto band = [&](double t, const Vector& x) {
        const double v = sys.h()(t, x);
        return v > delta ? 1 : (v < -delta ? -1 : 0);
    };
    const ode::Rhs rhs = [&reg, eps](double tt, const Vector& xx) { return Vector(eps * reg.eval(tt, xx, eps)); };
    const double event_tol = controls.event_tol_factor * sys.period();

    double t = t0;
    Vector x = z;
    std::vector<ode::DenseStep> steps;
    int guard = 0;
    while (t < t1) {
        const int current = band(t, x);
        EventSearch search{event_tol, [&](double tt, const Vector& xx) { return band(tt, xx) != current; }, {}};
        const auto seg = ode::integrate_segment(rhs, t, x, t1, controls.ode, std::cref(search), &steps);
        append_segment(tr, steps, seg);
        if (seg.stopped && seg.t <= t && ++guard > 100) {
            throw StepFailure(fmt::format("no progress across the regularization band at t={:.17g}", t));
        }
        t = seg.t;
        x = seg.x;
        if (!seg.stopped) break;
    }
    return tr;
}

Vector poincare(const PiecewiseSystem& sys, const Vector& z, double eps, const IntegratorControls& controls) {
    return integrate(sys, z, eps, 0.0, sys.period(), controls).final_state();
}

Vector poincare_regularized(const PiecewiseSystem& sys, const Vector& z, double eps, double delta,
                            const IntegratorControls& controls) {
    return integrate_regularized(sys, z, eps, delta, 0.0, sys.period(), controls).final_state();
}

std::vector<ExpansionRow> check_poincare_expansion(const PiecewiseSystem& sys, const Vector& z,
                                                   const std::vector<double>& eps_list, double delta,
                                                   const IntegratorControls& controls, const QuadratureSpec& spec) {
    const Vector fd = AveragedFunction::regularized(sys, delta, spec)(z);
    std::vector<ExpansionRow> rows;
    for (double eps : eps_list) {
        if (!(eps > 0.0)) throw ConfigError("Poincare expansion needs eps > 0");
        const Vector P = poincare_regularized(sys, z, eps, delta, controls);
        rows.push_back({eps, ((P - z) / eps - fd).cwiseAbs().maxCoeff()});
    }
    return rows;
}

// -- hypotheses --------------------------------------------------------------

namespace {

struct SigmaPoint {
    double t;
    Vector x;
};

std::vector<Vector> grid_nodes(const Box& box, int grid, int skip_axis = -1) {
    const int n = box.dim();
    std::vector<Vector> nodes;
    std::vector<int> idx(n, 0);
    for (;;) {
        Vector p(n);
        for (int i = 0; i < n; ++i) {
            p[i] = (i == skip_axis) ? box.lo[i] : box.lo[i] + (box.hi[i] - box.lo[i]) * idx[i] / (grid - 1);
        }
        nodes.push_back(p);
        int k = 0;
        while (k < n) {
            if (k == skip_axis) {
                ++k;
                continue;
            }
            if (++idx[k] < grid) break;
            idx[k++] = 0;
        }
        if (k == n) break;
    }
    return nodes;
}

std::vector<SigmaPoint> sample_sigma(const PiecewiseSystem& sys, const Box& box, int grid, const HypothesisOptions& opts) {
    grid = std::max(grid, 2);
    QuadratureSpec q;
    q.check_scan = false;
    q.scan_points = 128;
    const double T = sys.period();
    const auto& h = sys.h();
    std::vector<SigmaPoint> pts;

    auto fallback_line = [&](const std::function<SigmaPoint(double)>& at, int samples) {
        for (int k = 0; k < samples; ++k) {
            SigmaPoint p = at(static_cast<double>(k) / samples);
            if (std::abs(h(p.t, p.x)) <= 1e-12 * (1.0 + std::abs(p.t) + p.x.cwiseAbs().maxCoeff())) {
                pts.push_back(std::move(p));
            }
        }
    };

    // Lines along t through every grid node.
    for (const Vector& x : grid_nodes(box, grid)) {
        try {
            for (double t : isolate_zeros([&](double s) { return h(s, x); }, 0.0, T, q, true)) pts.push_back({t, x});
        } catch (const NonIsolatedZeros&) {
            fallback_line([&](double u) { return SigmaPoint{u * T, x}; }, 64);
        }
    }
    // Lines along each x axis at sampled times.
    for (int axis = 0; axis < box.dim(); ++axis) {
        for (int m = 0; m < opts.time_lines; ++m) {
            const double t = T * m / opts.time_lines;
            for (const Vector& base : grid_nodes(box, grid, axis)) {
                auto at = [&](double s) {
                    Vector p = base;
                    p[axis] = s;
                    return p;
                };
                try {
                    for (double s : isolate_zeros([&](double u) { return h(t, at(u)); }, box.lo[axis], box.hi[axis],
                                                  q, false)) {
                        pts.push_back({t, at(s)});
                    }
                } catch (const NonIsolatedZeros&) {
                    fallback_line(
                        [&](double u) {
                            return SigmaPoint{t, at(box.lo[axis] + u * (box.hi[axis] - box.lo[axis]))};
                        },
                        64);
                }
            }
        }
    }
    return pts;
}

void finalize(HypothesisReport& rep, std::vector<Witness>& all, int max_witnesses) {
    rep.sigma_points = static_cast<int>(all.size());
    std::sort(all.begin(), all.end(), [](const Witness& a, const Witness& b) { return a.margin < b.margin; });
    rep.min_margin = all.empty() ? std::numeric_limits<double>::infinity() : all.front().margin;
    rep.witnesses.assign(all.begin(), all.begin() + std::min<std::size_t>(all.size(), max_witnesses));
}

std::string describe_grid(const Box& box, int grid, const HypothesisOptions& opts) {
    return fmt::format("{} nodes per axis on a {}-dimensional box, t-lines at every node, x-lines at {} times", grid,
                       box.dim(), opts.time_lines);
}

}  // namespace

HypothesisReport validate_hypothesis_ii(const PiecewiseSystem& sys, const Box& box, int grid,
                                        const HypothesisOptions& opts) {
    HypothesisReport rep;
    rep.mode = HypothesisMode::ii;
    rep.grid = describe_grid(box, grid, opts);
    std::vector<Witness> all;
    for (const auto& p : sample_sigma(sys, box, grid, opts)) {
        all.push_back({p.t, p.x, std::abs(sys.h().dt(p.t, p.x))});
    }
    finalize(rep, all, opts.max_witnesses);
    rep.pass = rep.min_margin > opts.margin_tol;
    return rep;
}

double ii_prime_lhs(const PiecewiseSystem& sys, double t, const Vector& x, double eps) {
    const Vector gx = sys.h().dx(t, x);
    const double p1 = gx.dot(sys.F1()(t, x, 0.0));
    const double p2 = gx.dot(sys.F2()(t, x, 0.0));
    return sys.h().dt(t, x) * p1 + eps * (p1 * p1 - p2 * p2) / 2.0;
}

HypothesisReport validate_hypothesis_ii_prime(const PiecewiseSystem& sys, const Box& box, int grid, double eps,
                                              double xi_floor, const HypothesisOptions& opts) {
    if (!(eps > 0.0)) throw ConfigError("hypothesis (ii') needs eps > 0");
    HypothesisReport rep;
    rep.mode = HypothesisMode::ii_prime;
    rep.grid = describe_grid(box, grid, opts);
    std::vector<Witness> all;
    for (const auto& p : sample_sigma(sys, box, grid, opts)) {
        const double dt = std::abs(sys.h().dt(p.t, p.x));
        if (dt < opts.degeneracy_tol) {
            ++rep.degenerate_points;
            all.push_back({p.t, p.x, ii_prime_lhs(sys, p.t, p.x, eps) / eps - xi_floor});
        } else {
            all.push_back({p.t, p.x, dt});
        }
    }
    finalize(rep, all, opts.max_witnesses);
    rep.pass = rep.min_margin > 0.0;
    return rep;
}

// -- periodic orbits -----------------------------------------------------------

CycleCertificate find_periodic(const PiecewiseSystem& sys, const ZeroCandidate& zero, double eps, CertifyMode mode,
                               const ShootingOptions& opts) {
    if (!zero.degree) throw ConfigError("averaged zero has no degree; run the degree stage first");
    if (*zero.degree == 0) throw DegreeZero("Brouwer degree of f at the zero is 0; refusing to certify");
    if (eps == 0.0) throw ConfigError("eps must be nonzero");
    if (mode == CertifyMode::positive_only && eps < 0.0) throw ConfigError("positive_only mode needs eps > 0");

    const Box& box = sys.domain();
    auto G = [&](const Vector& z) { return Vector(poincare(sys, z, eps, opts.integrator) - z); };
    const double fd_step = std::max(1e-7, std::abs(eps) * 1e-3);
    const int n = sys.dim();

    Vector z = zero.a;
    Vector g = G(z);
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const double gn = g.cwiseAbs().maxCoeff();
        if (gn <= opts.residual_tol) break;
        Matrix J(n, n);
        for (int j = 0; j < n; ++j) {
            Vector zp = z, zm = z;
            zp[j] += fd_step;
            zm[j] -= fd_step;
            J.col(j) = (G(zp) - G(zm)) / (2.0 * fd_step);
        }
        const Vector step = J.fullPivLu().solve(-g);
        if (!step.allFinite()) throw NoConvergence("singular shooting Jacobian");
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k <= opts.max_halvings; ++k, lambda *= 0.5) {
            const Vector zn = box.clip(z + lambda * step);
            const Vector gnew = G(zn);
            if (gnew.cwiseAbs().maxCoeff() < gn) {
                z = zn;
                g = gnew;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    const double residual = g.cwiseAbs().maxCoeff();
    if (residual > opts.accept_tol) {
        throw NoConvergence(fmt::format("shooting residual {:.3e} after {} iterations at eps = {}", residual, it, eps));
    }
    CycleCertificate c;
    c.a = zero.a;
    c.degree = *zero.degree;
    c.eps = eps;
    c.z_eps = z;
    c.fixed_point_residual = residual;
    c.distance = (z - zero.a).norm();
    c.iterations = it;
    return c;
}

std::vector<CycleCertificate> certify_sweep(const PiecewiseSystem& sys, const ZeroCandidate& zero,
                                            const std::vector<double>& eps_list, CertifyMode mode,
                                            const ShootingOptions& opts) {
    std::vector<CycleCertificate> out;
    for (double eps : eps_list) {
        out.push_back(find_periodic(sys, zero, eps, mode, opts));
        if (mode == CertifyMode::two_sided) out.push_back(find_periodic(sys, zero, -eps, mode, opts));
    }
    return out;
}

bool distances_decreasing(const std::vector<CycleCertificate>& certs, double eps_sign) {
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& c : certs) {
        if (sign(c.eps) != sign(eps_sign)) continue;
        if (!(c.distance < prev)) return false;
        prev = c.distance;
    }
    return true;
}

// -- pipeline -------------------------------------------------------------------

PipelineReport run_pipeline(const PiecewiseSystem& sys, const PipelineOptions& opts) {
    PipelineReport rep;
    const Box& box = sys.domain();
    if (opts.mode == CertifyMode::two_sided) {
        rep.hypothesis = validate_hypothesis_ii(sys, box, opts.hypothesis_grid);
    } else {
        double eps_min = std::numeric_limits<double>::infinity();
        for (double e : opts.eps_sweep) {
            if (e > 0.0) eps_min = std::min(eps_min, e);
        }
        if (!std::isfinite(eps_min)) throw ConfigError("positive mode needs a positive eps in the sweep");
        rep.hypothesis = validate_hypothesis_ii_prime(sys, box, opts.hypothesis_grid, eps_min, opts.xi_floor);
    }
    if (!rep.hypothesis.pass) {
        rep.status = PipelineStatus::hypothesis_violation;
        rep.message = fmt::format("crossing hypothesis {} violated: min margin {:.3e}",
                                  opts.mode == CertifyMode::two_sided ? "(ii)" : "(ii')", rep.hypothesis.min_margin);
        return rep;
    }

    const AveragedFunction av(sys, opts.quadrature);
    const VectorMap f = av.as_map();
    try {
        rep.seeds = scan_zeros(f, box, opts.scan_grid, opts.zeros);
    } catch (const Error& e) {
        rep.status = e.category() == ErrorCategory::hypothesis ? PipelineStatus::hypothesis_violation
                                                                : PipelineStatus::numerical_failure;
        rep.message = std::string("zero scan: ") + e.what();
        return rep;
    }

    bool hypothesis_failure = false, numerical_failure = false;
    for (const Vector& seed : rep.seeds) {
        CertifiedZero cz;
        try {
            cz.zero = refine_zero(f, seed, box, opts.zeros);
            const bool duplicate = std::any_of(rep.zeros.begin(), rep.zeros.end(), [&](const CertifiedZero& o) {
                return o.zero.a.size() && (o.zero.a - cz.zero.a).norm() < 1e-6;
            });
            if (duplicate) continue;
            const double r = cz.zero.isolation_radius;
            if (!(r > 0.0)) throw BoundaryZero("no isolating neighbourhood found around the zero");
            const DegreeRegion region = sys.dim() == 1 ? DegreeRegion::interval(cz.zero.a[0] - r, cz.zero.a[0] + r)
                                                       : DegreeRegion::ball(cz.zero.a, r);
            cz.degree = degree(f, region);
            cz.zero.degree = cz.degree->value;
            cz.certificates = certify_sweep(sys, cz.zero, opts.eps_sweep, opts.mode, opts.shooting);
            const bool monotone = distances_decreasing(cz.certificates, 1.0) &&
                                  (opts.mode == CertifyMode::positive_only || distances_decreasing(cz.certificates, -1.0));
            if (!monotone) {
                cz.failure = "|z_eps - a| is not strictly decreasing along the eps sweep";
                numerical_failure = true;
            }
        } catch (const Error& e) {
            cz.failure = e.what();
            cz.certificates.clear();
            (e.category() == ErrorCategory::hypothesis ? hypothesis_failure : numerical_failure) = true;
        }
        rep.zeros.push_back(std::move(cz));
    }
    if (hypothesis_failure) {
        rep.status = PipelineStatus::hypothesis_violation;
        rep.message = "at least one averaged zero failed a hypothesis";
    } else if (numerical_failure) {
        rep.status = PipelineStatus::numerical_failure;
        rep.message = "at least one averaged zero could not be certified";
    } else {
        rep.message = fmt::format("{} zero(s) certified", rep.zeros.size());
    }
    return rep;
}

}  // namespace nsavg
