#include "nsavg/quadrature.hpp"

#include "nsavg/regularize.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

namespace nsavg {

void QuadratureSpec::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("quadrature tolerances must be positive");
    if (scan_points < 16) throw ConfigError("scan_points must be at least 16");
    if (max_depth < 1) throw ConfigError("max_depth must be positive");
    if (!(refinement_tol > 0.0) || !(isolation_factor > 0.0)) throw ConfigError("isolation tolerances must be positive");
}

namespace {

// Bisection to machine resolution on a bracket with g(lo), g(hi) of opposite sign.
double bisect(const std::function<double(double)>& g, double lo, double hi, double glo) {
    double ghi = g(hi);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        if ((gm > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    return std::abs(glo) <= std::abs(ghi) ? lo : hi;
}

// Minimizes s * g on [lo, hi] by golden-section search.
double golden_min(const std::function<double(double)>& g, double s, double lo, double hi) {
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = s * g(c), fd = s * g(d);
    for (int it = 0; it < 80 && (b - a) > 1e-15 * (1.0 + std::abs(a)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = s * g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = s * g(d);
        }
    }
    return fc < fd ? c : d;
}

std::vector<double> scan_once(const std::function<double(double)>& g, double a, double b,
                              const QuadratureSpec& spec, int n, bool periodic) {
    const double step = (b - a) / n;
    std::vector<double> t(n + 1), v(n + 1);
    double scale = 0.0;
    for (int i = 0; i <= n; ++i) {
        t[i] = (i == n) ? b : a + i * step;
        v[i] = g(t[i]);
        scale = std::max(scale, std::abs(v[i]));
    }
    const double tol = spec.refinement_tol * (1.0 + scale);
    auto small = [&](int i) { return std::abs(v[i]) <= tol; };

    int run = 0;
    for (int i = 0; i <= n; ++i) {
        run = small(i) ? run + 1 : 0;
        if (run >= 3) {
            throw NonIsolatedZeros(fmt::format("switching function vanishes on an interval near t = {:.6g}", t[i]));
        }
    }

    std::vector<double> zeros;
    for (int i = 0; i <= n; ++i) {
        if (small(i)) zeros.push_back(t[i]);
    }
    for (int i = 0; i < n; ++i) {
        if (!small(i) && !small(i + 1) && (v[i] > 0.0) != (v[i + 1] > 0.0)) {
            zeros.push_back(bisect(g, t[i], t[i + 1], v[i]));
        }
    }

    // Same-sign local minima of |g|: tangential zeros or a narrow dip through zero.
    const int first = periodic ? 0 : 1;
    for (int i = first; i < n; ++i) {
        const int im = (i == 0) ? n - 1 : i - 1;
        const double left_t = (i == 0) ? t[n - 1] - (b - a) : t[i - 1];
        if (small(i) || small(im) || small(i + 1)) continue;
        const double s = v[i] > 0.0 ? 1.0 : -1.0;
        if (s * v[im] <= 0.0 || s * v[i + 1] <= 0.0) continue;
        const double vl = s * v[im], vc = s * v[i], vr = s * v[i + 1];
        if (!(vc <= vl && vc <= vr && (vc < vl || vc < vr))) continue;
        const double tm = golden_min(g, s, left_t, t[i + 1]);
        const double gm = s * g(tm);
        if (std::abs(gm) <= tol) {
            zeros.push_back(tm < a ? tm + (b - a) : tm);
        } else if (gm < 0.0) {
            zeros.push_back(bisect(g, left_t, tm, s * vl));
            zeros.push_back(bisect(g, tm, t[i + 1], s * gm));
        }
    }
    for (double& z : zeros) {
        if (z < a) z += (b - a);
        if (z > b) z -= (b - a);
    }

    std::sort(zeros.begin(), zeros.end());
    const double gap = spec.isolation_factor * (b - a);
    std::vector<double> merged;
    for (double z : zeros) {
        if (merged.empty() || z - merged.back() > gap) merged.push_back(z);
    }
    if (periodic && !merged.empty()) {
        if (merged.front() - a <= gap) {
            merged.front() = a;
            if (b - merged.back() > gap) merged.push_back(b);
        }
        if (b - merged.back() <= gap) {
            merged.back() = b;
            if (merged.front() - a > gap) merged.insert(merged.begin(), a);
        }
    }
    return merged;
}

// Gauss-Kronrod (7, 15) abscissae and weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    Vector value;
    double error;
    int depth;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<Vector(double)>& g, double a, double b, int depth) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const Vector fc = g(c);
    Vector kron = kWgk[7] * fc;
    Vector gauss = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const Vector f1 = g(c - h * kXgk[j]);
        const Vector f2 = g(c + h * kXgk[j]);
        kron += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
    }
    kron *= h;
    gauss *= h;
    return Panel{a, b, kron, (kron - gauss).cwiseAbs().maxCoeff(), depth};
}

}  // namespace

std::vector<double> isolate_zeros(const std::function<double(double)>& g, double a, double b,
                                  const QuadratureSpec& spec, bool periodic, bool* too_coarse) {
    spec.validate();
    std::vector<double> zeros = scan_once(g, a, b, spec, spec.scan_points, periodic);
    if (too_coarse) {
        *too_coarse = false;
        if (spec.check_scan) {
            const auto finer = scan_once(g, a, b, spec, 2 * spec.scan_points, periodic);
            *too_coarse = finer.size() != zeros.size();
        }
    }
    return zeros;
}

SwitchTimes isolate_switch_times(const SwitchingFunction& h, const Vector& z, const QuadratureSpec& spec) {
    SwitchTimes out;
    out.z = z;
    out.refinement_tol = spec.refinement_tol;
    out.times = isolate_zeros([&](double t) { return h(t, z); }, 0.0, h.period, spec, true, &out.scan_too_coarse);
    return out;
}

IntegralResult integrate_adaptive(const std::function<Vector(double)>& g, double a, double b,
                                  const QuadratureSpec& spec) {
    std::priority_queue<Panel> heap;
    Panel first = gk15(g, a, b, 0);
    Vector total = first.value;
    double total_err = first.error;
    heap.push(std::move(first));
    int panels = 1;
    auto tolerance = [&] { return std::max(spec.abs_tol, spec.rel_tol * total.cwiseAbs().maxCoeff()); };
    while (total_err > tolerance()) {
        Panel worst = heap.top();
        if (worst.depth >= spec.max_depth || panels >= spec.max_panels) {
            throw MaxDepthExceeded(fmt::format("adaptive quadrature on [{:.6g}, {:.6g}] stalled with error estimate {:.3e}",
                                               a, b, total_err));
        }
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Panel left = gk15(g, worst.a, mid, worst.depth + 1);
        Panel right = gk15(g, mid, worst.b, worst.depth + 1);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(std::move(left));
        heap.push(std::move(right));
        ++panels;
    }
    // Resum in a fixed order to keep the result independent of heap state.
    std::vector<Panel> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel& p, const Panel& q) { return p.a < q.a; });
    IntegralResult out{Vector::Zero(total.size()), 0.0, panels};
    for (const Panel& p : all) {
        out.value += p.value;
        out.error_estimate += p.error;
    }
    return out;
}

namespace {

PiecewiseIntegral integrate_between(const std::vector<double>& breaks, const std::function<Vector(double, double)>& g,
                                    const std::function<double(double)>& mode_at, const QuadratureSpec& spec, int dim) {
    PiecewiseIntegral out;
    out.value = Vector::Zero(dim);
    out.breakpoints = breaks;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double lo = breaks[k], hi = breaks[k + 1];
        if (!(hi > lo)) continue;
        const double mode = mode_at(0.5 * (lo + hi));
        const auto piece = integrate_adaptive([&](double t) { return g(t, mode); }, lo, hi, spec);
        out.value += piece.value;
        out.error_estimate += piece.error_estimate;
    }
    return out;
}

std::vector<double> with_endpoints(std::vector<double> times, double T) {
    times.push_back(0.0);
    times.push_back(T);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return times;
}

}  // namespace

PiecewiseIntegral integrate_piecewise(const PiecewiseSystem& sys, const Vector& z, const QuadratureSpec& spec) {
    SwitchTimes sw = isolate_switch_times(sys.h(), z, spec);
    const auto breaks = with_endpoints(sw.times, sys.period());
    auto out = integrate_between(
        breaks, [&](double t, double s) { return sys.blended(t, z, s); },
        [&](double t) { return sign(sys.h()(t, z)); }, spec, sys.dim());
    out.switches = std::move(sw);
    return out;
}

PiecewiseIntegral integrate_regularized(const PiecewiseSystem& sys, const Vector& z, double delta,
                                        const QuadratureSpec& spec) {
    if (!(delta > 0.0 && delta <= 1.0)) throw BadDelta("delta must lie in (0, 1], got " + std::to_string(delta));
    const double T = sys.period();
    auto upper = isolate_zeros([&](double t) { return sys.h()(t, z) - delta; }, 0.0, T, spec, true);
    auto lower = isolate_zeros([&](double t) { return sys.h()(t, z) + delta; }, 0.0, T, spec, true);
    upper.insert(upper.end(), lower.begin(), lower.end());
    const auto breaks = with_endpoints(std::move(upper), T);
    auto out = integrate_between(
        breaks, [&](double t, double) { return sys.blended(t, z, phi_delta(sys.h()(t, z), delta)); },
        [](double) { return 0.0; }, spec, sys.dim());
    out.switches.z = z;
    out.switches.refinement_tol = spec.refinement_tol;
    return out;
}

}  // namespace nsavg
