#include "nsavg/cli.hpp"

#include "nsavg/config.hpp"
#include "nsavg/lcapp.hpp"
#include "nsavg/report.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

namespace nsavg::cli {

namespace {

using report::Json;
using report::num;

Json vec_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

bool wants(const RunConfig& cfg, const std::string& fmt) {
    return std::find(cfg.formats.begin(), cfg.formats.end(), fmt) != cfg.formats.end();
}

void emit(CommandOutput& out, const RunConfig& cfg, const std::string& stem, const report::Table* csv, const Json* json,
          const std::string* svg) {
    if (csv && wants(cfg, "csv")) out.files.emplace_back(stem + ".csv", report::to_csv(*csv));
    if (json && wants(cfg, "json")) out.files.emplace_back(stem + ".json", report::dump_json(*json));
    if (svg && wants(cfg, "svg")) out.files.emplace_back(stem + ".svg", *svg);
}

QuadratureSpec quadrature_for(const RunConfig& cfg) {
    QuadratureSpec q;
    if (cfg.tol) {
        if (!(*cfg.tol > 0.0)) throw ConfigError("--tol must be positive");
        q.rel_tol = *cfg.tol;
    }
    q.validate();
    return q;
}

double eps_for(const RunConfig& cfg, double fallback) {
    const double e = cfg.eps.value_or(fallback);
    if (!std::isfinite(e)) throw ConfigError("--eps must be finite");
    return e;
}

Vector point_or(const std::vector<double>& v, const Vector& fallback, const char* what) {
    if (v.empty()) return fallback;
    if (static_cast<Eigen::Index>(v.size()) != fallback.size()) {
        throw DimensionMismatch(fmt::format("{} has {} components, expected {}", what, v.size(), fallback.size()));
    }
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<Vector> grid_points(const Box& box, int grid) {
    if (grid < 1) throw ConfigError("--grid must be at least 1");
    const int n = box.dim();
    std::vector<Vector> pts;
    std::vector<int> idx(n, 0);
    for (;;) {
        Vector p(n);
        for (int i = 0; i < n; ++i) {
            p[i] = grid == 1 ? box.center()[i] : box.lo[i] + (box.hi[i] - box.lo[i]) * idx[i] / (grid - 1);
        }
        pts.push_back(p);
        int k = 0;
        while (k < n && ++idx[k] == grid) idx[k++] = 0;
        if (k == n) break;
    }
    return pts;
}

std::string mode_name(CertifyMode m) { return m == CertifyMode::two_sided ? "two-sided" : "positive"; }

Json hypothesis_json(const HypothesisReport& h) {
    Json j;
    j["mode"] = h.mode == HypothesisMode::ii ? "ii" : "ii_prime";
    j["pass"] = h.pass;
    j["min_margin"] = h.min_margin;
    j["sigma_points"] = h.sigma_points;
    j["degenerate_points"] = h.degenerate_points;
    j["grid"] = h.grid;
    Json w = Json::array();
    for (const auto& p : h.witnesses) w.push_back(Json{{"t", p.t}, {"x", vec_json(p.x)}, {"margin", p.margin}});
    j["witnesses"] = w;
    return j;
}

Json degree_json(const DegreeResult& d) {
    return Json{{"value", d.value},
                {"method", to_string(d.method)},
                {"min_boundary_norm", d.min_boundary_norm},
                {"refinement_depth", d.refinement_depth}};
}

CommandOutput cycles_app(const RunConfig& cfg) {
    CommandOutput out;
    const auto sols = lcapp::solve_cycles();
    std::vector<lcapp::ClosureCheck> checks;
    std::vector<lcapp::CycleCurve> curves;
    for (const auto& s : sols) {
        checks.push_back(lcapp::verify_cycle_by_integration(s));
        curves.push_back(lcapp::cycle_curve(s));
    }
    const auto degrees = lcapp::degree_at_cycles(sols);
    const auto topo = lcapp::check_topology(curves);

    report::Table t{{"r0", "theta0", "theta1", "branch", "res1", "res2", "closure_residual", "second_crossing",
                     "degree"},
                    {}};
    Json cycles = Json::array();
    bool all_ok = sols.size() == 3 && topo.pass;
    for (std::size_t i = 0; i < sols.size(); ++i) {
        const auto& s = sols[i];
        t.add_row({num(s.r0), num(s.theta0), num(s.theta1), lcapp::to_string(s.branch), num(s.residuals[0]),
                   num(s.residuals[1]), num(checks[i].closure_residual), num(checks[i].second_crossing),
                   std::to_string(degrees[i].value)});
        cycles.push_back(Json{{"r0", s.r0},
                              {"theta0", s.theta0},
                              {"theta1", s.theta1},
                              {"branch", lcapp::to_string(s.branch)},
                              {"residuals", Json::array({s.residuals[0], s.residuals[1]})},
                              {"closure_residual", checks[i].closure_residual},
                              {"second_crossing", checks[i].second_crossing},
                              {"crossings_mod_2pi", curves[i].crossings},
                              {"degree", degree_json(degrees[i])}});
        all_ok = all_ok && checks[i].closure_residual <= 1e-6 && checks[i].crossing_error <= 1e-6 &&
                 degrees[i].value != 0;
    }
    Json j;
    j["system"] = "lp-planar";
    j["cycles"] = cycles;
    j["topology"] = Json{{"crossings_per_curve", topo.crossings_per_curve},
                         {"nested", topo.nested},
                         {"min_gap", topo.min_gap},
                         {"pass", topo.pass}};
    j["status"] = all_ok ? "ok" : "numerical_failure";

    report::PlotSpec plot;
    plot.title = "Limit cycles of the piecewise-linear system";
    plot.x_label = "x";
    plot.y_label = "y";
    plot.equal_aspect = true;
    plot.vertical_lines = {1.0};
    const char* names[] = {"inner", "middle", "external"};
    for (std::size_t i = 0; i < curves.size(); ++i) {
        report::Series s;
        s.name = sols.size() == 3 ? names[i] : fmt::format("cycle {}", i + 1);
        for (std::size_t k = 0; k < curves[i].theta.size(); ++k) {
            s.x.push_back(curves[i].r[k] * std::cos(curves[i].theta[k]));
            s.y.push_back(curves[i].r[k] * std::sin(curves[i].theta[k]));
        }
        plot.series.push_back(std::move(s));
    }
    const std::string svg = report::svg_plot(plot);
    emit(out, cfg, "lp_cycles", &t, &j, &svg);
    out.out = fmt::format("{} cycle(s); topology {}\n", sols.size(), topo.pass ? "ok" : "FAILED");
    out.exit_code = all_ok ? kExitOk : kExitNumerical;
    return out;
}

}  // namespace

int exit_code_for(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::config: return kExitConfig;
        case ErrorCategory::hypothesis: return kExitHypothesis;
        case ErrorCategory::numerical: return kExitNumerical;
    }
    return kExitNumerical;
}

Box parse_box(const std::string& text) {
    std::vector<double> lo, hi;
    std::stringstream ss(text);
    std::string axis;
    while (std::getline(ss, axis, ';')) {
        const auto [a, b] = parse_range(axis);
        lo.push_back(a);
        hi.push_back(b);
    }
    if (lo.empty()) throw ConfigError("empty --box");
    const auto n = static_cast<Eigen::Index>(lo.size());
    return Box(Eigen::Map<Vector>(lo.data(), n), Eigen::Map<Vector>(hi.data(), n));
}

CertifyMode parse_mode(const std::string& text) {
    if (text == "two-sided") return CertifyMode::two_sided;
    if (text == "positive") return CertifyMode::positive_only;
    throw ConfigError(fmt::format("--mode must be two-sided or positive, got '{}'", text));
}

void apply_config_run_keys(RunConfig& cfg) {
    if (cfg.config_path.empty()) return;
    const auto kv = read_key_values(cfg.config_path);
    if (!cfg.eps && kv.has("eps")) cfg.eps = eval_constant(*kv.get("eps"));
    if (cfg.delta.empty() && kv.has("delta")) {
        std::stringstream ss(*kv.get("delta"));
        std::string item;
        while (std::getline(ss, item, ',')) cfg.delta.push_back(eval_constant(item));
    }
    if (!cfg.grid && kv.has("grid")) {
        try {
            cfg.grid = std::stoi(*kv.get("grid"));
        } catch (const std::logic_error&) {
            throw ConfigError("grid must be an integer");
        }
    }
    if (!cfg.tol && kv.has("tol")) cfg.tol = eval_constant(*kv.get("tol"));
}

PiecewiseSystem resolve_system(const RunConfig& cfg) {
    if (!cfg.system.empty() && !cfg.config_path.empty()) throw ConfigError("give either --system or --config");
    if (cfg.system.empty() && cfg.config_path.empty()) throw ConfigError("missing --system or --config");
    PiecewiseSystem sys = cfg.system.empty() ? load_system_file(cfg.config_path) : registry_get(cfg.system);
    if (!cfg.box) return sys;
    if (cfg.box->dim() != sys.dim()) {
        throw DimensionMismatch(fmt::format("--box has {} axes, system dimension is {}", cfg.box->dim(), sys.dim()));
    }
    return PiecewiseSystem(sys.label(), sys.F1(), sys.F2(), sys.R1(), sys.R2(), sys.h(), *cfg.box);
}

CommandOutput cmd_average(const RunConfig& cfg) {
    CommandOutput out;
    const PiecewiseSystem sys = resolve_system(cfg);
    const AveragedFunction av(sys, quadrature_for(cfg));
    const int n = sys.dim();
    report::Table t;
    for (int i = 1; i <= n; ++i) t.header.push_back(fmt::format("z{}", i));
    for (int i = 1; i <= n; ++i) t.header.push_back(fmt::format("f{}", i));
    t.header.insert(t.header.end(), {"error_estimate", "switches", "status"});
    Json rows = Json::array();
    std::optional<ErrorCategory> worst;
    report::Series series{"f", {}, {}, ""};
    for (const Vector& z : grid_points(sys.domain(), cfg.grid.value_or(16))) {
        std::vector<std::string> row;
        for (int i = 0; i < n; ++i) row.push_back(num(z[i]));
        Json jr;
        jr["z"] = vec_json(z);
        try {
            const auto r = av.eval(z);
            for (int i = 0; i < n; ++i) row.push_back(num(r.value[i]));
            row.insert(row.end(), {num(r.error_estimate), std::to_string(r.switches.times.size()), "ok"});
            jr["f"] = vec_json(r.value);
            jr["error_estimate"] = r.error_estimate;
            jr["switch_times"] = r.switches.times;
            jr["status"] = "ok";
            if (n == 1) {
                series.x.push_back(z[0]);
                series.y.push_back(r.value[0]);
            }
        } catch (const Error& e) {
            for (int i = 0; i < n; ++i) row.push_back("nan");
            row.insert(row.end(), {"nan", "0", e.what()});
            jr["status"] = e.what();
            if (!worst || e.category() == ErrorCategory::hypothesis) worst = e.category();
            out.err += fmt::format("average: z = {}: {}\n", num(z[0]), e.what());
        }
        t.add_row(std::move(row));
        rows.push_back(jr);
    }
    Json j{{"system", sys.label()}, {"dimension", n}, {"period", sys.period()}, {"rows", rows}};
    std::string svg;
    if (n == 1) {
        report::PlotSpec plot;
        plot.title = fmt::format("Averaged function of {}", sys.label());
        plot.x_label = "z";
        plot.y_label = "f(z)";
        plot.series.push_back(series);
        svg = report::svg_plot(plot);
    }
    emit(out, cfg, "average", &t, &j, n == 1 ? &svg : nullptr);
    out.out = fmt::format("average: {} row(s) for {}\n", t.rows.size(), sys.label());
    if (worst) out.exit_code = exit_code_for(*worst);
    return out;
}

CommandOutput cmd_cycles(const RunConfig& cfg) {
    if (cfg.app) {
        if (!cfg.system.empty() && cfg.system != "lp-planar") throw ConfigError("--app applies to lp-planar only");
        if (!cfg.config_path.empty()) throw ConfigError("--app does not take --config");
        return cycles_app(cfg);
    }
    CommandOutput out;
    const PiecewiseSystem sys = resolve_system(cfg);
    PipelineOptions opts;
    opts.mode = cfg.mode;
    opts.quadrature = quadrature_for(cfg);
    if (cfg.eps) {
        const double e = eps_for(cfg, 0.1);
        if (!(e > 0.0)) throw ConfigError("--eps for cycles is the largest eps of the sweep and must be positive");
        opts.eps_sweep = {e, e / 10, e / 100};
    }
    if (cfg.grid) opts.scan_grid = *cfg.grid;
    const PipelineReport rep = run_pipeline(sys, opts);

    report::Table t;
    t.header = {"zero"};
    for (int i = 1; i <= sys.dim(); ++i) t.header.push_back(fmt::format("a{}", i));
    t.header.insert(t.header.end(), {"degree", "eps"});
    for (int i = 1; i <= sys.dim(); ++i) t.header.push_back(fmt::format("z_eps{}", i));
    t.header.insert(t.header.end(), {"fixed_point_residual", "distance"});

    Json zeros = Json::array();
    report::PlotSpec plot;
    plot.title = fmt::format("Certificate convergence for {}", sys.label());
    plot.x_label = "log10 |eps|";
    plot.y_label = "log10 |z_eps - a|";
    for (std::size_t k = 0; k < rep.zeros.size(); ++k) {
        const auto& cz = rep.zeros[k];
        Json jz;
        jz["a"] = vec_json(cz.zero.a);
        jz["residual_norm"] = cz.zero.residual_norm;
        jz["isolation_radius"] = cz.zero.isolation_radius;
        jz["jacobian_singular"] = cz.zero.jacobian_singular;
        jz["degree"] = cz.degree ? degree_json(*cz.degree) : Json(nullptr);
        Json certs = Json::array();
        report::Series pos{fmt::format("zero {} eps>0", k + 1), {}, {}, ""};
        report::Series neg{fmt::format("zero {} eps<0", k + 1), {}, {}, ""};
        for (const auto& c : cz.certificates) {
            certs.push_back(Json{{"eps", c.eps},
                                 {"z_eps", vec_json(c.z_eps)},
                                 {"fixed_point_residual", c.fixed_point_residual},
                                 {"distance", c.distance},
                                 {"iterations", c.iterations}});
            std::vector<std::string> row{std::to_string(k + 1)};
            for (Eigen::Index i = 0; i < c.a.size(); ++i) row.push_back(num(c.a[i]));
            row.insert(row.end(), {std::to_string(c.degree), num(c.eps)});
            for (Eigen::Index i = 0; i < c.z_eps.size(); ++i) row.push_back(num(c.z_eps[i]));
            row.insert(row.end(), {num(c.fixed_point_residual), num(c.distance)});
            t.add_row(std::move(row));
            auto& s = c.eps > 0 ? pos : neg;
            s.x.push_back(std::log10(std::abs(c.eps)));
            s.y.push_back(std::log10(c.distance));
        }
        jz["certificates"] = certs;
        jz["failure"] = cz.failure;
        zeros.push_back(jz);
        if (!pos.x.empty()) plot.series.push_back(pos);
        if (!neg.x.empty()) plot.series.push_back(neg);
    }
    Json seeds = Json::array();
    for (const auto& s : rep.seeds) seeds.push_back(vec_json(s));
    const char* status = rep.status == PipelineStatus::ok ? "ok"
                         : rep.status == PipelineStatus::hypothesis_violation ? "hypothesis_violation"
                                                                              : "numerical_failure";
    Json j{{"system", sys.label()},      {"mode", mode_name(cfg.mode)}, {"eps_sweep", opts.eps_sweep},
           {"hypothesis", hypothesis_json(rep.hypothesis)}, {"seeds", seeds}, {"zeros", zeros},
           {"status", status},           {"message", rep.message}};
    const std::string svg = report::svg_plot(plot);
    emit(out, cfg, "cycles", &t, &j, &svg);
    out.out = fmt::format("cycles: {}: {}\n", status, rep.message);
    if (rep.status == PipelineStatus::hypothesis_violation) {
        out.exit_code = kExitHypothesis;
        out.err += fmt::format("cycles: {}\n", rep.message);
    } else if (rep.status == PipelineStatus::numerical_failure) {
        out.exit_code = kExitNumerical;
        out.err += fmt::format("cycles: {}\n", rep.message);
        for (const auto& cz : rep.zeros) {
            if (!cz.failure.empty()) out.err += fmt::format("cycles: {}\n", cz.failure);
        }
    }
    return out;
}

CommandOutput cmd_degree(const RunConfig& cfg) {
    CommandOutput out;
    VectorMap f;
    int n = cfg.center.empty() ? cfg.dim : static_cast<int>(cfg.center.size());
    Vector center = Vector::Zero(n);
    double radius = cfg.radius.value_or(1.0);
    std::string label = cfg.map;
    if (cfg.map == "identity") {
        f = [](const Vector& x) { return x; };
    } else if (cfg.map == "square") {
        if (n > 2) throw ConfigError("--map square is defined in dimension 1 and 2");
        f = [](const Vector& x) {
            if (x.size() == 1) return Vector(Vector::Constant(1, x[0] * x[0]));
            return Vector((Vector(2) << x[0] * x[0] - x[1] * x[1], 2.0 * x[0] * x[1]).finished());
        };
    } else if (cfg.map == "averaged") {
        const PiecewiseSystem sys = resolve_system(cfg);
        n = sys.dim();
        center = sys.domain().center();
        radius = cfg.radius.value_or(0.5 * sys.domain().width().minCoeff());
        f = AveragedFunction(sys, quadrature_for(cfg)).as_map();
        label = "averaged:" + sys.label();
    } else {
        throw ConfigError(fmt::format("--map must be identity, square or averaged, got '{}'", cfg.map));
    }
    if (n < 1) throw ConfigError("--dim must be positive");
    center = point_or(cfg.center, center, "--center");
    if (!(radius > 0.0)) throw ConfigError("--radius must be positive");
    const DegreeRegion region =
        n == 1 ? DegreeRegion::interval(center[0] - radius, center[0] + radius) : DegreeRegion::ball(center, radius);
    const DegreeResult d = degree(f, region);
    Json j = degree_json(d);
    j["map"] = label;
    j["center"] = vec_json(center);
    j["radius"] = radius;
    emit(out, cfg, "degree", nullptr, &j, nullptr);
    out.out = fmt::format("degree: {}\n", d.value);
    return out;
}

CommandOutput cmd_integrate(const RunConfig& cfg) {
    CommandOutput out;
    const PiecewiseSystem sys = resolve_system(cfg);
    const double eps = eps_for(cfg, 0.1);
    const Vector z = point_or(cfg.z, sys.domain().center(), "--z");
    const double t0 = cfg.t0.value_or(0.0), t1 = cfg.t1.value_or(sys.period());
    if (!(t1 > t0)) throw ConfigError("--t1 must exceed --t0");
    if (cfg.delta.size() > 1) throw ConfigError("integrate takes a single --delta");
    const Trajectory tr = cfg.delta.empty() ? integrate(sys, z, eps, t0, t1)
                                            : integrate_regularized(sys, z, eps, cfg.delta[0], t0, t1);
    report::Table t;
    t.header = {"t"};
    for (int i = 1; i <= sys.dim(); ++i) t.header.push_back(fmt::format("x{}", i));
    std::vector<report::Series> series(sys.dim());
    for (int i = 0; i < sys.dim(); ++i) series[i].name = fmt::format("x{}", i + 1);
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        std::vector<std::string> row{num(tr.t[k])};
        for (int i = 0; i < sys.dim(); ++i) {
            row.push_back(num(tr.x[k][i]));
            series[i].x.push_back(tr.t[k]);
            series[i].y.push_back(tr.x[k][i]);
        }
        t.add_row(std::move(row));
    }
    Json events = Json::array();
    for (const auto& e : tr.events) {
        events.push_back(Json{{"t_star", e.t_star},
                              {"x_star", vec_json(e.x_star)},
                              {"transversality", e.transversality},
                              {"direction", e.direction == CrossingDirection::minus_to_plus ? "minus_to_plus"
                                                                                             : "plus_to_minus"}});
    }
    Json j{{"system", sys.label()}, {"eps", eps},   {"t0", t0}, {"t1", t1}, {"z", vec_json(z)},
           {"delta", tr.delta ? Json(*tr.delta) : Json(nullptr)},   {"final_state", vec_json(tr.final_state())},
           {"events", events}};
    report::PlotSpec plot;
    plot.title = fmt::format("Trajectory of {}", sys.label());
    plot.x_label = "t";
    plot.y_label = "x";
    plot.series = std::move(series);
    const std::string svg = report::svg_plot(plot);
    emit(out, cfg, "trajectory", &t, &j, &svg);
    out.out = fmt::format("integrate: {} event(s), x(t1) = {}\n", tr.events.size(), num(tr.final_state()[0]));
    return out;
}

CommandOutput cmd_regularize(const RunConfig& cfg) {
    CommandOutput out;
    const PiecewiseSystem sys = resolve_system(cfg);
    const Vector z = point_or(cfg.z, sys.domain().center(), "--z");
    const std::vector<double> deltas = cfg.delta.empty() ? kDefaultDeltaSweep : cfg.delta;
    const auto table = check_fdelta_convergence(sys, z, deltas, quadrature_for(cfg));
    const bool monotone = is_nonincreasing(table);
    report::Table t{{"delta", "discrepancy", "raw", "noise_floor"}, {}};
    Json rows = Json::array();
    report::Series s{"|f_delta - f|", {}, {}, ""};
    for (const auto& r : table) {
        t.add_row({num(r.delta), num(r.discrepancy), num(r.raw), num(r.noise_floor)});
        rows.push_back(Json{{"delta", r.delta}, {"discrepancy", r.discrepancy}, {"raw", r.raw}, {"noise_floor", r.noise_floor}});
        if (r.raw > 0.0) {
            s.x.push_back(std::log10(r.delta));
            s.y.push_back(std::log10(r.raw));
        }
    }
    Json j{{"system", sys.label()}, {"z", vec_json(z)}, {"rows", rows}, {"nonincreasing", monotone}};
    report::PlotSpec plot;
    plot.title = fmt::format("Regularization discrepancy for {}", sys.label());
    plot.x_label = "log10 delta";
    plot.y_label = "log10 |f_delta(z) - f(z)|";
    plot.series.push_back(s);
    const std::string svg = report::svg_plot(plot);
    emit(out, cfg, "regularize", &t, &j, &svg);
    out.out = fmt::format("regularize: {} delta value(s), nonincreasing = {}\n", table.size(), monotone);
    return out;
}

CommandOutput run_command(const RunConfig& in) {
    RunConfig cfg = in;
    try {
        for (const auto& f : cfg.formats) {
            if (f != "csv" && f != "json" && f != "svg") throw ConfigError(fmt::format("unknown format '{}'", f));
        }
        apply_config_run_keys(cfg);
        if (cfg.command == "average") return cmd_average(cfg);
        if (cfg.command == "cycles") return cmd_cycles(cfg);
        if (cfg.command == "degree") return cmd_degree(cfg);
        if (cfg.command == "integrate") return cmd_integrate(cfg);
        if (cfg.command == "regularize") return cmd_regularize(cfg);
        throw ConfigError(fmt::format("unknown command '{}'", cfg.command));
    } catch (const Error& e) {
        CommandOutput out;
        out.exit_code = exit_code_for(e.category());
        out.err = fmt::format("{}: {}\n", cfg.command.empty() ? "nsavg" : cfg.command, e.what());
        return out;
    }
}

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::string* help_text) {
    RunConfig cfg;
    CLI::App app{"Averaging-method limit-cycle certification for discontinuous periodic systems", "nsavg"};
    app.require_subcommand(1);
    std::string box_text, mode_text = "two-sided", format_text = "csv,json,svg";

    auto common = [&](CLI::App* sub) {
        sub->add_option("--system", cfg.system, "built-in system label");
        sub->add_option("--config", cfg.config_path, "key=value system file");
        sub->add_option("--eps", cfg.eps, "perturbation parameter");
        sub->add_option("--delta", cfg.delta, "regularization width(s), comma separated")->delimiter(',');
        sub->add_option("--box", box_text, "domain box override: lo,hi[;lo,hi...]");
        sub->add_option("--grid", cfg.grid, "grid nodes per axis");
        sub->add_option("--tol", cfg.tol, "quadrature relative tolerance");
        sub->add_option("--out", cfg.out, "output directory");
        sub->add_option("--format", format_text, "output formats: csv,json,svg");
        sub->add_option("--mode", mode_text, "two-sided | positive");
    };
    auto* average = app.add_subcommand("average", "tabulate the averaged function on a grid");
    common(average);
    auto* cycles = app.add_subcommand("cycles", "hypothesis -> zeros -> degree -> periodic-orbit certificates");
    common(cycles);
    cycles->add_flag("--app", cfg.app, "solve the three-cycle piecewise-linear application");
    auto* deg = app.add_subcommand("degree", "Brouwer degree of a map over a ball");
    common(deg);
    deg->add_option("--map", cfg.map, "identity | square | averaged");
    deg->add_option("--center", cfg.center, "ball center, comma separated")->delimiter(',');
    deg->add_option("--radius", cfg.radius, "ball radius");
    deg->add_option("--dim", cfg.dim, "dimension for identity/square");
    auto* integ = app.add_subcommand("integrate", "Filippov integration through transversal crossings");
    common(integ);
    integ->add_option("--z", cfg.z, "initial state, comma separated")->delimiter(',');
    integ->add_option("--t0", cfg.t0, "start time");
    integ->add_option("--t1", cfg.t1, "end time");
    auto* reg = app.add_subcommand("regularize", "delta sweep of |f_delta(z) - f(z)|");
    common(reg);
    reg->add_option("--z", cfg.z, "evaluation point, comma separated")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        if (help_text) *help_text = app.help();
        return std::nullopt;
    } catch (const CLI::CallForAllHelp&) {
        if (help_text) *help_text = app.help("", CLI::AppFormatMode::All);
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
    if (!box_text.empty()) cfg.box = parse_box(box_text);
    cfg.mode = parse_mode(mode_text);
    cfg.formats.clear();
    std::stringstream ss(format_text);
    std::string f;
    while (std::getline(ss, f, ',')) {
        if (!f.empty()) cfg.formats.push_back(f);
    }
    return cfg;
}

void write_outputs(const CommandOutput& out, const std::string& dir) {
    for (const auto& [name, content] : out.files) report::write_file(dir + "/" + name, content);
}

int main_entry(int argc, const char* const* argv) {
    try {
        std::string help;
        const auto cfg = parse_args(argc, argv, &help);
        if (!cfg) {
            std::cout << help;
            return kExitOk;
        }
        const CommandOutput out = run_command(*cfg);
        if (!out.files.empty()) write_outputs(out, cfg->out);
        std::cout << out.out;
        std::cerr << out.err;
        return out.exit_code;
    } catch (const Error& e) {
        std::cerr << "nsavg: " << e.what() << '\n';
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        std::cerr << "nsavg: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace nsavg::cli
