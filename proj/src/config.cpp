#include "nsavg/config.hpp"

#include "nsavg/expr.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

namespace nsavg {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct Params {
    std::vector<std::string> names;
    std::vector<double> values;
};

// Expressions are shared by every copy of the field closures.
using ExprList = std::shared_ptr<const std::vector<expr::Expression>>;

ExprList parse_component_list(const KeyValueFile& kv, const std::string& prefix, int n, const Params& p,
                              bool required) {
    auto list = std::make_shared<std::vector<expr::Expression>>();
    bool any = false;
    for (int i = 1; i <= n; ++i) {
        const std::string key = fmt::format("{}.{}", prefix, i);
        if (kv.has(key)) any = true;
    }
    if (!any && !required) return nullptr;
    for (int i = 1; i <= n; ++i) {
        const std::string key = fmt::format("{}.{}", prefix, i);
        const auto src = kv.get(key);
        if (!src) throw ConfigError(fmt::format("missing key '{}'", key));
        try {
            list->push_back(expr::parse(*src, n, p.names));
        } catch (const Error& e) {
            throw ConfigError(fmt::format("line {}: {}: {}", kv.lines.at(key), key, e.what()));
        }
    }
    return list;
}

SmoothField field_of(const ExprList& list, int n, double T, const Params& p) {
    if (!list) return SmoothField::zero(n, T);
    auto params = std::make_shared<const std::vector<double>>(p.values);
    return SmoothField(n, T, [list, params, n](double t, const Vector& x, double eps) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = (*list)[i].eval(t, x, eps, *params);
        return v;
    });
}

}  // namespace

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueFile::require(const std::string& key) const {
    const auto v = get(key);
    if (!v) throw ConfigError(fmt::format("missing key '{}'", key));
    return *v;
}

KeyValueFile parse_key_values(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key = value", number));
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", number));
        if (kv.has(key)) {
            throw ConfigError(fmt::format("line {}: duplicate key '{}' (first on line {})", number, key, kv.lines[key]));
        }
        kv.entries[key] = value;
        kv.lines[key] = number;
    }
    return kv;
}

KeyValueFile read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

double eval_constant(const std::string& source, const std::vector<std::string>& names,
                     const std::vector<double>& values) {
    const auto e = expr::parse(source, 0, names);
    return e.eval(0.0, Vector(0), 0.0, values);
}

std::pair<double, double> parse_range(const std::string& text) {
    std::string s = text;
    for (char& c : s) {
        if (c == ',' || c == ':') c = ' ';
    }
    std::istringstream in(s);
    double lo = 0.0, hi = 0.0;
    std::string rest;
    if (!(in >> lo >> hi) || (in >> rest)) throw ConfigError(fmt::format("expected 'lo hi', got '{}'", text));
    return {lo, hi};
}

PiecewiseSystem system_from_config(const KeyValueFile& kv) {
    const std::string name = kv.get("name").value_or("config-system");
    int n = 0;
    try {
        n = std::stoi(kv.require("dim"));
    } catch (const std::logic_error&) {
        throw ConfigError("dim must be a positive integer");
    }
    if (n <= 0) throw ConfigError("dim must be a positive integer");

    for (const auto& [key, value] : kv.entries) {
        static const std::vector<std::string> scalar_keys{"name", "dim", "period", "h", "h_t"};
        static const std::vector<std::string> prefixes{"param.", "F1.", "F2.", "R1.", "R2.", "X.", "Y.", "h_x.", "box."};
        bool known = std::find(scalar_keys.begin(), scalar_keys.end(), key) != scalar_keys.end();
        for (const auto& pre : prefixes) known = known || key.rfind(pre, 0) == 0;
        // Run options may share the file with the system description.
        static const std::vector<std::string> run_keys{"eps", "delta", "grid", "tol"};
        known = known || std::find(run_keys.begin(), run_keys.end(), key) != run_keys.end();
        if (!known) throw ConfigError(fmt::format("line {}: unknown key '{}'", kv.lines.at(key), key));
    }

    Params p;
    for (const auto& [key, value] : kv.entries) {
        if (key.rfind("param.", 0) != 0) continue;
        const std::string pname = key.substr(6);
        if (pname.empty()) throw ConfigError(fmt::format("line {}: empty parameter name", kv.lines.at(key)));
        p.names.push_back(pname);
        p.values.push_back(eval_constant(value));
    }

    const double T = eval_constant(kv.get("period").value_or("2*pi"), p.names, p.values);
    if (!(T > 0.0)) throw ConfigError("period must be positive");

    std::vector<double> lo(n), hi(n);
    for (int i = 1; i <= n; ++i) {
        const auto [a, b] = parse_range(kv.require(fmt::format("box.{}", i)));
        lo[i - 1] = a;
        hi[i - 1] = b;
    }
    Box box(Eigen::Map<Vector>(lo.data(), n), Eigen::Map<Vector>(hi.data(), n));

    const bool branch_form = kv.has("X.1") || kv.has("Y.1");
    const bool sgn_form = kv.has("F1.1") || kv.has("F2.1");
    if (branch_form && sgn_form) throw ConfigError("give either X.i/Y.i or F1.i/F2.i, not both");

    const std::string hsrc = kv.require("h");
    auto hexpr = std::make_shared<const expr::Expression>(expr::parse(hsrc, n, p.names));
    auto params = std::make_shared<const std::vector<double>>(p.values);
    ScalarFn h = [hexpr, params](double t, const Vector& x) { return hexpr->eval(t, x, 0.0, *params); };
    SwitchingFunction sw;
    if (kv.has("h_t")) {
        auto ht = std::make_shared<const expr::Expression>(expr::parse(kv.require("h_t"), n, p.names));
        auto hx = parse_component_list(kv, "h_x", n, p, true);
        sw = SwitchingFunction::analytic(
            T, h, [ht, params](double t, const Vector& x) { return ht->eval(t, x, 0.0, *params); },
            [hx, params, n](double t, const Vector& x) {
                Vector g(n);
                for (int i = 0; i < n; ++i) g[i] = (*hx)[i].eval(t, x, 0.0, *params);
                return g;
            });
    } else {
        if (kv.has("h_x.1")) throw ConfigError("h_x.i given without h_t");
        sw = SwitchingFunction::finite_difference(T, h);
    }

    if (branch_form) {
        const auto X = field_of(parse_component_list(kv, "X", n, p, true), n, T, p);
        const auto Y = field_of(parse_component_list(kv, "Y", n, p, true), n, T, p);
        if (kv.has("R1.1") || kv.has("R2.1")) throw ConfigError("R1.i/R2.i need the F1.i/F2.i form");
        return PiecewiseSystem::from_branches(name, X, Y, std::move(sw), std::move(box));
    }
    return PiecewiseSystem(name, field_of(parse_component_list(kv, "F1", n, p, true), n, T, p),
                           field_of(parse_component_list(kv, "F2", n, p, false), n, T, p),
                           field_of(parse_component_list(kv, "R1", n, p, false), n, T, p),
                           field_of(parse_component_list(kv, "R2", n, p, false), n, T, p), std::move(sw),
                           std::move(box));
}

PiecewiseSystem load_system_file(const std::string& path) { return system_from_config(read_key_values(path)); }

}  // namespace nsavg
