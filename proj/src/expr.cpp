#include "nsavg/expr.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace nsavg::expr {

namespace {

struct FuncName {
    const char* name;
    Func func;
};

constexpr FuncName kFunctions[] = {
    {"sin", Func::sin},   {"cos", Func::cos},   {"tan", Func::tan}, {"asin", Func::asin},
    {"acos", Func::acos}, {"atan", Func::atan}, {"exp", Func::exp}, {"log", Func::log},
    {"sqrt", Func::sqrt}, {"abs", Func::abs},   {"sgn", Func::sgn},
};

const char* func_name(Func f) {
    for (const auto& entry : kFunctions) {
        if (entry.func == f) return entry.name;
    }
    return "?";
}

NodePtr make_literal(double v) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::literal;
    n->value = v;
    return n;
}

NodePtr make_node(NodeKind kind, std::vector<NodePtr> children) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->children = std::move(children);
    return n;
}

class Parser {
public:
    Parser(std::string_view src, int dim, const std::vector<std::string>& params)
        : src_(src), dim_(dim), params_(params) {}

    NodePtr parse_all() {
        NodePtr root = parse_expr();
        skip_space();
        if (pos_ != src_.size()) {
            throw SyntaxError(pos_, fmt::format("unexpected '{}'", src_[pos_]));
        }
        return root;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
    int dim_;
    const std::vector<std::string>& params_;

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= src_.size()) throw SyntaxError(pos_, fmt::format("expected '{}' at end of input", c));
            throw SyntaxError(pos_, fmt::format("expected '{}', found '{}'", c, src_[pos_]));
        }
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                lhs = make_node(NodeKind::add, {lhs, parse_term()});
            } else if (accept('-')) {
                lhs = make_node(NodeKind::sub, {lhs, parse_term()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = make_node(NodeKind::mul, {lhs, parse_unary()});
            } else if (accept('/')) {
                lhs = make_node(NodeKind::div, {lhs, parse_unary()});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return make_node(NodeKind::negate, {parse_unary()});
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (accept('^')) return make_node(NodeKind::pow, {base, parse_unary()});
        return base;
    }

    NodePtr parse_primary() {
        skip_space();
        if (pos_ >= src_.size()) throw SyntaxError(pos_, "unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        throw SyntaxError(pos_, fmt::format("unexpected '{}'", c));
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
            if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
                pos_ = look;
                digits();
            }
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (ec != std::errc() || ptr != src_.data() + pos_) throw SyntaxError(start, "malformed number");
        return make_literal(v);
    }

    NodePtr parse_name() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string name(src_.substr(start, pos_ - start));

        skip_space();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            for (const auto& entry : kFunctions) {
                if (name == entry.name) return parse_call(entry.func, name);
            }
            throw UnknownIdentifier(name);
        }
        for (const auto& entry : kFunctions) {
            if (name == entry.name) throw ArityError(name);
        }

        for (std::size_t i = 0; i < params_.size(); ++i) {
            if (params_[i] == name) {
                auto n = std::make_shared<Node>();
                n->kind = NodeKind::param;
                n->index = static_cast<int>(i);
                return n;
            }
        }
        if (name == "t") return make_node(NodeKind::time, {});
        if (name == "eps") return make_node(NodeKind::eps, {});
        if (name == "pi") return make_literal(std::numbers::pi);
        if (name == "e") return make_literal(std::numbers::e);
        if (name.size() > 1 && name[0] == 'x') {
            int k = 0;
            const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
            if (ec == std::errc() && ptr == name.data() + name.size() && k >= 1 && k <= dim_ && name[1] != '0') {
                auto n = std::make_shared<Node>();
                n->kind = NodeKind::state;
                n->index = k - 1;
                return n;
            }
        }
        throw UnknownIdentifier(name);
    }

    NodePtr parse_call(Func f, const std::string& name) {
        expect('(');
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == ')') throw ArityError(name);
        NodePtr arg = parse_expr();
        if (accept(',')) throw ArityError(name);
        expect(')');
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::call;
        n->func = f;
        n->children = {arg};
        return n;
    }
};

class Evaluator {
public:
    Evaluator(double t, const Vector& x, double eps, const std::vector<double>& params,
              const std::vector<std::string>& names)
        : t_(t), x_(x), eps_(eps), params_(params), names_(names) {}

    double operator()(const Node& n) const {
        switch (n.kind) {
            case NodeKind::literal: return n.value;
            case NodeKind::time: return t_;
            case NodeKind::eps: return eps_;
            case NodeKind::state: return x_[n.index];
            case NodeKind::param: return params_.at(static_cast<std::size_t>(n.index));
            case NodeKind::negate: return -(*this)(*n.children[0]);
            case NodeKind::add: return (*this)(*n.children[0]) + (*this)(*n.children[1]);
            case NodeKind::sub: return (*this)(*n.children[0]) - (*this)(*n.children[1]);
            case NodeKind::mul: return (*this)(*n.children[0]) * (*this)(*n.children[1]);
            case NodeKind::div: {
                const double den = (*this)(*n.children[1]);
                if (den == 0.0) fail(n, "division by zero");
                return (*this)(*n.children[0]) / den;
            }
            case NodeKind::pow: {
                const double b = (*this)(*n.children[0]);
                const double p = (*this)(*n.children[1]);
                if (b < 0.0 && p != std::floor(p)) fail(n, "negative base with non-integer exponent");
                if (b == 0.0 && p < 0.0) fail(n, "zero to a negative power");
                return std::pow(b, p);
            }
            case NodeKind::call: return call(n, (*this)(*n.children[0]));
        }
        return 0.0;
    }

private:
    double t_;
    const Vector& x_;
    double eps_;
    const std::vector<double>& params_;
    const std::vector<std::string>& names_;

    [[noreturn]] void fail(const Node& n, const char* why) const {
        throw DomainError(std::string(why) + " in " + to_string(n, names_));
    }

    double call(const Node& n, double u) const {
        switch (n.func) {
            case Func::sin: return std::sin(u);
            case Func::cos: return std::cos(u);
            case Func::tan: return std::tan(u);
            case Func::asin:
                if (u < -1.0 || u > 1.0) fail(n, "argument outside [-1, 1]");
                return std::asin(u);
            case Func::acos:
                if (u < -1.0 || u > 1.0) fail(n, "argument outside [-1, 1]");
                return std::acos(u);
            case Func::atan: return std::atan(u);
            case Func::exp: return std::exp(u);
            case Func::log:
                if (!(u > 0.0)) fail(n, "log of nonpositive value");
                return std::log(u);
            case Func::sqrt:
                if (u < 0.0) fail(n, "sqrt of negative value");
                return std::sqrt(u);
            case Func::abs: return std::abs(u);
            case Func::sgn: return sign(u);
        }
        return 0.0;
    }
};

void print(const Node& n, const std::vector<std::string>& names, std::string& out) {
    auto binary = [&](const char* op) {
        out += '(';
        print(*n.children[0], names, out);
        out += op;
        print(*n.children[1], names, out);
        out += ')';
    };
    switch (n.kind) {
        case NodeKind::literal: out += fmt::format("{:.17g}", n.value); break;
        case NodeKind::time: out += 't'; break;
        case NodeKind::eps: out += "eps"; break;
        case NodeKind::state: out += fmt::format("x{}", n.index + 1); break;
        case NodeKind::param: out += names.at(static_cast<std::size_t>(n.index)); break;
        case NodeKind::negate:
            out += "(-";
            print(*n.children[0], names, out);
            out += ')';
            break;
        case NodeKind::add: binary(" + "); break;
        case NodeKind::sub: binary(" - "); break;
        case NodeKind::mul: binary(" * "); break;
        case NodeKind::div: binary(" / "); break;
        case NodeKind::pow: binary("^"); break;
        case NodeKind::call:
            out += func_name(n.func);
            out += '(';
            print(*n.children[0], names, out);
            out += ')';
            break;
    }
}

}  // namespace

Expression::Expression(NodePtr root, int dim, std::vector<std::string> param_names)
    : root_(std::move(root)), dim_(dim), param_names_(std::move(param_names)) {}

double Expression::eval(const Environment& env) const { return eval(env.t, env.x, env.eps, env.params); }

double Expression::eval(double t, const Vector& x, double eps, const std::vector<double>& params) const {
    if (x.size() != dim_) throw DimensionMismatch("environment state has the wrong length");
    if (params.size() != param_names_.size()) throw ConfigError("environment parameter count mismatch");
    return Evaluator(t, x, eps, params, param_names_)(*root_);
}

std::string Expression::to_string() const { return expr::to_string(*root_, param_names_); }

std::string to_string(const Node& node, const std::vector<std::string>& param_names) {
    std::string out;
    print(node, param_names, out);
    return out;
}

Expression parse(std::string_view source, int dim, const std::vector<std::string>& param_names) {
    Parser p(source, dim, param_names);
    return Expression(p.parse_all(), dim, param_names);
}

bool same_structure(const Node& a, const Node& b) {
    if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
    switch (a.kind) {
        case NodeKind::literal:
            if (a.value != b.value) return false;
            break;
        case NodeKind::state:
        case NodeKind::param:
            if (a.index != b.index) return false;
            break;
        case NodeKind::call:
            if (a.func != b.func) return false;
            break;
        default: break;
    }
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!same_structure(*a.children[i], *b.children[i])) return false;
    }
    return true;
}

}  // namespace nsavg::expr
