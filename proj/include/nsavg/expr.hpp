#pragma once

// Small math-expression language for config-defined systems.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?        (right-associative)
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// Names: t, eps, x1..xn, declared parameters, constants pi and e, and the
// unary functions sin cos tan asin acos atan exp log sqrt abs sgn.

#include "nsavg/core.hpp"

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace nsavg::expr {

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, const std::string& what)
        : Error(ErrorCategory::config, "SyntaxError at " + std::to_string(position) + ": " + what),
          position_(position) {}
    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class UnknownIdentifier : public Error {
public:
    explicit UnknownIdentifier(const std::string& name)
        : Error(ErrorCategory::config, "UnknownIdentifier: " + name), name_(name) {}
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class ArityError : public Error {
public:
    explicit ArityError(const std::string& function)
        : Error(ErrorCategory::config, "ArityError: " + function + " takes exactly one argument") {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorCategory::numerical, "DomainError: " + what) {}
};

enum class Func { sin, cos, tan, asin, acos, atan, exp, log, sqrt, abs, sgn };
enum class NodeKind { literal, time, eps, state, param, negate, add, sub, mul, div, pow, call };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind = NodeKind::literal;
    double value = 0.0;                // literal
    int index = 0;                     // state (0-based) or param slot
    Func func = Func::sin;             // call
    std::vector<NodePtr> children;
};

/// Values bound at evaluation time. `params` follows the order of the
/// parameter names given to parse().
struct Environment {
    double t = 0.0;
    Vector x;
    double eps = 0.0;
    std::vector<double> params;
};

class Expression {
public:
    Expression(NodePtr root, int dim, std::vector<std::string> param_names);

    [[nodiscard]] double eval(const Environment& env) const;
    [[nodiscard]] double eval(double t, const Vector& x, double eps, const std::vector<double>& params) const;

    /// Fully parenthesized text that reparses to the same tree.
    [[nodiscard]] std::string to_string() const;

    [[nodiscard]] const Node& root() const { return *root_; }
    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] const std::vector<std::string>& param_names() const { return param_names_; }

private:
    NodePtr root_;
    int dim_;
    std::vector<std::string> param_names_;
};

Expression parse(std::string_view source, int dim, const std::vector<std::string>& param_names = {});

/// Structural equality of two trees (literals compared exactly).
bool same_structure(const Node& a, const Node& b);

std::string to_string(const Node& node, const std::vector<std::string>& param_names);

}  // namespace nsavg::expr
