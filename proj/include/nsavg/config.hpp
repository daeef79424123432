#pragma once

// Flat `key = value` files describing a piecewise system with
// expression-valued fields. Lines starting with '#' are comments.
//
//   name = my-system        dim = 2        period = 2*pi
//   param.k = 0.5
//   F1.1 = ...  F2.1 = ...  R1.1 = ...  R2.1 = ...   (sgn form; F2, R1, R2 default to 0)
//   X.1 = ...   Y.1 = ...                            (branch form, instead of F1/F2)
//   h = ...     h_t = ...   h_x.1 = ...              (h_t and h_x.i optional, else finite differences)
//   box.1 = lo hi

#include "nsavg/systems.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nsavg {

struct KeyValueFile {
    std::map<std::string, std::string> entries;
    std::map<std::string, int> lines;  // key -> 1-based line number

    [[nodiscard]] bool has(const std::string& key) const { return entries.count(key) != 0; }
    [[nodiscard]] std::optional<std::string> get(const std::string& key) const;
    [[nodiscard]] std::string require(const std::string& key) const;
};

/// Throws ConfigError on a line without '=', an empty key, or a duplicate key.
KeyValueFile parse_key_values(const std::string& text);
KeyValueFile read_key_values(const std::string& path);

/// Evaluates a constant expression (pi, e, literals, parameters).
double eval_constant(const std::string& source, const std::vector<std::string>& names = {},
                     const std::vector<double>& values = {});

/// "lo hi" (whitespace or comma separated).
std::pair<double, double> parse_range(const std::string& text);

PiecewiseSystem system_from_config(const KeyValueFile& kv);
PiecewiseSystem load_system_file(const std::string& path);

}  // namespace nsavg
