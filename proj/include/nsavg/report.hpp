#pragma once

// Deterministic CSV, JSON and SVG emitters. Data values in CSV and JSON
// carry 17 significant digits; SVG pixel coordinates are fixed to 3 decimals.

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace nsavg::report {

using Json = nlohmann::ordered_json;

/// "%.17g"; non-finite values as "nan", "inf", "-inf".
std::string num(double v);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

/// RFC 4180: CRLF-free LF line ends, fields quoted when they contain ',', '"' or a newline.
std::string to_csv(const Table& t);

/// Serializes with 17-digit floats and keys in insertion order; non-finite floats become null.
std::string dump_json(const Json& j, int indent = 2);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;  // empty: palette
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    std::vector<double> vertical_lines;
    bool equal_aspect = false;
    int width = 640;
    int height = 480;
};

/// Self-contained SVG 1.1 line plot with axes, ticks and a legend.
std::string svg_plot(const PlotSpec& spec);

/// Writes `content` to `path`, creating parent directories.
void write_file(const std::string& path, const std::string& content);

}  // namespace nsavg::report
