// Copyright 2026 The vqfie Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file plot.hpp
 * Static SVG line charts from experiment CSVs.
 *
 * A plot kind names an x column, one or more y columns and an optional
 * grouping column. Each group becomes one panel; each y column one polyline
 * in it. Repeated x values inside a group keep the largest y. Output has no
 * timestamps, so equal input gives equal bytes.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace vqfie {

struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string &name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw MalformedCSV("missing column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    }
};

/// Parse CSV text, skipping '#' metadata lines. Empty cells read as NaN.
inline CsvData parse_csv(const std::string &text) {
    std::istringstream is(text);
    std::string line;
    CsvData out;
    auto split = [](const std::string &s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (!s.empty() && s.back() == ',') {
            cells.emplace_back();
        }
        return cells;
    };
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.starts_with('#')) {
            continue;
        }
        const auto cells = split(line);
        if (out.header.empty()) {
            out.header = cells;
            continue;
        }
        if (cells.size() != out.header.size()) {
            throw MalformedCSV("row has " + std::to_string(cells.size()) + " cells, header has " +
                               std::to_string(out.header.size()));
        }
        std::vector<double> row;
        for (const auto &c : cells) {
            if (c.empty()) {
                row.push_back(std::nan(""));
                continue;
            }
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(c, &pos));
                if (pos != c.size()) {
                    throw std::invalid_argument(c);
                }
            } catch (const std::exception &) {
                throw MalformedCSV("non-numeric cell '" + c + "'");
            }
        }
        out.rows.push_back(std::move(row));
    }
    if (out.header.empty() || out.rows.empty()) {
        throw MalformedCSV("no data rows");
    }
    return out;
}

struct PlotSpec {
    std::string title;
    std::string x;
    std::vector<std::string> ys;
    std::string group; ///< empty: single panel
};

/// Layout for the built-in kinds: cost (optimizer history), bounds
/// (bound-compare output), variance (variance-scan output).
inline PlotSpec plot_spec(const std::string &kind) {
    if (kind == "cost") {
        return {"cost vs iteration", "iteration", {"cost"}, "unit"};
    }
    if (kind == "bounds") {
        return {"bounds vs purity", "purity", {"tqfi_lower", "ssqfi_lower", "purity_loss", "exact"},
                "n"};
    }
    if (kind == "variance") {
        return {"log variance vs n", "n", {"log_var"}, "delta"};
    }
    throw MalformedCSV("unknown plot kind '" + kind + "' (cost, bounds, variance)");
}

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string label_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

} // namespace detail

inline std::string render_svg(const CsvData &data, const PlotSpec &spec) {
    static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                   "#8c564b"};
    const std::size_t xc = data.column(spec.x);
    std::vector<std::size_t> yc;
    for (const auto &y : spec.ys) {
        yc.push_back(data.column(y));
    }
    const bool grouped = !spec.group.empty() &&
                         std::find(data.header.begin(), data.header.end(), spec.group) !=
                             data.header.end();
    // group -> y column -> x -> y (max over duplicates)
    std::map<double, std::vector<std::map<double, double>>> groups;
    for (const auto &row : data.rows) {
        const double key = grouped ? row[data.column(spec.group)] : 0.0;
        auto &series = groups[key];
        series.resize(yc.size());
        for (std::size_t k = 0; k < yc.size(); ++k) {
            const double x = row[xc];
            const double y = row[yc[k]];
            if (!std::isfinite(x) || !std::isfinite(y)) {
                continue;
            }
            auto [it, fresh] = series[k].emplace(x, y);
            if (!fresh) {
                it->second = std::max(it->second, y);
            }
        }
    }
    const double pw = 360.0;
    const double ph = 260.0;
    const double margin = 50.0;
    const double width = static_cast<double>(groups.size()) * (pw + margin) + margin;
    const double height = ph + 2.5 * margin + 20.0 * static_cast<double>(spec.ys.size());
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::svg_num(width)
       << "\" height=\"" << detail::svg_num(height) << "\" font-family=\"sans-serif\" "
       << "font-size=\"11\">\n";
    os << "<text x=\"" << detail::svg_num(margin) << "\" y=\"18\" font-size=\"14\">" << spec.title
       << "</text>\n";
    std::size_t panel = 0;
    for (const auto &[key, series] : groups) {
        double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
        for (const auto &s : series) {
            for (const auto &[x, y] : s) {
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
        }
        if (!std::isfinite(x0)) {
            continue;
        }
        if (x1 == x0) {
            x1 = x0 + 1.0;
        }
        if (y1 == y0) {
            y1 = y0 + 1.0;
        }
        const double left = margin + static_cast<double>(panel) * (pw + margin);
        const double top = margin;
        auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
        auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };
        os << "<g class=\"panel\" id=\"" << (grouped ? spec.group + "-" + detail::label_num(key)
                                                     : std::string("all"))
           << "\">\n";
        os << "<rect x=\"" << detail::svg_num(left) << "\" y=\"" << detail::svg_num(top)
           << "\" width=\"" << detail::svg_num(pw) << "\" height=\"" << detail::svg_num(ph)
           << "\" fill=\"none\" stroke=\"#444\"/>\n";
        if (grouped) {
            os << "<text x=\"" << detail::svg_num(left) << "\" y=\"" << detail::svg_num(top - 6)
               << "\">" << spec.group << " = " << detail::label_num(key) << "</text>\n";
        }
        os << "<text x=\"" << detail::svg_num(left + pw / 2) << "\" y=\""
           << detail::svg_num(top + ph + 30) << "\" text-anchor=\"middle\">" << spec.x
           << "</text>\n";
        os << "<text x=\"" << detail::svg_num(left) << "\" y=\"" << detail::svg_num(top + ph + 14)
           << "\">" << detail::label_num(x0) << "</text>\n";
        os << "<text x=\"" << detail::svg_num(left + pw) << "\" y=\""
           << detail::svg_num(top + ph + 14) << "\" text-anchor=\"end\">" << detail::label_num(x1)
           << "</text>\n";
        os << "<text x=\"" << detail::svg_num(left - 4) << "\" y=\"" << detail::svg_num(top + ph)
           << "\" text-anchor=\"end\">" << detail::label_num(y0) << "</text>\n";
        os << "<text x=\"" << detail::svg_num(left - 4) << "\" y=\"" << detail::svg_num(top + 10)
           << "\" text-anchor=\"end\">" << detail::label_num(y1) << "</text>\n";
        for (std::size_t k = 0; k < series.size(); ++k) {
            os << "<polyline class=\"series\" data-y=\"" << spec.ys[k] << "\" fill=\"none\" "
               << "stroke=\"" << colors[k % 6] << "\" points=\"";
            bool first = true;
            for (const auto &[x, y] : series[k]) {
                os << (first ? "" : " ") << detail::svg_num(px(x)) << ',' << detail::svg_num(py(y));
                first = false;
            }
            os << "\"/>\n";
        }
        os << "</g>\n";
        ++panel;
    }
    for (std::size_t k = 0; k < spec.ys.size(); ++k) {
        const double y = margin + ph + 50 + 20.0 * static_cast<double>(k);
        os << "<line x1=\"" << detail::svg_num(margin) << "\" y1=\"" << detail::svg_num(y - 4)
           << "\" x2=\"" << detail::svg_num(margin + 20) << "\" y2=\"" << detail::svg_num(y - 4)
           << "\" stroke=\"" << colors[k % 6] << "\"/>\n";
        os << "<text x=\"" << detail::svg_num(margin + 26) << "\" y=\"" << detail::svg_num(y)
           << "\">" << spec.ys[k] << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

/// Render csv_path with the given kind into svg_path. Nothing is written
/// when the CSV is malformed or empty.
inline void plot(const std::string &csv_path, const std::string &kind, const std::string &svg_path) {
    std::ifstream in(csv_path);
    if (!in) {
        throw MalformedCSV("cannot open '" + csv_path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string svg = render_svg(parse_csv(ss.str()), plot_spec(kind));
    std::ofstream out(svg_path, std::ios::binary);
    if (!out) {
        throw MalformedCSV("cannot write '" + svg_path + "'");
    }
    out << svg;
}

} // namespace vqfie
