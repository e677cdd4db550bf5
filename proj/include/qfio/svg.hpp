#pragma once

// Static SVG renderings of a sweep table: a log-scale precision chart with
// one polyline per strategy, and a stacked-band profile of the optimized
// weights across the grid. Both embed provenance in a <desc> element and
// label every curve with the metric its values were computed on, so exact
// and bound numbers are never mixed silently.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfio/sweep.hpp"
#include "qfio/version.hpp"

namespace qfio {
namespace svg {

inline std::string xml_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline const std::vector<std::string>& palette() {
    static const std::vector<std::string> colors = {
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
        "#17becf", "#bcbd22", "#e377c2", "#7f7f7f", "#aec7e8", "#ffbb78"};
    return colors;
}

struct Frame {
    double width = 860.0, height = 520.0;
    double left = 70.0, right = 220.0, top = 48.0, bottom = 56.0;

    double plot_w() const { return width - left - right; }
    double plot_h() const { return height - top - bottom; }
    double x(double t) const { return left + t * plot_w(); }        // t in [0,1]
    double y(double t) const { return top + (1.0 - t) * plot_h(); } // t in [0,1]
};

inline void open_svg(std::ostringstream& out, const Frame& f, const std::string& title,
                     const std::string& command) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width
        << "\" height=\"" << f.height << "\" viewBox=\"0 0 " << f.width << " "
        << f.height << "\">\n";
    out << "  <title>" << xml_escape(title) << "</title>\n";
    out << "  <desc>version=" << kVersion << "; command=" << xml_escape(command)
        << "</desc>\n";
    out << "  <rect width=\"" << f.width << "\" height=\"" << f.height
        << "\" fill=\"white\"/>\n";
}

inline void axes(std::ostringstream& out, const Frame& f, const std::string& x_label,
                 const std::string& y_label) {
    out << "  <rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\""
        << f.plot_w() << "\" height=\"" << f.plot_h()
        << "\" fill=\"none\" stroke=\"#333\"/>\n";
    out << "  <text x=\"" << fmt(f.left + f.plot_w() / 2) << "\" y=\""
        << fmt(f.height - 14) << "\" text-anchor=\"middle\" font-size=\"14\">"
        << xml_escape(x_label) << "</text>\n";
    out << "  <text x=\"18\" y=\"" << fmt(f.top + f.plot_h() / 2)
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
        << fmt(f.top + f.plot_h() / 2) << ")\">" << xml_escape(y_label)
        << "</text>\n";
}

inline void tick_x(std::ostringstream& out, const Frame& f, double t, double value) {
    const double px = f.x(t);
    out << "  <line x1=\"" << fmt(px) << "\" y1=\"" << fmt(f.top + f.plot_h())
        << "\" x2=\"" << fmt(px) << "\" y2=\"" << fmt(f.top + f.plot_h() + 5)
        << "\" stroke=\"#333\"/>\n";
    out << "  <text x=\"" << fmt(px) << "\" y=\"" << fmt(f.top + f.plot_h() + 20)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << fmt_tick(value)
        << "</text>\n";
}

inline void tick_y(std::ostringstream& out, const Frame& f, double t, double value) {
    const double py = f.y(t);
    out << "  <line x1=\"" << fmt(f.left - 5) << "\" y1=\"" << fmt(py) << "\" x2=\""
        << fmt(f.left) << "\" y2=\"" << fmt(py) << "\" stroke=\"#333\"/>\n";
    out << "  <text x=\"" << fmt(f.left - 9) << "\" y=\"" << fmt(py + 4)
        << "\" text-anchor=\"end\" font-size=\"12\">" << fmt_tick(value)
        << "</text>\n";
}

} // namespace svg

// Precision chart: delta_phi (log scale) against transmissivity, one series
// per strategy column. Rows whose values are not finite are skipped.
inline std::string render_precision_chart(const SweepResult& sweep,
                                          const std::string& command) {
    sweep.validate();
    const svg::Frame f;
    const auto& grid = sweep.eta_grid;
    const double x_lo = grid.front(), x_hi = grid.back();
    if (!(x_hi > x_lo))
        throw std::invalid_argument("render_precision_chart: need a widening grid");

    double y_lo = std::numeric_limits<double>::infinity(), y_hi = 0.0;
    for (const auto& row : sweep.delta_phi)
        for (double v : row)
            if (std::isfinite(v) && v > 0.0) {
                y_lo = std::min(y_lo, v);
                y_hi = std::max(y_hi, v);
            }
    if (!(y_hi > 0.0))
        throw std::invalid_argument("render_precision_chart: no finite values");
    double lg_lo = std::log10(y_lo), lg_hi = std::log10(y_hi);
    if (lg_hi - lg_lo < 0.1) { lg_lo -= 0.05; lg_hi += 0.05; }
    const double pad = 0.04 * (lg_hi - lg_lo);
    lg_lo -= pad;
    lg_hi += pad;

    auto tx = [&](double eta) { return (eta - x_lo) / (x_hi - x_lo); };
    auto ty = [&](double v) { return (std::log10(v) - lg_lo) / (lg_hi - lg_lo); };

    std::ostringstream out;
    const std::string title = "phase precision vs transmissivity, N=" +
                              std::to_string(sweep.n_photons) + ", " +
                              to_string(sweep.mode);
    svg::open_svg(out, f, title, command);
    svg::axes(out, f, "transmissivity", "phase uncertainty");
    for (int i = 0; i <= 5; ++i) {
        const double t = i / 5.0;
        svg::tick_x(out, f, t, x_lo + t * (x_hi - x_lo));
        svg::tick_y(out, f, t, std::pow(10.0, lg_lo + t * (lg_hi - lg_lo)));
    }

    const auto& colors = svg::palette();
    for (size_t c = 0; c < sweep.strategies.size(); ++c) {
        std::ostringstream pts;
        for (size_t i = 0; i < sweep.rows(); ++i) {
            const double v = sweep.delta_phi[i][c];
            if (!std::isfinite(v) || v <= 0.0) continue;
            pts << svg::fmt(f.x(tx(grid[i]))) << ',' << svg::fmt(f.y(ty(v))) << ' ';
        }
        const auto& color = colors[c % colors.size()];
        out << "  <polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.8\" points=\"" << pts.str() << "\"/>\n";
        const double ly = f.top + 16.0 + 20.0 * static_cast<double>(c);
        out << "  <line x1=\"" << svg::fmt(f.width - f.right + 12) << "\" y1=\""
            << svg::fmt(ly - 4) << "\" x2=\"" << svg::fmt(f.width - f.right + 36)
            << "\" y2=\"" << svg::fmt(ly - 4) << "\" stroke=\"" << color
            << "\" stroke-width=\"1.8\"/>\n";
        out << "  <text x=\"" << svg::fmt(f.width - f.right + 42) << "\" y=\""
            << svg::fmt(ly) << "\" font-size=\"12\">"
            << svg::xml_escape(sweep.strategies[c] + " (" + sweep.metric_labels[c] + ")")
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

// Stacked bands of the optimized weight profile x_0..x_N across the grid.
// Failed rows carry no weights and are left out of the bands.
inline std::string render_weight_profile(const SweepResult& sweep,
                                         const std::string& command) {
    sweep.validate();
    std::vector<size_t> ok;
    for (size_t i = 0; i < sweep.rows(); ++i)
        if (sweep.row_status[i] == "ok") ok.push_back(i);
    if (ok.size() < 2)
        throw std::invalid_argument("render_weight_profile: need at least two rows");

    const svg::Frame f;
    const double x_lo = sweep.eta_grid[ok.front()], x_hi = sweep.eta_grid[ok.back()];
    auto tx = [&](double eta) { return (eta - x_lo) / (x_hi - x_lo); };

    std::ostringstream out;
    const std::string title = "optimized weight profile, N=" +
                              std::to_string(sweep.n_photons) + ", " +
                              to_string(sweep.mode);
    svg::open_svg(out, f, title, command);
    svg::axes(out, f, "transmissivity", "cumulative weight");
    for (int i = 0; i <= 5; ++i) {
        const double t = i / 5.0;
        svg::tick_x(out, f, t, x_lo + t * (x_hi - x_lo));
        svg::tick_y(out, f, t, t);
    }

    const int n = sweep.n_photons;
    // cumulative[i][k] = sum of x_0..x_{k-1} at ok-row i
    std::vector<std::vector<double>> cumulative(ok.size(),
                                                std::vector<double>(n + 2, 0.0));
    for (size_t i = 0; i < ok.size(); ++i)
        for (int k = 0; k <= n; ++k)
            cumulative[i][k + 1] =
                cumulative[i][k] + sweep.weights[ok[i]][static_cast<size_t>(k)];

    const auto& colors = svg::palette();
    for (int k = 0; k <= n; ++k) {
        std::ostringstream pts;
        for (size_t i = 0; i < ok.size(); ++i)
            pts << svg::fmt(f.x(tx(sweep.eta_grid[ok[i]]))) << ','
                << svg::fmt(f.y(cumulative[i][k + 1])) << ' ';
        for (size_t r = ok.size(); r-- > 0;)
            pts << svg::fmt(f.x(tx(sweep.eta_grid[ok[r]]))) << ','
                << svg::fmt(f.y(cumulative[r][k])) << ' ';
        const auto& color = colors[static_cast<size_t>(k) % colors.size()];
        out << "  <polygon fill=\"" << color
            << "\" fill-opacity=\"0.8\" stroke=\"none\" points=\"" << pts.str()
            << "\"/>\n";
        if (k < 12) {
            const double ly = f.top + 16.0 + 20.0 * k;
            out << "  <rect x=\"" << svg::fmt(f.width - f.right + 12) << "\" y=\""
                << svg::fmt(ly - 10) << "\" width=\"12\" height=\"12\" fill=\""
                << color << "\" fill-opacity=\"0.8\"/>\n";
            out << "  <text x=\"" << svg::fmt(f.width - f.right + 30) << "\" y=\""
                << svg::fmt(ly) << "\" font-size=\"12\">x_" << k << "</text>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace qfio
