#pragma once

// Deterministic SVG figures: precision-recall curves and latency vs PR-AUC.
// Fixed canvas, fixed palette, fixed two-decimal coordinates, so equal input
// always yields byte-identical output.

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "trapsift/error.hpp"
#include "trapsift/metrics.hpp"

namespace trapsift::plot {

inline constexpr int kWidth = 640;
inline constexpr int kHeight = 480;
inline constexpr int kLeft = 70;
inline constexpr int kRight = 190; // legend column
inline constexpr int kTop = 30;
inline constexpr int kBottom = 60;

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                           "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct NamedCurve {
    std::string label;
    PRCurve curve;
};

struct ScatterPoint {
    std::string label;
    double latency_ms = 0;
    double pr_auc = 0;
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
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

struct Frame {
    double x_min, x_max, y_min, y_max;

    double px(double x) const {
        const double w = kWidth - kLeft - kRight;
        return kLeft + (x - x_min) / (x_max - x_min) * w;
    }
    double py(double y) const {
        const double h = kHeight - kTop - kBottom;
        return kTop + (1.0 - (y - y_min) / (y_max - y_min)) * h;
    }
};

inline std::string header() {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) + "\" height=\"" +
           std::to_string(kHeight) + "\" viewBox=\"0 0 " + std::to_string(kWidth) + " " + std::to_string(kHeight) +
           "\" font-family=\"sans-serif\" font-size=\"12\">\n"
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label, int ticks) {
    std::string s;
    const double x0 = f.px(f.x_min), x1 = f.px(f.x_max), y0 = f.py(f.y_min), y1 = f.py(f.y_max);
    s += "<g stroke=\"#888\" stroke-width=\"1\">\n";
    s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y0) + "\"/>\n";
    s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y1) + "\"/>\n";
    s += "</g>\n";
    for (int i = 0; i <= ticks; ++i) {
        const double xv = f.x_min + (f.x_max - f.x_min) * i / ticks;
        const double yv = f.y_min + (f.y_max - f.y_min) * i / ticks;
        s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(y0 + 18) + "\" text-anchor=\"middle\">" + num(xv) +
             "</text>\n";
        s += "<text x=\"" + num(x0 - 8) + "\" y=\"" + num(f.py(yv) + 4) + "\" text-anchor=\"end\">" + num(yv) +
             "</text>\n";
    }
    s += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 15.0) + "\" text-anchor=\"middle\">" +
         escape_xml(x_label) + "</text>\n";
    s += "<text x=\"18\" y=\"" + num((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         num((y0 + y1) / 2) + ")\">" + escape_xml(y_label) + "</text>\n";
    return s;
}

inline std::string legend_entry(std::size_t i, const std::string& text) {
    const double x = kWidth - kRight + 15;
    const double y = kTop + 10 + 20.0 * static_cast<double>(i);
    const char* color = kPalette[i % std::size(kPalette)];
    return "<g class=\"legend\"><rect x=\"" + num(x) + "\" y=\"" + num(y - 9) + "\" width=\"12\" height=\"12\" fill=\"" +
           color + "\"/><text x=\"" + num(x + 18) + "\" y=\"" + num(y + 1) + "\">" + escape_xml(text) +
           "</text></g>\n";
}

} // namespace detail

/// Precision (y) against recall (x), one polyline per curve, legend annotated with PR-AUC.
inline std::string pr_curves_svg(const std::vector<NamedCurve>& curves, const std::string& title = "Precision-recall, nonempty class") {
    if (curves.empty()) throw ConfigError("no curves to plot");
    const detail::Frame f{0.0, 1.0, 0.0, 1.0};
    std::string s = detail::header();
    s += "<text x=\"" + detail::num(kLeft) + "\" y=\"18\" font-size=\"14\">" + detail::escape_xml(title) + "</text>\n";
    s += detail::axes(f, "Recall", "Precision", 5);
    for (std::size_t i = 0; i < curves.size(); ++i) {
        std::string pts;
        for (const auto& p : curves[i].curve.points) {
            if (!pts.empty()) pts += ' ';
            pts += detail::num(f.px(p.recall)) + "," + detail::num(f.py(p.precision));
        }
        s += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[i % std::size(kPalette)]) +
             "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    }
    for (std::size_t i = 0; i < curves.size(); ++i)
        s += detail::legend_entry(i, curves[i].label + " (AUC " + detail::num(pr_auc(curves[i].curve)) + ")");
    s += "</svg>\n";
    return s;
}

/// Latency (x, ms) against PR-AUC (y), one marker per run.
inline std::string latency_auc_svg(const std::vector<ScatterPoint>& points, const std::string& title = "Latency vs PR-AUC") {
    if (points.empty()) throw ConfigError("no points to plot");
    double max_latency = 0;
    for (const auto& p : points) max_latency = std::max(max_latency, p.latency_ms);
    const detail::Frame f{0.0, max_latency > 0 ? max_latency * 1.1 : 1.0, 0.0, 1.0};
    std::string s = detail::header();
    s += "<text x=\"" + detail::num(kLeft) + "\" y=\"18\" font-size=\"14\">" + detail::escape_xml(title) + "</text>\n";
    s += detail::axes(f, "Latency (ms)", "PR-AUC", 5);
    for (std::size_t i = 0; i < points.size(); ++i) {
        s += "<circle cx=\"" + detail::num(f.px(points[i].latency_ms)) + "\" cy=\"" + detail::num(f.py(points[i].pr_auc)) +
             "\" r=\"5\" fill=\"" + std::string(kPalette[i % std::size(kPalette)]) + "\"/>\n";
    }
    for (std::size_t i = 0; i < points.size(); ++i)
        s += detail::legend_entry(i, points[i].label + " (" + detail::num(points[i].latency_ms) + " ms, " +
                                         detail::num(points[i].pr_auc) + ")");
    s += "</svg>\n";
    return s;
}

} // namespace trapsift::plot
