#pragma once

// Precision-recall analysis for the nonempty (positive) class.
//
// Decision rule everywhere: an image is predicted nonempty iff score >= threshold.
// Candidate thresholds are the distinct observed scores; the curve additionally
// starts with a sentinel at +inf (nothing predicted nonempty).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "trapsift/csv.hpp"
#include "trapsift/error.hpp"
#include "trapsift/json_io.hpp"
#include "trapsift/scorestore.hpp"

namespace trapsift {

/// The one decision rule shared by metrics, simulation and the deployed filter.
constexpr bool predicts_nonempty(double score, double threshold) noexcept { return score >= threshold; }

inline constexpr double kDefaultTargetRecall = 0.96;
inline constexpr double kDefaultDegradationMargin = 0.05;

struct OperatingPoint {
    double threshold = 0;
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;
    double precision = 1;
    double recall = 0;
    double tnr = 0;

    bool operator==(const OperatingPoint&) const = default;
};

/// Ratios from counts. precision is 1 when nothing is predicted positive; recall and tnr are 0
/// when their class is absent.
inline OperatingPoint make_point(double threshold, std::uint64_t tp, std::uint64_t fp, std::uint64_t positives,
                                 std::uint64_t negatives) {
    OperatingPoint p;
    p.threshold = threshold;
    p.tp = tp;
    p.fp = fp;
    p.fn = positives - tp;
    p.tn = negatives - fp;
    p.precision = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    p.recall = positives == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(positives);
    p.tnr = negatives == 0 ? 0.0 : static_cast<double>(p.tn) / static_cast<double>(negatives);
    return p;
}

struct PRCurve {
    /// Strictly decreasing thresholds, first one +inf.
    std::vector<OperatingPoint> points;
};

struct CalibrationResult {
    double threshold = 0;
    OperatingPoint point;
    double target_recall = kDefaultTargetRecall;
    bool achieved = false;
};

struct DeltaReport {
    std::string run_a;
    std::string run_b;
    OperatingPoint point_a;
    OperatingPoint point_b;
    double precision_delta = 0;
    double tnr_delta = 0;
    double margin = kDefaultDegradationMargin;
    bool degraded = false;
};

namespace detail {

struct ClassTotals {
    std::uint64_t positives = 0;
    std::uint64_t negatives = 0;
};

inline ClassTotals totals(const EvalSet& e) {
    ClassTotals t;
    for (const auto& it : e.items) (it.label == Label::nonempty ? t.positives : t.negatives) += 1;
    return t;
}

/// One entry per distinct score, descending, with cumulative counts at that threshold.
struct TieGroup {
    double score;
    std::uint64_t tp;
    std::uint64_t fp;
};

inline std::vector<TieGroup> cumulative_groups(const EvalSet& e) {
    std::vector<std::pair<double, bool>> sorted;
    sorted.reserve(e.items.size());
    for (const auto& it : e.items) sorted.emplace_back(it.score, it.label == Label::nonempty);
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    std::vector<TieGroup> groups;
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        const double s = sorted[i].first;
        for (; i < sorted.size() && sorted[i].first == s; ++i) (sorted[i].second ? tp : fp) += 1;
        groups.push_back({s, tp, fp});
    }
    return groups;
}

} // namespace detail

inline PRCurve pr_curve(const EvalSet& e) {
    validate(e);
    const auto t = detail::totals(e);
    if (t.positives == 0 || t.negatives == 0)
        throw ValidationError("precision-recall curve needs both classes (nonempty=" + std::to_string(t.positives) +
                              ", empty=" + std::to_string(t.negatives) + ")");
    PRCurve c;
    const auto groups = detail::cumulative_groups(e);
    c.points.reserve(groups.size() + 1);
    c.points.push_back(make_point(std::numeric_limits<double>::infinity(), 0, 0, t.positives, t.negatives));
    for (const auto& g : groups) c.points.push_back(make_point(g.score, g.tp, g.fp, t.positives, t.negatives));
    return c;
}

inline OperatingPoint metrics_at(const EvalSet& e, double threshold) {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t positives = 0;
    std::uint64_t negatives = 0;
    for (const auto& it : e.items) {
        const bool positive = it.label == Label::nonempty;
        (positive ? positives : negatives) += 1;
        if (predicts_nonempty(it.score, threshold)) (positive ? tp : fp) += 1;
    }
    return make_point(threshold, tp, fp, positives, negatives);
}

/// Largest candidate threshold whose nonempty recall reaches `target_recall`.
inline CalibrationResult calibrate_threshold(const EvalSet& e, double target_recall = kDefaultTargetRecall) {
    if (!(target_recall > 0.0 && target_recall <= 1.0))
        throw ConfigError("target recall must be in (0, 1], got " + csv::format_real(target_recall));
    validate(e);
    const auto t = detail::totals(e);
    if (t.positives == 0) throw ValidationError("cannot calibrate: no nonempty images");

    const auto groups = detail::cumulative_groups(e);
    for (const auto& g : groups) {
        const auto p = make_point(g.score, g.tp, g.fp, t.positives, t.negatives);
        if (p.recall >= target_recall) return {g.score, p, target_recall, true};
    }
    // Unreachable with the >= rule: the smallest score admits every positive.
    const auto& last = groups.back();
    return {last.score, make_point(last.score, last.tp, last.fp, t.positives, t.negatives), target_recall, false};
}

/// Trapezoidal area over recall between consecutive curve points.
inline double pr_auc(const PRCurve& c) {
    double area = 0;
    for (std::size_t i = 1; i < c.points.size(); ++i) {
        const auto& a = c.points[i - 1];
        const auto& b = c.points[i];
        area += (b.recall - a.recall) * (a.precision + b.precision) / 2.0;
    }
    return area;
}

inline double pr_auc(const EvalSet& e) { return pr_auc(pr_curve(e)); }

/// Calibrates both runs independently; `b` is degraded when its TNR falls more than `margin` below `a`'s.
inline DeltaReport compare_runs(const EvalSet& a, const EvalSet& b, double target_recall = kDefaultTargetRecall,
                                double margin = kDefaultDegradationMargin) {
    if (!(margin >= 0.0)) throw ConfigError("degradation margin must be non-negative");
    DeltaReport d;
    d.point_a = calibrate_threshold(a, target_recall).point;
    d.point_b = calibrate_threshold(b, target_recall).point;
    d.precision_delta = d.point_b.precision - d.point_a.precision;
    d.tnr_delta = d.point_b.tnr - d.point_a.tnr;
    d.margin = margin;
    d.degraded = d.tnr_delta < -margin;
    return d;
}

// ---- serialization ------------------------------------------------------

inline Json real_json(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline Json to_json(const OperatingPoint& p) {
    return {{"threshold", real_json(p.threshold)},
            {"tp", p.tp},
            {"fp", p.fp},
            {"tn", p.tn},
            {"fn", p.fn},
            {"precision", p.precision},
            {"recall", p.recall},
            {"tnr", p.tnr}};
}

inline Json to_json(const CalibrationResult& c) {
    return {{"threshold", real_json(c.threshold)},
            {"point", to_json(c.point)},
            {"target_recall", c.target_recall},
            {"achieved", c.achieved}};
}

inline CalibrationResult calibration_from_json(const Json& j) {
    try {
        CalibrationResult c;
        c.threshold = j.at("threshold").get<double>();
        const Json& p = j.at("point");
        c.point = {p.at("threshold").get<double>(), p.at("tp").get<std::uint64_t>(), p.at("fp").get<std::uint64_t>(),
                   p.at("tn").get<std::uint64_t>(),  p.at("fn").get<std::uint64_t>(), p.at("precision").get<double>(),
                   p.at("recall").get<double>(),     p.at("tnr").get<double>()};
        c.target_recall = j.at("target_recall").get<double>();
        c.achieved = j.at("achieved").get<bool>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("calibration report: ") + e.what());
    }
}

inline Json to_json(const DeltaReport& d) {
    return {{"run_a", d.run_a},
            {"run_b", d.run_b},
            {"point_a", to_json(d.point_a)},
            {"point_b", to_json(d.point_b)},
            {"precision_delta", d.precision_delta},
            {"tnr_delta", d.tnr_delta},
            {"margin", d.margin},
            {"degraded", d.degraded}};
}

inline const csv::Row& curve_csv_header() {
    static const csv::Row header{"threshold", "tp", "fp", "tn", "fn", "precision", "recall", "tnr"};
    return header;
}

inline std::string curve_to_csv(const PRCurve& c) {
    std::string out = csv::format_row(curve_csv_header());
    for (const auto& p : c.points)
        out += csv::format_row({csv::format_real(p.threshold), std::to_string(p.tp), std::to_string(p.fp),
                                std::to_string(p.tn), std::to_string(p.fn), csv::format_real(p.precision),
                                csv::format_real(p.recall), csv::format_real(p.tnr)});
    return out;
}

inline PRCurve curve_from_csv(const std::string& text, const std::string& origin = "curve") {
    PRCurve c;
    auto count = [&](const std::string& s) {
        std::uint64_t v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
            throw ParseError(origin + ": not a count: '" + s + "'");
        return v;
    };
    for (const auto& row : csv::expect_header(csv::parse(text), curve_csv_header(), origin)) {
        OperatingPoint p;
        p.threshold = csv::parse_real(row[0], origin);
        p.tp = count(row[1]);
        p.fp = count(row[2]);
        p.tn = count(row[3]);
        p.fn = count(row[4]);
        p.precision = csv::parse_real(row[5], origin);
        p.recall = csv::parse_real(row[6], origin);
        p.tnr = csv::parse_real(row[7], origin);
        if (!c.points.empty() && !(p.threshold < c.points.back().threshold))
            throw ParseError(origin + ": thresholds must be strictly decreasing");
        c.points.push_back(p);
    }
    if (c.points.empty()) throw ParseError(origin + ": curve has no points");
    return c;
}

} // namespace trapsift
