#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "trapsift/plot.hpp"

using namespace trapsift;
using testutil::eval_set;

namespace {

std::size_t occurrences(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
}

std::vector<std::pair<double, double>> polyline_points(const std::string& svg) {
    std::smatch m;
    EXPECT_TRUE(std::regex_search(svg, m, std::regex("points=\"([^\"]*)\"")));
    std::vector<std::pair<double, double>> out;
    std::istringstream in(m[1].str());
    std::string pair;
    while (in >> pair) {
        const auto comma = pair.find(',');
        out.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
    }
    return out;
}

} // namespace

TEST(PrCurvesSvg, Deterministic) {
    const std::vector<plot::NamedCurve> c{{"float", pr_curve(testutil::seven_item_fixture())}};
    EXPECT_EQ(plot::pr_curves_svg(c), plot::pr_curves_svg(c));
}

TEST(PrCurvesSvg, PerfectClassifierReachesTopRight) {
    const std::vector<plot::NamedCurve> c{{"perfect", pr_curve(eval_set({1.0, 1.0}, {0.0}))}};
    const auto svg = plot::pr_curves_svg(c);
    EXPECT_EQ(occurrences(svg, "<polyline"), 1u);
    // Plot area: recall 1 maps to x = width - right margin, precision 1 to y = top margin.
    const double x1 = plot::kWidth - plot::kRight, y1 = plot::kTop;
    const auto pts = polyline_points(svg);
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_TRUE(std::any_of(pts.begin(), pts.end(), [&](auto& p) { return p.first == x1 && p.second == y1; }));
    EXPECT_NE(svg.find("perfect (AUC 1.00)"), std::string::npos);
}

TEST(PrCurvesSvg, TwoCurvesTwoLegendEntries) {
    const std::vector<plot::NamedCurve> c{{"float", pr_curve(testutil::seven_item_fixture())},
                                          {"int8 <q>", pr_curve(eval_set({0.1, 0.2, 0.3}, {0.7, 0.8, 0.9}))}};
    const auto svg = plot::pr_curves_svg(c);
    EXPECT_EQ(occurrences(svg, "<g class=\"legend\">"), 2u);
    EXPECT_EQ(occurrences(svg, "<polyline"), 2u);
    EXPECT_NE(svg.find("float (AUC 0.73)"), std::string::npos);
    EXPECT_NE(svg.find("int8 &lt;q&gt; (AUC 0.30)"), std::string::npos);
    EXPECT_NE(svg.find(plot::kPalette[0]), std::string::npos);
    EXPECT_NE(svg.find(plot::kPalette[1]), std::string::npos);
}

TEST(PrCurvesSvg, EmptyInputIsConfigError) { EXPECT_THROW(plot::pr_curves_svg({}), ConfigError); }

TEST(LatencyAucSvg, OneMarkerPerPoint) {
    const std::vector<plot::ScatterPoint> pts{{"a", 12.5, 0.91}, {"b", 30.0, 0.95}, {"c", 5.0, 0.80}};
    const auto svg = plot::latency_auc_svg(pts);
    EXPECT_EQ(occurrences(svg, "<circle"), 3u);
    EXPECT_EQ(occurrences(svg, "<g class=\"legend\">"), 3u);
    EXPECT_EQ(svg, plot::latency_auc_svg(pts));
    EXPECT_NE(svg.find("b (30.00 ms, 0.95)"), std::string::npos);
    EXPECT_THROW(plot::latency_auc_svg({}), ConfigError);
}
