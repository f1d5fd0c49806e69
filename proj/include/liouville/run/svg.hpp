#pragma once

// Self-contained SVG log-log scatter plots with a fitted line and annotation.
// Data points are embedded as plain circles; no external resources.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "liouville/core.hpp"

namespace liouville::run {

struct PlotSeries {
    std::vector<std::pair<double, double>> points;  // (x, y), both > 0 for log axes
    std::string label;
    std::string color = "#1f6fb2";
};

struct PlotLine {
    double slope = 0, intercept = 0;  // log y = slope log x + intercept
    std::string label;
    std::string color = "#c44e52";
};

inline std::string loglog_svg(const std::string& title, const std::string& xlabel,
                              const std::string& ylabel, const std::vector<PlotSeries>& series,
                              const std::vector<PlotLine>& lines) {
    const int W = 720, H = 520, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            if (x <= 0 || y <= 0) continue;
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmin >= xmax) { xmin /= 2; xmax = xmin * 4 + 1; }
    if (ymin >= ymax) { ymin /= 2; ymax = ymin * 4 + 1; }
    double lx0 = std::log10(xmin) - 0.08, lx1 = std::log10(xmax) + 0.08;
    double ly0 = std::log10(ymin) - 0.15, ly1 = std::log10(ymax) + 0.15;
    auto px = [&](double x) { return ml + (std::log10(x) - lx0) / (lx1 - lx0) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (std::log10(y) - ly0) / (ly1 - ly0) * (H - mt - mb); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    o << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">" << title << "</text>\n";
    // axes box
    o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
      << H - mt - mb << "\" fill=\"none\" stroke=\"#444\"/>\n";
    // decade grid
    for (int e = int(std::ceil(lx0)); e <= int(std::floor(lx1)); ++e) {
        double x = std::pow(10.0, e);
        o << "<line x1=\"" << px(x) << "\" y1=\"" << mt << "\" x2=\"" << px(x) << "\" y2=\""
          << H - mb << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << px(x) << "\" y=\"" << H - mb + 18
          << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">1e" << e
          << "</text>\n";
    }
    for (int e = int(std::ceil(ly0)); e <= int(std::floor(ly1)); ++e) {
        double y = std::pow(10.0, e);
        o << "<line x1=\"" << ml << "\" y1=\"" << py(y) << "\" x2=\"" << W - mr << "\" y2=\""
          << py(y) << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << ml - 8 << "\" y=\"" << py(y) + 4
          << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">1e" << e
          << "</text>\n";
    }
    o << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << xlabel
      << "</text>\n";
    o << "<text x=\"18\" y=\"" << H / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 18 " << H / 2 << ")\">" << ylabel << "</text>\n";

    for (const auto& ln : lines) {
        double yA = std::exp(ln.slope * std::log(std::pow(10, lx0 + 0.05)) + ln.intercept);
        double yB = std::exp(ln.slope * std::log(std::pow(10, lx1 - 0.05)) + ln.intercept);
        o << "<line x1=\"" << px(std::pow(10, lx0 + 0.05)) << "\" y1=\"" << py(yA) << "\" x2=\""
          << px(std::pow(10, lx1 - 0.05)) << "\" y2=\"" << py(yB) << "\" stroke=\"" << ln.color
          << "\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\"/>\n";
    }
    int legend_y = mt + 16;
    for (const auto& s : series) {
        for (auto [x, y] : s.points)
            if (x > 0 && y > 0)
                o << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3.5\" fill=\""
                  << s.color << "\"/>\n";
        o << "<circle cx=\"" << ml + 12 << "\" cy=\"" << legend_y - 4 << "\" r=\"3.5\" fill=\""
          << s.color << "\"/>\n";
        o << "<text x=\"" << ml + 22 << "\" y=\"" << legend_y
          << "\" font-size=\"12\" font-family=\"sans-serif\">" << s.label << "</text>\n";
        legend_y += 16;
    }
    for (const auto& ln : lines) {
        o << "<line x1=\"" << ml + 6 << "\" y1=\"" << legend_y - 4 << "\" x2=\"" << ml + 18
          << "\" y2=\"" << legend_y - 4 << "\" stroke=\"" << ln.color
          << "\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\"/>\n";
        o << "<text x=\"" << ml + 22 << "\" y=\"" << legend_y
          << "\" font-size=\"12\" font-family=\"sans-serif\">" << ln.label << "</text>\n";
        legend_y += 16;
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace liouville::run
