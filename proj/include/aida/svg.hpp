#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aida/errors.hpp"
#include "aida/explain.hpp"

namespace aida {

// Stacked horizontal boxplots, one row per feature-subspace prefix, drawn
// without any plotting framework. The red cross marks the query's own zero
// distance; the row label names the newest feature of the prefix.
inline std::string dpp_svg(const DppSummary& summary, const std::vector<std::string>& feature_names) {
    constexpr int kRowHeight = 34;
    constexpr int kBoxHalf = 9;
    constexpr int kMarginLeft = 150;
    constexpr int kMarginRight = 30;
    constexpr int kPlotWidth = 640;
    constexpr int kMarginTop = 24;

    const std::size_t rows = summary.per_prefix.size();
    double hi = 0.0;
    for (const auto& b : summary.per_prefix) hi = std::max(hi, b.upper_whisker);
    for (const auto& b : summary.per_prefix) hi = std::max(hi, b.q3);
    if (hi <= 0.0) hi = 1.0;
    const auto x_of = [&](double v) {
        return kMarginLeft + v / hi * kPlotWidth;
    };

    const int width = kMarginLeft + kPlotWidth + kMarginRight;
    const int height = kMarginTop + static_cast<int>(rows) * kRowHeight + 20;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "<style>text{font-family:sans-serif;font-size:11px;}line,rect{stroke:#333;fill:none;}"
           "rect.box{fill:#9ecae1;}</style>\n";
    for (std::size_t m = 0; m < rows; ++m) {
        const auto& b = summary.per_prefix[m];
        const double cy = kMarginTop + (static_cast<double>(m) + 0.5) * kRowHeight;
        const double y0 = cy - kBoxHalf;
        const double y1 = cy + kBoxHalf;
        std::string label = std::to_string(m + 1) + " feature" + (m == 0 ? "" : "s");
        const std::size_t f = summary.feature_order[m];
        if (f < feature_names.size()) label += " (+" + feature_names[f] + ")";
        svg << "<text x=\"4\" y=\"" << cy + 4 << "\">" << label << "</text>\n";
        // whiskers
        svg << "<line x1=\"" << x_of(b.lower_whisker) << "\" y1=\"" << cy << "\" x2=\"" << x_of(b.q1)
            << "\" y2=\"" << cy << "\"/>\n";
        svg << "<line x1=\"" << x_of(b.q3) << "\" y1=\"" << cy << "\" x2=\"" << x_of(b.upper_whisker)
            << "\" y2=\"" << cy << "\"/>\n";
        svg << "<line x1=\"" << x_of(b.lower_whisker) << "\" y1=\"" << y0 << "\" x2=\""
            << x_of(b.lower_whisker) << "\" y2=\"" << y1 << "\"/>\n";
        svg << "<line x1=\"" << x_of(b.upper_whisker) << "\" y1=\"" << y0 << "\" x2=\""
            << x_of(b.upper_whisker) << "\" y2=\"" << y1 << "\"/>\n";
        // box and median
        svg << "<rect class=\"box\" x=\"" << x_of(b.q1) << "\" y=\"" << y0 << "\" width=\""
            << std::max(1.0, x_of(b.q3) - x_of(b.q1)) << "\" height=\"" << y1 - y0 << "\"/>\n";
        svg << "<line x1=\"" << x_of(b.median) << "\" y1=\"" << y0 << "\" x2=\"" << x_of(b.median)
            << "\" y2=\"" << y1 << "\"/>\n";
        // query marker at zero
        svg << "<path d=\"M " << x_of(0.0) - 4 << ' ' << cy - 4 << " L " << x_of(0.0) + 4 << ' '
            << cy + 4 << " M " << x_of(0.0) - 4 << ' ' << cy + 4 << " L " << x_of(0.0) + 4 << ' '
            << cy - 4 << "\" style=\"stroke:#d62728;stroke-width:1.5\"/>\n";
    }
    svg << "<line x1=\"" << kMarginLeft << "\" y1=\"" << height - 16 << "\" x2=\""
        << kMarginLeft + kPlotWidth << "\" y2=\"" << height - 16 << "\"/>\n";
    svg << "<text x=\"" << kMarginLeft << "\" y=\"" << height - 4 << "\">0</text>\n";
    svg << "<text x=\"" << kMarginLeft + kPlotWidth - 40 << "\" y=\"" << height - 4 << "\">"
        << csv::format_double(hi) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

inline void write_dpp_svg(const DppSummary& summary, const std::vector<std::string>& feature_names,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << dpp_svg(summary, feature_names);
}

}  // namespace aida
