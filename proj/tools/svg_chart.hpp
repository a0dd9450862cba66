#pragma once

// Dependency-free SVG line charts for sweep outputs. The CSV stays the source
// of truth; these are quick-look plots.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace paccert_cli {

struct Series {
    std::string label;
    std::vector<double> y;
};

inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::vector<double>& x, const std::vector<Series>& series) {
    const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = x.front(), xmax = x.back();
    double ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (double v : s.y) {
            if (std::isfinite(v)) {
                ymin = std::min(ymin, v);
                ymax = std::max(ymax, v);
            }
        }
    if (!(ymax > ymin)) {
        ymax = ymin + 1.0;
        ymin -= 1.0;
    }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double v) { return H - mb - (v - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::ofstream out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    out << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
        << "' stroke='black'/>\n";
    out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
        << "' stroke='black'/>\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", xmin);
    out << "<text x='" << ml << "' y='" << H - mb + 20 << "' font-size='12'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", xmax);
    out << "<text x='" << W - mr << "' y='" << H - mb + 20
        << "' text-anchor='end' font-size='12'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", ymin);
    out << "<text x='" << ml - 6 << "' y='" << H - mb << "' text-anchor='end' font-size='12'>"
        << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", ymax);
    out << "<text x='" << ml - 6 << "' y='" << mt + 4 << "' text-anchor='end' font-size='12'>"
        << buf << "</text>\n";

    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    for (std::size_t si = 0; si < series.size(); ++si) {
        out << "<polyline fill='none' stroke='" << colors[si % 4] << "' stroke-width='2' points='";
        for (std::size_t i = 0; i < x.size() && i < series[si].y.size(); ++i)
            if (std::isfinite(series[si].y[i])) out << px(x[i]) << "," << py(series[si].y[i]) << " ";
        out << "'/>\n";
        out << "<text x='" << W - mr - 8 << "' y='" << mt + 18 * (si + 1)
            << "' text-anchor='end' font-size='12' fill='" << colors[si % 4] << "'>"
            << series[si].label << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace paccert_cli
