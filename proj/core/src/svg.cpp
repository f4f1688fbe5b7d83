#include "bandgraph/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "bandgraph/errors.hpp"

namespace bandgraph {

namespace {

struct Rgb {
    int r, g, b;
};

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
    auto mix = [t](int x, int y) {
        return static_cast<int>(std::lround(x + t * (y - x)));
    };
    return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

}  // namespace

void write_heatmap_svg(const std::string& path, const Eigen::MatrixXd& m,
                       const std::string& title, bool diverging,
                       bool skip_diagonal) {
    std::ofstream out(path);
    if (!out) throw IoError("write_heatmap_svg: cannot write '" + path + "'");

    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    const int cell = std::max(4, 600 / std::max(rows, cols));
    const int margin = 20;
    const int header = title.empty() ? 0 : 24;
    const int width = cols * cell + 2 * margin;
    const int height = rows * cell + 2 * margin + header + 16;

    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            if (skip_diagonal && i == j) continue;
            const double v = m(i, j);
            if (first || v < lo) lo = first ? v : std::min(lo, v);
            if (first || v > hi) hi = first ? v : std::max(hi, v);
            first = false;
        }
    if (first) lo = hi = 0.0;

    const Rgb white{255, 255, 255}, blue{33, 74, 156}, red{178, 34, 34};
    auto color = [&](double v) -> Rgb {
        if (diverging) {
            const double scale = std::max(std::abs(lo), std::abs(hi));
            if (scale <= 0.0) return white;
            const double t = std::clamp(v / scale, -1.0, 1.0);
            return t >= 0.0 ? lerp(white, red, t) : lerp(white, blue, -t);
        }
        if (hi <= lo) return white;
        return lerp(white, blue, std::clamp((v - lo) / (hi - lo), 0.0, 1.0));
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    if (!title.empty())
        out << "  <text x=\"" << margin << "\" y=\"16\" font-family=\"sans-serif\" "
            << "font-size=\"14\">" << title << "</text>\n";
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            if (skip_diagonal && i == j) continue;
            const Rgb c = color(m(i, j));
            out << "  <rect x=\"" << margin + j * cell << "\" y=\""
                << margin + header + i * cell << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"rgb(" << c.r << "," << c.g
                << "," << c.b << ")\"/>\n";
        }
    out << "  <rect x=\"" << margin << "\" y=\"" << margin + header
        << "\" width=\"" << cols * cell << "\" height=\"" << rows * cell
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    out << "  <text x=\"" << margin << "\" y=\"" << height - 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">range [" << lo << ", "
        << hi << "]</text>\n";
    out << "</svg>\n";
}

}  // namespace bandgraph
