#include "hierid/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "hierid/csv.hpp"
#include "hierid/errors.hpp"

namespace hierid {

namespace {

struct Bounds {
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -std::numeric_limits<double>::infinity();
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();

    void grow(double x, double y) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    void pad() {
        if (!(xmax > xmin)) {
            xmin -= 1;
            xmax += 1;
        }
        if (!(ymax > ymin)) {
            ymin -= 1;
            ymax += 1;
        }
        const double dx = 0.05 * (xmax - xmin), dy = 0.05 * (ymax - ymin);
        xmin -= dx;
        xmax += dx;
        ymin -= dy;
        ymax += dy;
    }
};

std::vector<double> ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double mult : {1.0, 2.0, 5.0, 10.0})
        if (raw <= mult * mag) {
            step = mult * mag;
            break;
        }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
        out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return out;
}

}  // namespace

void SvgScatter::write(const std::filesystem::path& path) const {
    const double W = 640, H = 480, ML = 64, MR = 20, MT = 36, MB = 48;

    Bounds b;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) b.grow(x, y);
    for (const auto& m : markers) b.grow(m.x, m.y);
    if (!std::isfinite(b.xmin)) b = Bounds{0, 1, 0, 1};
    b.pad();

    auto px = [&](double x) { return ML + (x - b.xmin) / (b.xmax - b.xmin) * (W - ML - MR); };
    auto py = [&](double y) { return H - MB - (y - b.ymin) / (b.ymax - b.ymin) * (H - MT - MB); };

    std::ofstream os(path, std::ios::binary);
    if (!os) throw_io("cannot write " + path.string());
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
       << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

    // Axes and ticks.
    os << "<g stroke=\"#333\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
       << H - MB << "\"/>\n";
    os << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
       << "\"/>\n";
    for (double t : ticks(b.xmin, b.xmax)) {
        os << "<line x1=\"" << px(t) << "\" y1=\"" << H - MB << "\" x2=\"" << px(t) << "\" y2=\""
           << H - MB + 4 << "\"/>\n";
        os << "<text x=\"" << px(t) << "\" y=\"" << H - MB + 16
           << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333\">" << fmt_double(t)
           << "</text>\n";
    }
    for (double t : ticks(b.ymin, b.ymax)) {
        os << "<line x1=\"" << ML - 4 << "\" y1=\"" << py(t) << "\" x2=\"" << ML << "\" y2=\""
           << py(t) << "\"/>\n";
        os << "<text x=\"" << ML - 7 << "\" y=\"" << py(t) + 4
           << "\" text-anchor=\"end\" stroke=\"none\" fill=\"#333\">" << fmt_double(t)
           << "</text>\n";
    }
    os << "</g>\n";

    os << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << (MT + H - MB) / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 "
       << (MT + H - MB) / 2 << ")\">" << y_label << "</text>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
       << " font-size=\"14\">" << title << "</text>\n";

    for (const auto& s : series) {
        os << "<g fill=\"" << s.color << "\" fill-opacity=\"0.75\">\n";
        for (const auto& [x, y] : s.points)
            os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"" << s.radius
               << "\"/>\n";
        os << "</g>\n";
    }
    for (const auto& m : markers) {
        const double cx = px(m.x), cy = py(m.y), r = 6;
        os << "<polygon points=\"" << cx << "," << cy - r << " " << cx + r << "," << cy << " "
           << cx << "," << cy + r << " " << cx - r << "," << cy << "\" fill=\"none\" stroke=\""
           << m.color << "\" stroke-width=\"2\"/>\n";
    }
    os << "</svg>\n";
}

}  // namespace hierid
