#include "ace/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ace {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kMarginL = 70, kMarginR = 20, kMarginT = 40, kMarginB = 50;

const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                         "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

std::string renderSvgPlot(const std::string& title, const std::string& xLabel,
                          const std::string& yLabel,
                          const std::vector<Curve>& curves) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& c : curves) {
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            xmin = std::min(xmin, c.x[i]);
            xmax = std::max(xmax, c.x[i]);
            double b = i < c.band.size() ? c.band[i] : 0.0;
            ymin = std::min(ymin, c.y[i] - b);
            ymax = std::max(ymax, c.y[i] + b);
        }
    }
    if (!(xmin <= xmax)) {  // no data at all
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) {
        ymax = ymin + 1;
        ymin -= 1;
    }
    double px0 = kMarginL, px1 = kWidth - kMarginR;
    double py0 = kHeight - kMarginB, py1 = kMarginT;
    auto X = [&](double v) {
        return px0 + (v - xmin) / (xmax - xmin) * (px1 - px0);
    };
    auto Y = [&](double v) {
        return py0 + (v - ymin) / (ymax - ymin) * (py1 - py0);
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
       << "\" height=\"" << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
          "font-size=\"16\">"
       << title << "</text>\n";

    // Axes with 5 ticks each.
    os << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px1
       << "\" y2=\"" << py0 << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px0
       << "\" y2=\"" << py1 << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        double fx = xmin + (xmax - xmin) * t / 5.0;
        double fy = ymin + (ymax - ymin) * t / 5.0;
        os << "<text x=\"" << X(fx) << "\" y=\"" << py0 + 18
           << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(fx)
           << "</text>\n";
        os << "<text x=\"" << px0 - 6 << "\" y=\"" << Y(fy) + 3
           << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(fy)
           << "</text>\n";
    }
    os << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << kHeight - 10
       << "\" text-anchor=\"middle\" font-size=\"12\">" << xLabel
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << (py0 + py1) / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 "
          "16 "
       << (py0 + py1) / 2 << ")\">" << yLabel << "</text>\n";

    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const auto& c = curves[ci];
        const char* color = kColors[ci % 8];
        if (c.x.empty()) continue;
        if (!c.band.empty()) {
            std::ostringstream path;
            path << "M";
            for (std::size_t i = 0; i < c.x.size(); ++i)
                path << ' ' << fmt(X(c.x[i])) << ' '
                     << fmt(Y(c.y[i] + c.band[i]));
            for (std::size_t i = c.x.size(); i-- > 0;)
                path << " L " << fmt(X(c.x[i])) << ' '
                     << fmt(Y(c.y[i] - c.band[i]));
            path << " Z";
            os << "<path d=\"" << path.str() << "\" fill=\"" << color
               << "\" opacity=\"0.15\" stroke=\"none\"/>\n";
        }
        if (c.x.size() == 1) {
            os << "<circle cx=\"" << fmt(X(c.x[0])) << "\" cy=\""
               << fmt(Y(c.y[0])) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        } else {
            os << "<polyline fill=\"none\" stroke=\"" << color
               << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < c.x.size(); ++i)
                os << fmt(X(c.x[i])) << ',' << fmt(Y(c.y[i])) << ' ';
            os << "\"/>\n";
        }
        os << "<text x=\"" << px1 - 8 << "\" y=\""
           << py1 + 14 + 14 * static_cast<double>(ci)
           << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color
           << "\">" << c.label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace ace
