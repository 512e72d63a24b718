#pragma once

#include <string>
#include <vector>

namespace ace {

// A single named curve for plotting.
struct Curve {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    // Optional band half-widths (same length as y) for +-band shading.
    std::vector<double> band;
};

// Renders curves into a self-contained SVG document with labeled axes.
// Deterministic output for fixed input; no external renderer needed.
std::string renderSvgPlot(const std::string& title, const std::string& xLabel,
                          const std::string& yLabel,
                          const std::vector<Curve>& curves);

}  // namespace ace
