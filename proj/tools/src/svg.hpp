#pragma once

#include <string>
#include <vector>

namespace satorb::cli {

struct Polyline {
    std::vector<double> x;
    std::vector<double> y;
    std::string label;
    bool markStart = true;
};

struct Panel {
    std::string title;
    std::string xLabel;
    std::string yLabel;
    std::vector<Polyline> lines;
    bool equalAspect = true;
    bool points = false;  // markers instead of strokes
};

// Panels side by side in one static SVG document.
std::string render_svg(const std::vector<Panel>& panels, const std::string& title);

} // namespace satorb::cli
