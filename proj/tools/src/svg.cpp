#include "svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace satorb::cli {

namespace {

constexpr double kPanel = 420.0;
constexpr double kMargin = 50.0;
constexpr double kHeader = 40.0;

const char* colour(std::size_t k) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};
    return palette[k % 8];
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Box {
    double x0, x1, y0, y1;
};

Box bounds(const Panel& p) {
    Box b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& l : p.lines)
        for (std::size_t k = 0; k < l.x.size(); ++k) {
            if (!std::isfinite(l.x[k]) || !std::isfinite(l.y[k])) continue;
            b.x0 = std::min(b.x0, l.x[k]);
            b.x1 = std::max(b.x1, l.x[k]);
            b.y0 = std::min(b.y0, l.y[k]);
            b.y1 = std::max(b.y1, l.y[k]);
        }
    if (!std::isfinite(b.x0)) return {-1, 1, -1, 1};
    // Nearly stationary traces keep a span of 10% of their distance from the origin.
    const double floor = 0.1 * std::max({std::abs(b.x0), std::abs(b.x1), std::abs(b.y0), std::abs(b.y1), 1e-12});
    const double w = std::max(b.x1 - b.x0, floor);
    const double h = std::max(b.y1 - b.y0, floor);
    if (p.equalAspect) {
        const double s = std::max(w, h) * 0.55;
        const double cx = 0.5 * (b.x0 + b.x1);
        const double cy = 0.5 * (b.y0 + b.y1);
        return {cx - s, cx + s, cy - s, cy + s};
    }
    return {b.x0 - 0.05 * w, b.x1 + 0.05 * w, b.y0 - 0.05 * h, b.y1 + 0.05 * h};
}

void panel(std::string& out, const Panel& p, double ox) {
    const Box b = bounds(p);
    const double left = ox + kMargin;
    const double top = kHeader + 20.0;
    const double size = kPanel - 2 * kMargin;
    auto X = [&](double x) { return left + (x - b.x0) / (b.x1 - b.x0) * size; };
    auto Y = [&](double y) { return top + (b.y1 - y) / (b.y1 - b.y0) * size; };

    out += fmt::format(R"(<g><rect x="{:.2f}" y="{:.2f}" width="{:.2f}" height="{:.2f}" fill="none" stroke="#444"/>)",
                       left, top, size, size);
    out += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" text-anchor="middle" font-size="14">{}</text>)",
                       left + size / 2, top - 8, escape(p.title));
    out += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" text-anchor="middle" font-size="12">{}</text>)",
                       left + size / 2, top + size + 34, escape(p.xLabel));
    out += fmt::format(
        R"svg(<text x="{:.2f}" y="{:.2f}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.2f} {:.2f})">{}</text>)svg",
        left - 42, top + size / 2, left - 42, top + size / 2, escape(p.yLabel));
    for (int k = 0; k <= 4; ++k) {
        double fx = b.x0 + (b.x1 - b.x0) * k / 4.0;
        double fy = b.y0 + (b.y1 - b.y0) * k / 4.0;
        if (std::abs(fx) < 1e-9 * (b.x1 - b.x0)) fx = 0.0;
        if (std::abs(fy) < 1e-9 * (b.y1 - b.y0)) fy = 0.0;
        out += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" text-anchor="middle" font-size="9">{:.3g}</text>)", X(fx),
                           top + size + 14, fx);
        out += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" text-anchor="end" font-size="9">{:.3g}</text>)", left - 4,
                           Y(fy) + 3, fy);
    }
    for (std::size_t i = 0; i < p.lines.size(); ++i) {
        const Polyline& l = p.lines[i];
        if (l.x.empty()) continue;
        if (p.points) {
            for (std::size_t k = 0; k < l.x.size(); ++k)
                if (std::isfinite(l.y[k]))
                    out += fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="2.5" fill="{}"/>)", X(l.x[k]), Y(l.y[k]),
                                       colour(i));
        } else {
            std::string pts;
            for (std::size_t k = 0; k < l.x.size(); ++k) pts += fmt::format("{:.2f},{:.2f} ", X(l.x[k]), Y(l.y[k]));
            out += fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="1" points="{}"/>)", colour(i), pts);
            if (l.markStart)
                out += fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="3" fill="{}"/>)", X(l.x[0]), Y(l.y[0]),
                                   colour(i));
        }
        out += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="10" fill="{}">{}</text>)", left + 6,
                           top + 14 + 12 * i, colour(i), escape(l.label));
    }
    out += "</g>\n";
}

} // namespace

std::string render_svg(const std::vector<Panel>& panels, const std::string& title) {
    const double width = kPanel * std::max<std::size_t>(panels.size(), 1);
    const double height = kPanel + kHeader + 20.0;
    std::string out = fmt::format(
        R"(<svg xmlns="http://www.w3.org/2000/svg" width="{:.0f}" height="{:.0f}" viewBox="0 0 {:.0f} {:.0f}">)"
        "\n",
        width, height, width, height);
    out += fmt::format(R"(<rect width="100%" height="100%" fill="white"/>)"
                       "\n"
                       R"(<text x="{:.2f}" y="24" text-anchor="middle" font-size="16">{}</text>)"
                       "\n",
                       width / 2, escape(title));
    for (std::size_t k = 0; k < panels.size(); ++k) panel(out, panels[k], kPanel * k);
    out += "</svg>\n";
    return out;
}

} // namespace satorb::cli
