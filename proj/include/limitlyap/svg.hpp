#pragma once

// Minimal deterministic SVG emission for phase portraits (vector-field
// arrows plus overlaid trajectories). No timestamps or metadata.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "limitlyap/error.hpp"
#include "limitlyap/ode.hpp"
#include "limitlyap/system.hpp"

namespace limitlyap {

class SvgWriter {
public:
    SvgWriter(const Window& w, int pixels = 640) : window_(w), px_(pixels) {}

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width) {
        body_ << "<line x1=\"" << fmt(sx(x1)) << "\" y1=\"" << fmt(sy(y1)) << "\" x2=\""
              << fmt(sx(x2)) << "\" y2=\"" << fmt(sy(y2)) << "\" stroke=\"" << stroke
              << "\" stroke-width=\"" << fmt(width) << "\"/>\n";
    }

    void circle(double x, double y, double radius_px, const std::string& fill) {
        body_ << "<circle cx=\"" << fmt(sx(x)) << "\" cy=\"" << fmt(sy(y)) << "\" r=\""
              << fmt(radius_px) << "\" fill=\"" << fill << "\"/>\n";
    }

    void polyline(const std::vector<State>& points, const std::string& stroke, double width) {
        body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
              << fmt(width) << "\" points=\"";
        for (size_t i = 0; i < points.size(); ++i) {
            if (i) body_ << ' ';
            body_ << fmt(sx(points[i][0])) << ',' << fmt(sy(points[i][1]));
        }
        body_ << "\"/>\n";
    }

    // arrow with a fixed-length head, world coordinates
    void arrow(double x, double y, double dx, double dy, const std::string& stroke) {
        double x2 = x + dx, y2 = y + dy;
        line(x, y, x2, y2, stroke, 1.0);
        double len = std::hypot(dx, dy);
        if (len <= 0.0) return;
        double ux = dx / len, uy = dy / len;
        double head = 0.35 * len;
        line(x2, y2, x2 - head * (ux * 0.866 - uy * 0.5), y2 - head * (uy * 0.866 + ux * 0.5),
             stroke, 1.0);
        line(x2, y2, x2 - head * (ux * 0.866 + uy * 0.5), y2 - head * (uy * 0.866 - ux * 0.5),
             stroke, 1.0);
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cli/io", "cannot write '" + path + "'");
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px_ << "\" height=\""
            << px_ << "\" viewBox=\"0 0 " << px_ << ' ' << px_ << "\">\n"
            << "<rect width=\"" << px_ << "\" height=\"" << px_ << "\" fill=\"white\"/>\n"
            << body_.str() << "</svg>\n";
    }

private:
    double sx(double x) const {
        return (x - window_.xmin) / (window_.xmax - window_.xmin) * px_;
    }
    double sy(double y) const {
        return (window_.ymax - y) / (window_.ymax - window_.ymin) * px_;
    }
    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return buf;
    }

    Window window_;
    int px_;
    std::ostringstream body_;
};

// Phase-portrait figure: normalized arrows on the sample grid plus
// trajectories.
inline void write_portrait_svg(const std::string& path, const VectorFieldGrid& grid,
                               const std::vector<Trajectory>& trajectories) {
    SvgWriter svg(grid.window);
    double cell = std::min((grid.window.xmax - grid.window.xmin) / grid.nx,
                           (grid.window.ymax - grid.window.ymin) / grid.ny);
    double max_norm = 0.0;
    for (const auto& row : grid.rows)
        if (row.ok) max_norm = std::max(max_norm, std::hypot(row.fx, row.fy));
    for (const auto& row : grid.rows) {
        if (!row.ok) continue;
        double norm = std::hypot(row.fx, row.fy);
        if (norm == 0.0 || max_norm == 0.0) {
            svg.circle(row.x, row.y, 1.5, "#888888");
            continue;
        }
        double scale = 0.8 * cell * (0.25 + 0.75 * norm / max_norm) / norm;
        svg.arrow(row.x, row.y, row.fx * scale, row.fy * scale, "#3366aa");
    }
    for (const auto& traj : trajectories) svg.polyline(traj.states, "#cc3322", 1.5);
    svg.write(path);
}

} // namespace limitlyap
