#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lipgeo/germ.hpp"

namespace lipgeo {

// Static SVG 1.1 pictures of plane links. Coordinates are normalized into a fixed pixel box
// (the links live at scale t, far below anything a viewer would draw directly).
struct SvgStyle {
    double size = 640;     // pixels, square canvas
    double margin = 0.06;  // fraction of the canvas left empty around the drawing
    double stroke = 1.6;
    double dot = 3.0;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += ch;
        }
    return out;
}

inline std::string num(double v) {
    if (!std::isfinite(v)) v = 0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

// Distinguishable colours for components, cycled.
inline const char* palette(size_t i) {
    static const char* c[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};
    return c[i % (sizeof c / sizeof c[0])];
}

struct Frame {
    double cx = 0, cy = 0, scale = 1, size = 640;
    Point2 map(Point2 p) const { return {size / 2 + (p.x - cx) * scale, size / 2 - (p.y - cy) * scale}; }
};

// Auto fit: the bounding box of all points, centred, uniform scale.
inline Frame fit(const std::vector<Point2>& pts, const SvgStyle& st) {
    Frame f;
    f.size = st.size;
    if (pts.empty()) return f;
    double lx = std::numeric_limits<double>::infinity(), ly = lx, hx = -lx, hy = -lx;
    for (auto& p : pts) {
        lx = std::min(lx, p.x), hx = std::max(hx, p.x);
        ly = std::min(ly, p.y), hy = std::max(hy, p.y);
    }
    f.cx = (lx + hx) / 2;
    f.cy = (ly + hy) / 2;
    double span = std::max(hx - lx, hy - ly);
    f.scale = span > 0 ? st.size * (1 - 2 * st.margin) / span : 1;
    return f;
}

} // namespace detail

inline std::string render_link_svg(const PlaneLink& L, const std::string& title, const SvgStyle& st = {}) {
    std::vector<Point2> all;
    for (auto& c : L.components) all.insert(all.end(), c.points.begin(), c.points.end());
    auto fr = detail::fit(all, st);
    std::ostringstream os;
    std::string sz = detail::num(st.size);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << sz << "\" height=\"" << sz
       << "\" viewBox=\"0 0 " << sz << " " << sz << "\">\n";
    os << "  <title>" << detail::xml_escape(title) << "</title>\n";
    os << "  <desc>" << detail::xml_escape("plane link at t = " + std::to_string(L.t)) << "</desc>\n";
    os << "  <rect x=\"0\" y=\"0\" width=\"" << sz << "\" height=\"" << sz << "\" fill=\"#ffffff\"/>\n";
    for (size_t i = 0; i < L.components.size(); ++i) {
        const auto& c = L.components[i];
        os << "  <g id=\"component" << i << "\" stroke=\"" << detail::palette(i) << "\" fill=\""
           << detail::palette(i) << "\">\n";
        os << "    <" << (c.closed ? "polygon" : "polyline") << " fill=\"none\" stroke-width=\""
           << detail::num(st.stroke) << "\" points=\"";
        for (size_t k = 0; k < c.points.size(); ++k) {
            auto p = fr.map(c.points[k]);
            os << (k ? " " : "") << detail::num(p.x) << "," << detail::num(p.y);
        }
        os << "\"/>\n";
        for (auto& q : c.points) {
            auto p = fr.map(q);
            os << "    <circle cx=\"" << detail::num(p.x) << "\" cy=\"" << detail::num(p.y) << "\" r=\""
               << detail::num(st.dot) << "\" stroke=\"none\"/>\n";
        }
        os << "  </g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline std::string render_germ_svg(const PolygonalGerm& g, double t, const std::string& title, const SvgStyle& st = {}) {
    return render_link_svg(plane_link(g, t), title, st);
}

} // namespace lipgeo
