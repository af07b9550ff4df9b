#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "germ.hpp"

namespace lipgeo {

// lipgerm v1
//   header:     "lipgerm v1"
//   component:  "component open" | "component closed"
//   vertex:     "x = <series>; y = <series>"
//   comments start with '#'; blank lines are ignored.
inline std::vector<Component> parse_germ_components(std::istream& in,
                                                    const Rational& default_k = PuiseuxSeries::default_truncation) {
    std::string line;
    int lineno = 0;
    bool header = false;
    std::vector<Component> comps;
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
        line = trim(line);
        if (line.empty()) continue;
        auto where = " (line " + std::to_string(lineno) + ")";
        if (!header) {
            if (line != "lipgerm v1") fail(ErrorKind::ParseError, "expected header 'lipgerm v1'" + where);
            header = true;
            continue;
        }
        if (line.rfind("component", 0) == 0) {
            auto kind = trim(line.substr(9));
            if (kind != "open" && kind != "closed") fail(ErrorKind::ParseError, "component must be open or closed" + where);
            comps.push_back({{}, kind == "closed"});
            continue;
        }
        if (comps.empty()) fail(ErrorKind::ParseError, "vertex before any component" + where);
        auto semi = line.find(';');
        if (semi == std::string::npos) fail(ErrorKind::ParseError, "expected 'x = ...; y = ...'" + where);
        auto lhs = trim(line.substr(0, semi)), rhs = trim(line.substr(semi + 1));
        auto value = [&](const std::string& part, char var) {
            auto eq = part.find('=');
            if (eq == std::string::npos || trim(part.substr(0, eq)) != std::string(1, var))
                fail(ErrorKind::ParseError, std::string("expected '") + var + " = ...'" + where);
            try {
                return parse_series(trim(part.substr(eq + 1)), default_k);
            } catch (const Error& e) {
                fail(ErrorKind::ParseError, std::string(e.what()) + where);
            }
        };
        comps.back().vertices.push_back({value(lhs, 'x'), value(rhs, 'y')});
    }
    if (!header) fail(ErrorKind::ParseError, "missing header 'lipgerm v1'");
    return comps;
}

inline PolygonalGerm read_germ(std::istream& in, GridOptions opts = {},
                               const Rational& default_k = PuiseuxSeries::default_truncation) {
    return make_polygonal_germ(parse_germ_components(in, default_k), opts);
}

inline PolygonalGerm read_germ_file(const std::string& path, GridOptions opts = {},
                                    const Rational& default_k = PuiseuxSeries::default_truncation) {
    std::ifstream f(path);
    if (!f) fail(ErrorKind::ParseError, "cannot open " + path);
    return read_germ(f, opts, default_k);
}

inline PolygonalGerm parse_germ(const std::string& text, GridOptions opts = {},
                                const Rational& default_k = PuiseuxSeries::default_truncation) {
    std::istringstream in(text);
    return read_germ(in, opts, default_k);
}

inline std::string write_germ(const std::vector<Component>& comps) {
    std::string out = "lipgerm v1\n";
    for (auto& c : comps) {
        out += c.closed ? "component closed\n" : "component open\n";
        for (auto& v : c.vertices) out += v.str() + "\n";
    }
    return out;
}

inline std::string write_germ(const PolygonalGerm& g) { return write_germ(g.components()); }

} // namespace lipgeo
