#pragma once

// Exact validity checker for chain triangulations, independent of the construction.

#include <random>
#include <string>

#include "lipgeo/hull.hpp"

namespace checker {

using lipgeo::Rational;
using lipgeo::RationalPoint;

inline Rational cross(const RationalPoint& o, const RationalPoint& a, const RationalPoint& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Separating axis test on closed triangles; true when interiors overlap.
inline bool interiors_overlap(const std::vector<RationalPoint>& p, std::array<int, 3> s, std::array<int, 3> t) {
    auto separated_by = [&](std::array<int, 3> a, std::array<int, 3> b) {
        for (int k = 0; k < 3; ++k) {
            const auto &u = p[a[k]], &v = p[a[(k + 1) % 3]];
            bool all_out = true;
            for (int q : b)
                if (cross(u, v, p[q]) > 0) all_out = false;
            if (all_out) return true;
        }
        return false;
    };
    return !separated_by(s, t) && !separated_by(t, s);
}

inline std::string validate(const std::vector<RationalPoint>& p, const lipgeo::ChainTriangulation& T) {
    size_t n = p.size();
    Rational tri_area = 0;
    std::set<lipgeo::Edge> from_triangles;
    std::vector<bool> used(n);
    for (auto& t : T.triangles) {
        Rational a = cross(p[t[0]], p[t[1]], p[t[2]]);
        if (a <= 0) return "triangle not ccw or degenerate";
        tri_area += a;
        for (int k = 0; k < 3; ++k) {
            from_triangles.insert(lipgeo::undirected(t[k], t[(k + 1) % 3]));
            used[t[k]] = true;
        }
    }
    // hull by gift wrapping
    std::vector<int> hull;
    int start = 0;
    for (size_t i = 1; i < n; ++i)
        if (p[i].x < p[start].x || (p[i].x == p[start].x && p[i].y < p[start].y)) start = int(i);
    int cur = start;
    do {
        hull.push_back(cur);
        int cand = (cur + 1) % int(n);
        for (int i = 0; i < int(n); ++i)
            if (cross(p[cur], p[cand], p[i]) < 0) cand = i;
        cur = cand;
    } while (cur != start && hull.size() <= n);
    Rational hull_area = 0;
    for (size_t i = 0; i < hull.size(); ++i) hull_area += cross(p[hull[0]], p[hull[i]], p[hull[(i + 1) % hull.size()]]);
    if (tri_area != hull_area) return "triangle areas do not sum to hull area";
    for (size_t i = 0; i < T.triangles.size(); ++i)
        for (size_t j = i + 1; j < T.triangles.size(); ++j)
            if (interiors_overlap(p, T.triangles[i], T.triangles[j])) return "overlapping triangles";
    for (size_t i = 0; i < n; ++i)
        if (!used[i]) return "point not used";
    for (auto [a, b] : T.highlighted)
        if (!from_triangles.count(lipgeo::undirected(a, b))) return "chain edge missing";
    if (from_triangles != T.edges) return "edge set inconsistent with triangles";
    if (T.triangles.size() != 2 * n - hull.size() - 2) return "triangle count identity fails";
    return "";
}

// Simple chains: star-shaped polygon order (open chains drop the closing edge); collinear triples rejected.
inline std::vector<RationalPoint> random_simple_chain(std::mt19937& rng, int n) {
    std::uniform_int_distribution<int> coord(-40, 40);
    for (;;) {
        std::vector<std::pair<double, RationalPoint>> pts;
        for (int i = 0; i < n; ++i) {
            int x = coord(rng), y = coord(rng);
            pts.push_back({std::atan2(double(y) + 0.31, double(x) + 0.17), {x, y}});
        }
        std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.first < b.first; });
        std::vector<RationalPoint> out;
        for (auto& [a, q] : pts) out.push_back(q);
        bool ok = true;
        for (int i = 0; i < n && ok; ++i)
            for (int j = i + 1; j < n && ok; ++j)
                for (int k = j + 1; k < n && ok; ++k)
                    if (cross(out[i], out[j], out[k]) == 0) ok = false;
        if (!ok) continue;
        // star shape around a point off the lattice: rotate to a random start
        std::rotate(out.begin(), out.begin() + std::uniform_int_distribution<int>(0, n - 1)(rng), out.end());
        // reject the rare case where the angular order is not simple
        lipgeo::RationalPoints rp{out};
        bool simple = true;
        for (int a = 0; a < n && simple; ++a)
            for (int b = a + 2; b < n && simple; ++b) {
                int a2 = (a + 1) % n, b2 = (b + 1) % n;
                if (b2 == a) continue;
                if (lipgeo::detail::proper_cross(rp, a, a2, b, b2)) simple = false;
            }
        if (simple) return out;
    }
}

} // namespace checker
