#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "lipgeo/error.hpp"
#include "lipgeo/germ.hpp"
#include "lipgeo/metric.hpp"

namespace lipgeo {

// Random LNE polygonal germs with rational data. Order-one anchors carry the overall shape;
// some anchors grow small zigzag clusters at a higher exponent toward the next anchor, and the
// whole germ may be scaled by t^shift so the minimal exponent varies.
struct FuzzOptions {
    bool closed = true;
    int min_vertices = 3;
    int max_vertices = 10;
    int max_attempts = 500;
    bool allow_shift = true;
};

namespace detail {

inline Rational pick(std::mt19937_64& rng, const std::vector<Rational>& v) {
    return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
}

// gmp wants canonical fractions
inline Rational frac(long a, long b) {
    Rational r(a, b);
    r.canonicalize();
    return r;
}

inline int pick_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Rational point on the unit circle from a rational slope parameter.
inline std::pair<Rational, Rational> circle_point(const Rational& u) {
    Rational d = 1 + u * u;
    return {(1 - u * u) / d, 2 * u / d};
}

inline ArcGerm linear_arc(const Rational& x, const Rational& y) { return make_arc(x, 1, y, 1); }

// Cluster points strictly between p and q, at scale t^beta relative to the edge.
inline std::vector<ArcGerm> cluster(std::mt19937_64& rng, const ArcGerm& p, const ArcGerm& q, const Rational& beta,
                                    int count) {
    std::vector<ArcGerm> out;
    ArcGerm d = q - p;
    ArcGerm normal{-1 * d.y, d.x};
    auto scale = PuiseuxSeries::monomial(1, beta - 1);
    Rational s = 0;
    for (int k = 0; k < count; ++k) {
        s += pick(rng, {Rational(1, 2), Rational(3, 4), Rational(1)});
        Rational h = pick(rng, {Rational(-1, 2), Rational(0), Rational(1, 2), Rational(1, 3)});
        out.push_back(p + scale * (s * d + h * normal));
    }
    return out;
}

inline std::vector<ArcGerm> shifted(std::vector<ArcGerm> v, const Rational& shift) {
    if (shift == 0) return v;
    auto m = PuiseuxSeries::monomial(1, shift);
    for (auto& a : v) a = m * a;
    return v;
}

inline std::vector<ArcGerm> random_closed_chain(std::mt19937_64& rng, int n) {
    int anchors = pick_int(rng, 3, n);
    std::vector<std::pair<double, ArcGerm>> pts;
    std::set<Rational> used;
    while (int(pts.size()) < anchors) {
        Rational u = frac(pick_int(rng, -12, 12), pick_int(rng, 1, 6));
        if (used.count(u)) continue;
        used.insert(u);
        auto [c, s] = circle_point(u);
        Rational r = pick(rng, {Rational(1, 2), Rational(1), Rational(3, 2), Rational(2)});
        pts.push_back({std::atan2(s.get_d(), c.get_d()), linear_arc(r * c, r * s)});
    }
    std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.first < b.first; });
    std::vector<ArcGerm> base;
    for (auto& p : pts) base.push_back(p.second);
    std::vector<ArcGerm> out;
    int extra = n - anchors;
    for (int i = 0; i < anchors; ++i) {
        out.push_back(base[i]);
        if (extra > 0 && (i == anchors - 1 || pick_int(rng, 0, 1))) {
            int k = i == anchors - 1 ? extra : pick_int(rng, 1, extra);
            auto c = cluster(rng, base[i], base[(i + 1) % anchors], pick(rng, {Rational(3, 2), Rational(2), Rational(3)}), k);
            out.insert(out.end(), c.begin(), c.end());
            extra -= k;
        }
    }
    return out;
}

inline std::vector<ArcGerm> random_open_chain(std::mt19937_64& rng, int n) {
    int anchors = pick_int(rng, 2, n);
    std::vector<ArcGerm> base;
    for (int i = 0; i < anchors; ++i)
        base.push_back(linear_arc(Rational(i) + frac(pick_int(rng, 0, 2), 4), frac(pick_int(rng, -4, 4), 2)));
    std::vector<ArcGerm> out;
    int extra = n - anchors;
    for (int i = 0; i < anchors; ++i) {
        out.push_back(base[i]);
        if (i + 1 < anchors && extra > 0 && (i == anchors - 2 || pick_int(rng, 0, 1))) {
            int k = i == anchors - 2 ? extra : pick_int(rng, 1, extra);
            auto c = cluster(rng, base[i], base[i + 1], pick(rng, {Rational(3, 2), Rational(2), Rational(3)}), k);
            out.insert(out.end(), c.begin(), c.end());
            extra -= k;
        }
    }
    return out;
}

} // namespace detail

// Samples until a simple LNE germ comes out; the number of vertices is uniform in the range.
inline PolygonalGerm random_lne_germ(std::mt19937_64& rng, const FuzzOptions& opt = {}) {
    for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
        int lo = std::max(opt.min_vertices, opt.closed ? 3 : 2);
        int n = detail::pick_int(rng, lo, std::max(lo, opt.max_vertices));
        auto v = opt.closed ? detail::random_closed_chain(rng, n) : detail::random_open_chain(rng, n);
        Rational shift = opt.allow_shift ? detail::pick(rng, {Rational(0), Rational(0), Rational(1, 2), Rational(1)}) : 0;
        v = detail::shifted(std::move(v), shift);
        try {
            auto g = make_polygonal_germ({Component{v, opt.closed}});
            if (is_lne(g).status == LneStatus::LNE) return g;
        } catch (const Error&) {
        }
    }
    fail(ErrorKind::NotFound, "no LNE germ within the attempt budget");
}

} // namespace lipgeo
