#pragma once

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "error.hpp"
#include "rational.hpp"

namespace lipgeo {

// Point sets are accessed only through two predicates:
//   orient(i, j, k) in {-1, 0, 1} and less(i, j) (lexicographic order).
template <class P>
concept OrientedPointSet = requires(const P& p, int i) {
    { p.size() } -> std::convertible_to<size_t>;
    { p.orient(i, i, i) } -> std::convertible_to<int>;
    { p.less(i, i) } -> std::convertible_to<bool>;
};

struct RationalPoint {
    Rational x, y;
    friend bool operator==(const RationalPoint&, const RationalPoint&) = default;
};

struct RationalPoints {
    std::vector<RationalPoint> pts;
    size_t size() const { return pts.size(); }
    int orient(int i, int j, int k) const {
        const auto &a = pts[i], &b = pts[j], &c = pts[k];
        Rational v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        return sgn(v);
    }
    bool less(int i, int j) const {
        return pts[i].x < pts[j].x || (pts[i].x == pts[j].x && pts[i].y < pts[j].y);
    }
};

using Edge = std::pair<int, int>;
inline Edge undirected(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

struct ChainTriangulation {
    size_t n = 0;
    bool closed = false;
    std::vector<int> hull;                 // ccw
    std::set<Edge> edges;                  // the index pairs I
    std::vector<std::array<int, 3>> triangles;  // ccw
    std::vector<Edge> highlighted;         // chain edges

    bool is_chain_edge(int a, int b) const {
        int lo = std::min(a, b), hi = std::max(a, b);
        if (hi - lo == 1) return true;
        return closed && lo == 0 && hi == int(n) - 1;
    }
};

template <OrientedPointSet P>
std::vector<int> convex_hull(const P& ps) {
    int n = int(ps.size());
    if (n < 3) fail(ErrorKind::AllCollinear, "fewer than three points");
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return ps.less(a, b); });
    for (int i = 0; i + 1 < n; ++i)
        if (!ps.less(idx[i], idx[i + 1])) fail(ErrorKind::AllCollinear, "duplicate points");
    std::vector<int> h(2 * n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
        while (k >= 2 && ps.orient(h[k - 2], h[k - 1], idx[i]) <= 0) --k;
        h[k++] = idx[i];
    }
    for (int i = n - 2, lo = k + 1; i >= 0; --i) {
        while (k >= lo && ps.orient(h[k - 2], h[k - 1], idx[i]) <= 0) --k;
        h[k++] = idx[i];
    }
    h.resize(k - 1);
    if (h.size() < 3) fail(ErrorKind::AllCollinear, "all points collinear");
    return h;
}

namespace detail {

template <OrientedPointSet P>
bool proper_cross(const P& ps, int a, int b, int c, int d) {
    return ps.orient(a, b, c) * ps.orient(a, b, d) < 0 && ps.orient(c, d, a) * ps.orient(c, d, b) < 0;
}

class TriangleStore {
public:
    explicit TriangleStore(std::vector<std::array<int, 3>>& tris) : tris_(tris) {
        for (size_t i = 0; i < tris_.size(); ++i) index(int(i));
    }
    void add(std::array<int, 3> t) {
        tris_.push_back(t);
        index(int(tris_.size()) - 1);
    }
    void replace(int i, std::array<int, 3> t) {
        unindex(i);
        tris_[i] = t;
        index(i);
    }
    const std::vector<int>& around(int a, int b) const {
        static const std::vector<int> none;
        auto it = by_edge_.find(undirected(a, b));
        return it == by_edge_.end() ? none : it->second;
    }
    bool has_edge(int a, int b) const { return !around(a, b).empty(); }
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (auto& [e, v] : by_edge_)
            if (!v.empty()) out.push_back(e);
        return out;
    }

private:
    void index(int i) {
        auto& t = tris_[i];
        for (int k = 0; k < 3; ++k) by_edge_[undirected(t[k], t[(k + 1) % 3])].push_back(i);
    }
    void unindex(int i) {
        auto& t = tris_[i];
        for (int k = 0; k < 3; ++k) {
            auto& v = by_edge_[undirected(t[k], t[(k + 1) % 3])];
            v.erase(std::find(v.begin(), v.end(), i));
        }
    }
    std::vector<std::array<int, 3>>& tris_;
    std::map<Edge, std::vector<int>> by_edge_;
};

} // namespace detail

// Triangulation of the convex hull whose edge set contains every chain edge.
template <OrientedPointSet P>
ChainTriangulation chain_hull_triangulation(const P& ps, bool closed) {
    int n = int(ps.size());
    if (n < 3) fail(ErrorKind::AllCollinear, "fewer than three points");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k)
                if (ps.orient(i, j, k) == 0)
                    fail(ErrorKind::CollinearTriple, "points " + std::to_string(i) + ", " + std::to_string(j) + ", " +
                                                         std::to_string(k) + " are collinear");
    ChainTriangulation T;
    T.n = n;
    T.closed = closed;
    for (int i = 0; i + 1 < n; ++i) T.highlighted.push_back({i, i + 1});
    if (closed) T.highlighted.push_back({n - 1, 0});
    for (size_t a = 0; a < T.highlighted.size(); ++a)
        for (size_t b = a + 1; b < T.highlighted.size(); ++b) {
            auto [p, q] = T.highlighted[a];
            auto [r, s] = T.highlighted[b];
            if (p == r || p == s || q == r || q == s) continue;
            if (detail::proper_cross(ps, p, q, r, s))
                fail(ErrorKind::SelfIntersectingChain, "chain edges cross");
        }
    T.hull = convex_hull(ps);

    // sweep in lexicographic order, fanning each point to the visible hull edges
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return ps.less(a, b); });
    std::vector<int> hull;
    {
        int a = order[0], b = order[1], c = order[2];
        if (ps.orient(a, b, c) < 0) std::swap(b, c);
        hull = {a, b, c};
        T.triangles.push_back({a, b, c});
    }
    for (int s = 3; s < n; ++s) {
        int p = order[s];
        int m = int(hull.size());
        std::vector<bool> vis(m);
        for (int i = 0; i < m; ++i) vis[i] = ps.orient(hull[i], hull[(i + 1) % m], p) < 0;
        int start = -1;
        for (int i = 0; i < m; ++i)
            if (vis[i] && !vis[(i + m - 1) % m]) start = i;
        std::vector<int> next;
        int i = start;
        while (vis[i % m]) {
            int a = hull[i % m], b = hull[(i + 1) % m];
            T.triangles.push_back({b, a, p});
            ++i;
        }
        // keep hull[i % m] .. hull[start] (ccw), then p
        for (int k = i % m;; k = (k + 1) % m) {
            next.push_back(hull[k]);
            if (k == start) break;
        }
        next.push_back(p);
        hull = std::move(next);
    }

    // recover chain edges by flipping crossing diagonals
    detail::TriangleStore store(T.triangles);
    for (auto [u, v] : T.highlighted) {
        if (store.has_edge(u, v)) continue;
        std::deque<Edge> crossing;
        for (auto e : store.edges())
            if (e.first != u && e.first != v && e.second != u && e.second != v &&
                detail::proper_cross(ps, u, v, e.first, e.second))
                crossing.push_back(e);
        size_t stall = 0;
        while (!crossing.empty()) {
            auto [a, b] = crossing.front();
            crossing.pop_front();
            const auto& adj = store.around(a, b);
            if (adj.size() != 2) fail(ErrorKind::NotFound, "constraint recovery lost an edge");
            int t1 = adj[0], t2 = adj[1];
            auto third = [&](int t) {
                for (int x : T.triangles[t])
                    if (x != a && x != b) return x;
                return -1;
            };
            int c = third(t1), d = third(t2);
            if (!detail::proper_cross(ps, a, b, c, d)) {
                crossing.push_back({a, b});
                if (++stall > 4 * crossing.size() + 8) fail(ErrorKind::NotFound, "constraint recovery stalled");
                continue;
            }
            stall = 0;
            // ccw quad is a, x, b, y with x right of a->b
            int x = ps.orient(a, b, c) < 0 ? c : d;
            int y = x == c ? d : c;
            store.replace(t1, {a, x, y});
            store.replace(t2, {x, b, y});
            if (x != u && x != v && y != u && y != v && detail::proper_cross(ps, u, v, x, y))
                crossing.push_back(undirected(x, y));
        }
    }
    for (auto e : store.edges()) T.edges.insert(e);
    for (auto [u, v] : T.highlighted)
        if (!T.edges.count(undirected(u, v))) fail(ErrorKind::NotFound, "chain edge missing from triangulation");
    return T;
}

inline ChainTriangulation chain_hull_triangulation(const std::vector<RationalPoint>& pts, bool closed) {
    return chain_hull_triangulation(RationalPoints{pts}, closed);
}

// Build the triangle list of an abstract triangulation given only its edge set.
inline ChainTriangulation triangulation_from_edges(size_t n, const std::vector<Edge>& I, bool closed) {
    ChainTriangulation T;
    T.n = n;
    T.closed = closed;
    for (auto [a, b] : I) T.edges.insert(undirected(a, b));
    for (int i = 0; i + 1 < int(n); ++i) T.highlighted.push_back({i, i + 1});
    if (closed) T.highlighted.push_back({int(n) - 1, 0});
    for (int a = 0; a < int(n); ++a)
        for (int b = a + 1; b < int(n); ++b)
            for (int c = b + 1; c < int(n); ++c)
                if (T.edges.count({a, b}) && T.edges.count({b, c}) && T.edges.count({a, c}))
                    T.triangles.push_back({a, b, c});
    return T;
}

struct HighlightedTriangle {
    int triangle;
    int middle;  // the vertex shared by the two chain edges
};

inline HighlightedTriangle find_double_highlighted_triangle(const ChainTriangulation& T) {
    std::optional<HighlightedTriangle> best;
    for (size_t i = 0; i < T.triangles.size(); ++i) {
        auto& t = T.triangles[i];
        int count = 0;
        std::array<int, 3> deg{};
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            if (T.is_chain_edge(a, b)) {
                ++count;
                ++deg[k];
                ++deg[(k + 1) % 3];
            }
        }
        if (count != 2) continue;
        int mid = 0;
        for (int k = 0; k < 3; ++k)
            if (deg[k] == 2) mid = t[k];
        if (!best || mid < best->middle) best = HighlightedTriangle{int(i), mid};
    }
    if (!best) fail(ErrorKind::NotFound, "no triangle with exactly two chain edges");
    return *best;
}

} // namespace lipgeo
