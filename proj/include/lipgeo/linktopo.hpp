#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lipgeo/error.hpp"
#include "lipgeo/germ.hpp"
#include "lipgeo/metric.hpp"

namespace lipgeo {

// ---- plane-link arrangement ---------------------------------------------------------

// Faces of the disk C_a(t) cut by the link. Half-edge 2e runs u -> v of germ edge e, 2e+1 back.
struct RegionFace {
    bool outer = false;                       // the face touching the disk boundary
    std::vector<std::vector<int>> cycles;     // boundary cycles of half-edges; [0] is the outer one unless `outer`
    std::vector<int> walls;                   // germ edge ids, with multiplicity
    PuiseuxSeries area;                       // signed area; unset for the outer face
    Rational area_exponent;
    double numeric_slope = 0;                 // log-log fit, filled by region_graph

    int slit_incidences() const {
        std::map<int, int> c;
        for (int w : walls) ++c[w];
        int s = 0;
        for (auto& [w, k] : c)
            if (k == 2) ++s;
        return s;
    }
    bool has_slit() const { return slit_incidences() > 0; }
};

struct RegionGraph {
    double t = 0;
    std::vector<RegionFace> faces;
    size_t walls = 0;

    // vertices - edges + faces of the subdivision of the disk (circle counted as one vertex and one edge)
    long euler_characteristic(size_t nodes) const {
        return long(nodes) + 1 - long(walls) - 1 + long(faces.size());
    }
    std::string signature() const {
        std::string s;
        for (auto& f : faces) {
            s += f.outer ? "O[" : "F[";
            for (auto& c : f.cycles) {
                for (int h : c) s += std::to_string(h) + ",";
                s += ";";
            }
            s += "]";
        }
        return s;
    }
};

namespace detail {

inline PuiseuxSeries cycle_area(const PolygonalGerm& g, const std::vector<int>& cyc) {
    const auto& N = g.nodes();
    const auto& E = g.edges();
    PuiseuxSeries twice;
    for (int h : cyc) {
        const auto& e = E[h / 2];
        const ArcGerm& a = N[h % 2 ? e.v : e.u];
        const ArcGerm& b = N[h % 2 ? e.u : e.v];
        twice = twice + (a.x * b.y - a.y * b.x);
    }
    return Rational(1, 2) * twice;
}

inline int half_tail(const PolygonalGerm& g, int h) { return h % 2 ? g.edges()[h / 2].v : g.edges()[h / 2].u; }
inline int half_head(const PolygonalGerm& g, int h) { return h % 2 ? g.edges()[h / 2].u : g.edges()[h / 2].v; }

inline bool point_in_polygon(Point2 p, const std::vector<Point2>& poly) {
    bool in = false;
    for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto &a = poly[i], &b = poly[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
    return in;
}

inline double disk_radius(const PolygonalGerm& g, double t) { return (std::ceil(g.cone_opening()) + 1) * t; }

// Canonical rotation of a cycle: smallest half-edge first.
inline std::vector<int> canonical_cycle(std::vector<int> c) {
    std::rotate(c.begin(), std::min_element(c.begin(), c.end()), c.end());
    return c;
}

} // namespace detail

inline RegionGraph arrangement(const PolygonalGerm& g, double t) {
    if (!(t > 0)) fail(ErrorKind::InvalidT, "t must be positive");
    const auto& N = g.nodes();
    const auto& E = g.edges();
    int H = 2 * static_cast<int>(E.size());
    // outgoing half-edges per node, ccw by angle of the exact difference series
    std::vector<std::vector<std::pair<double, int>>> out(N.size());
    for (int h = 0; h < H; ++h) {
        int u = detail::half_tail(g, h), v = detail::half_head(g, h);
        Point2 d = (N[v] - N[u]).at(t);
        out[u].push_back({std::atan2(d.y, d.x), h});
    }
    std::vector<int> next(H, -1);
    for (auto& o : out) std::sort(o.begin(), o.end());
    for (int h = 0; h < H; ++h) {
        int v = detail::half_head(g, h), twin = h ^ 1;
        auto& o = out[v];
        size_t k = 0;
        while (o[k].second != twin) ++k;
        next[h] = o[(k + o.size() - 1) % o.size()].second;
    }
    std::vector<std::vector<int>> cycles;
    std::vector<bool> seen(H, false);
    for (int h = 0; h < H; ++h) {
        if (seen[h]) continue;
        std::vector<int> c;
        for (int x = h; !seen[x]; x = next[x]) {
            seen[x] = true;
            c.push_back(x);
        }
        cycles.push_back(detail::canonical_cycle(std::move(c)));
    }
    std::sort(cycles.begin(), cycles.end());

    RegionGraph R;
    R.t = t;
    R.walls = E.size();
    std::vector<PuiseuxSeries> areas;
    std::vector<int> positive, holes;
    for (size_t i = 0; i < cycles.size(); ++i) {
        areas.push_back(detail::cycle_area(g, cycles[i]));
        (eventual_sign(areas.back()) > 0 ? positive : holes).push_back(int(i));
    }
    auto polygon = [&](int ci) {
        std::vector<Point2> p;
        for (int h : cycles[ci]) p.push_back(N[detail::half_tail(g, h)].at(t));
        return p;
    };
    auto nodes_of = [&](int ci) {
        std::set<int> s;
        for (int h : cycles[ci]) s.insert(detail::half_tail(g, h));
        return s;
    };
    std::map<int, int> face_of_cycle;
    for (int ci : positive) {
        RegionFace f;
        f.cycles.push_back(cycles[ci]);
        face_of_cycle[ci] = int(R.faces.size());
        R.faces.push_back(std::move(f));
    }
    RegionFace outer;
    outer.outer = true;
    for (int hi : holes) {
        // innermost positive cycle of another link component around the hole
        int node = detail::half_tail(g, cycles[hi].front());
        Point2 p = N[node].at(t);
        int best = -1;
        double best_area = 0;
        for (int ci : positive) {
            if (nodes_of(ci).count(node)) continue;
            auto poly = polygon(ci);
            if (!detail::point_in_polygon(p, poly)) continue;
            double a = areas[ci].eval(t);
            if (best < 0 || a < best_area) best = ci, best_area = a;
        }
        if (best < 0)
            outer.cycles.push_back(cycles[hi]);
        else
            R.faces[face_of_cycle[best]].cycles.push_back(cycles[hi]);
    }
    R.faces.push_back(std::move(outer));
    for (auto& f : R.faces) {
        for (auto& c : f.cycles)
            for (int h : c) f.walls.push_back(h / 2);
        std::sort(f.walls.begin(), f.walls.end());
        if (f.outer) {
            f.area_exponent = 2;  // the disk term dominates
            continue;
        }
        PuiseuxSeries a;
        for (auto& c : f.cycles) a = a + detail::cycle_area(g, c);
        if (a.is_zero()) fail(ErrorKind::ExponentUnstable, "face area vanishes to the working truncation");
        f.area = a;
        f.area_exponent = a.order();
    }
    return R;
}

namespace detail {

inline double face_numeric_area(const PolygonalGerm& g, const RegionFace& f, double t) {
    if (!f.outer) return f.area.eval(t);
    double R = disk_radius(g, t);
    double a = std::numbers::pi * R * R;
    for (auto& c : f.cycles) a += cycle_area(g, c).eval(t);
    return a;
}

// Least-squares slope of log(area) against log(t) on the finer half of the grid.
inline double loglog_slope(const std::vector<double>& ts, const std::vector<double>& as) {
    size_t from = ts.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (size_t i = from; i < ts.size(); ++i) {
        double x = std::log(ts[i]), y = std::log(as[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y, n += 1;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace detail

// Arrangement checked along the whole grid: identical combinatorics, Euler count,
// and face exponents confirmed by a numeric log-log fit.
inline RegionGraph region_graph(const PolygonalGerm& g, const std::vector<double>* grid = nullptr) {
    const auto& ts = grid ? *grid : g.grid();
    RegionGraph first = arrangement(g, ts.front());
    std::string sig = first.signature();
    for (double t : ts)
        if (arrangement(g, t).signature() != sig)
            fail(ErrorKind::UnstableCombinatorics, "arrangement changes at t = " + std::to_string(t));
    // components of the link graph decide the expected face count
    size_t n = g.nodes().size();
    std::vector<int> parent(n);
    for (size_t i = 0; i < n; ++i) parent[i] = int(i);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (auto& e : g.edges()) parent[find(e.u)] = find(e.v);
    long comps = 0;
    for (size_t i = 0; i < n; ++i) comps += find(int(i)) == int(i);
    // V - E + F = 1 + C for a planar graph with C components, plus the circle and its outside
    long expect = 1 + comps;
    long got = long(n) - long(g.edges().size()) + long(first.faces.size());
    if (got != expect) fail(ErrorKind::UnstableCombinatorics, "Euler count mismatch in the arrangement");
    for (auto& f : first.faces) {
        std::vector<double> as;
        for (double t : ts) as.push_back(detail::face_numeric_area(g, f, t));
        f.numeric_slope = detail::loglog_slope(ts, as);
        if (std::abs(f.numeric_slope - f.area_exponent.get_d()) > 0.05)
            fail(ErrorKind::ExponentUnstable, "face area slope " + std::to_string(f.numeric_slope) +
                                                  " disagrees with exponent " + f.area_exponent.get_str());
    }
    return first;
}

inline Rational face_area_exponent(const PolygonalGerm& g, const RegionFace& f) {
    (void)g;
    return f.area_exponent;
}

// ---- extended canonical tree ------------------------------------------------------------

struct ExtendedTree {
    std::vector<Rational> labels;
    std::vector<std::pair<int, int>> edges;

    size_t size() const { return labels.size(); }
    std::vector<std::vector<int>> adjacency() const {
        std::vector<std::vector<int>> adj(labels.size());
        for (auto [a, b] : edges) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        return adj;
    }
    bool is_tree() const {
        if (labels.empty()) return false;
        if (edges.size() + 1 != labels.size()) return false;
        auto adj = adjacency();
        std::vector<bool> seen(size(), false);
        std::vector<int> st{0};
        seen[0] = true;
        size_t count = 1;
        while (!st.empty()) {
            int v = st.back();
            st.pop_back();
            for (int w : adj[v])
                if (!seen[w]) seen[w] = true, ++count, st.push_back(w);
        }
        return count == size();
    }
};

inline ExtendedTree extended_tree(const PolygonalGerm& g) {
    for (auto& c : g.components())
        if (!c.closed) fail(ErrorKind::HasOpenComponents, "extended tree needs closed components");
    if (g.has_shared_vertices()) fail(ErrorKind::PreconditionFailed, "components share vertices");
    auto R = region_graph(g);
    ExtendedTree T;
    for (auto& f : R.faces) T.labels.push_back(f.area_exponent);
    // each closed curve separates exactly two faces
    for (size_t c = 0; c < g.component_count(); ++c) {
        std::set<int> touching;
        for (size_t fi = 0; fi < R.faces.size(); ++fi)
            for (int w : R.faces[fi].walls)
                if (g.edges()[w].component == c) touching.insert(int(fi));
        if (touching.size() != 2) fail(ErrorKind::UnstableCombinatorics, "curve does not separate two faces");
        T.edges.push_back({*touching.begin(), *touching.rbegin()});
    }
    return T;
}

namespace detail {

inline std::vector<int> tree_centers(const ExtendedTree& T) {
    auto adj = T.adjacency();
    size_t n = T.size();
    if (n == 1) return {0};
    std::vector<int> deg(n), leaves;
    for (size_t v = 0; v < n; ++v) {
        deg[v] = int(adj[v].size());
        if (deg[v] <= 1) leaves.push_back(int(v));
    }
    size_t left = n;
    while (left > 2) {
        std::vector<int> nxt;
        left -= leaves.size();
        for (int v : leaves)
            for (int w : adj[v])
                if (--deg[w] == 1) nxt.push_back(w);
        leaves = nxt;
    }
    std::sort(leaves.begin(), leaves.end());
    return leaves;
}

inline std::string encode_rooted(const ExtendedTree& T, const std::vector<std::vector<int>>& adj, int v, int parent) {
    std::vector<std::string> kids;
    for (int w : adj[v])
        if (w != parent) kids.push_back(encode_rooted(T, adj, w, v));
    std::sort(kids.begin(), kids.end());
    std::string s = "(" + to_string(T.labels[v]);
    for (auto& k : kids) s += " " + k;
    return s + ")";
}

} // namespace detail

// Canonical bracket encoding `(label (child)...)`, rooted at the center that gives the smallest string.
inline std::string canonical_encoding(const ExtendedTree& T) {
    if (T.size() == 0) return "()";
    if (!T.is_tree()) fail(ErrorKind::PreconditionFailed, "graph is not a tree");
    auto adj = T.adjacency();
    std::string best;
    for (int c : detail::tree_centers(T)) {
        auto s = detail::encode_rooted(T, adj, c, -1);
        if (best.empty() || s < best) best = s;
    }
    return best;
}

inline bool tree_isomorphic(const ExtendedTree& a, const ExtendedTree& b) {
    if (a.size() != b.size() || a.edges.size() != b.edges.size()) return false;
    return canonical_encoding(a) == canonical_encoding(b);
}

// ---- separating curves -------------------------------------------------------------------

struct SeparatingCurve {
    size_t component = 0;
    std::vector<Point2> points;  // closed polygon, ccw
};

struct SeparatingFamily {
    double t = 0;
    Rational epsilon;
    std::vector<SeparatingCurve> curves;
};

namespace detail {

// Outer boundary of the union of a set of closed polygons whose union is connected.
inline std::vector<Point2> outer_boundary(const std::vector<std::vector<Point2>>& polys, double scale) {
    struct Seg {
        Point2 a, b;
    };
    std::vector<Seg> segs;
    for (auto& p : polys)
        for (size_t i = 0; i < p.size(); ++i) segs.push_back({p[i], p[(i + 1) % p.size()]});
    double tol = 1e-12 * scale;
    std::vector<Point2> pts;
    auto node = [&](Point2 q) {
        for (size_t i = 0; i < pts.size(); ++i)
            if (dist(pts[i], q) <= tol) return int(i);
        pts.push_back(q);
        return int(pts.size() - 1);
    };
    std::set<std::pair<int, int>> und;
    for (size_t i = 0; i < segs.size(); ++i) {
        std::vector<double> cuts{0, 1};
        Point2 a = segs[i].a, d = segs[i].b - segs[i].a;
        for (size_t j = 0; j < segs.size(); ++j) {
            if (i == j) continue;
            Point2 c = segs[j].a, e = segs[j].b - segs[j].a;
            double den = cross(d, e);
            if (std::abs(den) < 1e-300) continue;
            double s = cross(c - a, e) / den, u = cross(c - a, d) / den;
            if (s > 0 && s < 1 && u >= 0 && u <= 1) cuts.push_back(s);
        }
        std::sort(cuts.begin(), cuts.end());
        for (size_t k = 0; k + 1 < cuts.size(); ++k) {
            int p = node(a + cuts[k] * d), q = node(a + cuts[k + 1] * d);
            if (p != q) und.insert({std::min(p, q), std::max(p, q)});
        }
    }
    std::vector<std::vector<int>> adj(pts.size());
    for (auto [p, q] : und) {
        adj[p].push_back(q);
        adj[q].push_back(p);
    }
    int start = 0;
    for (size_t i = 1; i < pts.size(); ++i)
        if (pts[i].x < pts[start].x || (pts[i].x == pts[start].x && pts[i].y < pts[start].y)) start = int(i);
    // walk keeping the unbounded side on the right: always take the most clockwise turn
    std::vector<Point2> out;
    int prev = -1, cur = start;
    Point2 in_dir{0, -1};
    for (size_t guard = 0; guard < 4 * und.size() + 4; ++guard) {
        out.push_back(pts[cur]);
        int best = -1;
        double best_turn = 0;
        for (int w : adj[cur]) {
            if (w == prev && adj[cur].size() > 1) continue;
            Point2 d = pts[w] - pts[cur];
            double turn = std::atan2(cross(in_dir, d), dot(in_dir, d));  // left turn positive
            if (best < 0 || turn > best_turn) best = w, best_turn = turn;
        }
        if (best < 0) break;
        in_dir = pts[best] - pts[cur];
        prev = cur;
        cur = best;
        if (cur == start) return out;
    }
    fail(ErrorKind::PipelineStuck, "outer boundary walk did not close");
}

inline std::vector<Point2> capsule(Point2 a, Point2 b, double r, int sides) {
    // hull of two regular polygons; sides is even so the hull is easy to list
    std::vector<Point2> pts;
    for (int k = 0; k < sides; ++k) {
        double th = 2 * std::numbers::pi * k / sides;
        Point2 o{r * std::cos(th), r * std::sin(th)};
        pts.push_back(a + o);
        pts.push_back(b + o);
    }
    // monotone chain hull
    std::sort(pts.begin(), pts.end(), [](Point2 p, Point2 q) { return p.x < q.x || (p.x == q.x && p.y < q.y); });
    std::vector<Point2> h(2 * pts.size());
    size_t k = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (size_t i = pts.size() - 1, lo = k + 1; i-- > 0;) {
        while (k >= lo && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

inline bool polylines_cross(const std::vector<Point2>& p, const std::vector<Point2>& q) {
    for (size_t i = 0; i < p.size(); ++i)
        for (size_t j = 0; j < q.size(); ++j)
            if (segments_intersect(p[i], p[(i + 1) % p.size()], q[j], q[(j + 1) % q.size()])) return true;
    return false;
}

inline Point2 tangent_point(const ArcGerm& a, double t) {
    auto lin = [](const PuiseuxSeries& s) {
        for (auto& tm : s.terms())
            if (tm.exponent == 1) return tm.coeff.get_d();
        return 0.0;
    };
    return {lin(a.x) * t, lin(a.y) * t};
}

} // namespace detail

// Outer boundaries of eps*t neighbourhoods of each component's tangent footprint; eps is halved
// until the curves are pairwise disjoint.
inline SeparatingFamily separating_cones(const PolygonalGerm& g, Rational eps, std::optional<double> t_opt = {},
                                         int max_halvings = 12) {
    for (auto& c : g.components())
        if (!c.closed) fail(ErrorKind::HasOpenComponents, "separating cones need closed components");
    double t = t_opt ? *t_opt : g.grid()[g.grid().size() / 2];
    for (int h = 0; h <= max_halvings; ++h, eps /= 2) {
        SeparatingFamily F;
        F.t = t;
        F.epsilon = eps;
        double r = eps.get_d() * t;
        for (size_t ci = 0; ci < g.component_count(); ++ci) {
            const auto& c = g.component(ci);
            std::vector<Point2> foot;
            for (auto& v : c.vertices) foot.push_back(detail::tangent_point(v, t));
            std::vector<std::vector<Point2>> caps;
            for (size_t i = 0; i < foot.size(); ++i)
                caps.push_back(detail::capsule(foot[i], foot[(i + 1) % foot.size()], r, 16));
            F.curves.push_back({ci, detail::outer_boundary(caps, t)});
        }
        bool ok = true;
        for (size_t a = 0; a < F.curves.size() && ok; ++a)
            for (size_t b = a + 1; b < F.curves.size() && ok; ++b)
                if (detail::polylines_cross(F.curves[a].points, F.curves[b].points)) ok = false;
        if (ok) return F;
    }
    fail(ErrorKind::EpsilonTooLarge, "separating curves still collide after halving");
}

// ---- equivalence decision ------------------------------------------------------------------

enum class EquivalenceStatus { Equivalent, Inequivalent, NecessaryConditionsHold, NotApplicable };

inline std::string_view to_string(EquivalenceStatus s) {
    switch (s) {
    case EquivalenceStatus::Equivalent: return "Equivalent";
    case EquivalenceStatus::Inequivalent: return "Inequivalent";
    case EquivalenceStatus::NecessaryConditionsHold: return "NecessaryConditionsHold";
    case EquivalenceStatus::NotApplicable: return "NotApplicable";
    }
    return "?";
}

struct EquivalenceVerdict {
    EquivalenceStatus status = EquivalenceStatus::NotApplicable;
    std::optional<std::string> witness;
    std::string str() const {
        return std::string(to_string(status)) + (witness ? " (" + *witness + ")" : "");
    }
};

namespace detail {

inline std::string exponent_list(std::vector<Rational> v) {
    std::sort(v.begin(), v.end());
    std::string s = "{";
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + to_string(v[i]);
    return s + "}";
}

inline std::optional<std::string> region_mismatch(const RegionGraph& a, const RegionGraph& b) {
    if (a.faces.size() != b.faces.size())
        return "face count differs: " + std::to_string(a.faces.size()) + " vs " + std::to_string(b.faces.size());
    auto shape = [](const RegionGraph& R) {
        // edge counts depend on the subdivision; boundary cycles and slits do not
        std::vector<std::pair<size_t, bool>> s;
        for (auto& f : R.faces) s.push_back({f.cycles.size(), f.has_slit()});
        std::sort(s.begin(), s.end());
        return s;
    };
    if (shape(a) != shape(b)) return std::string("face boundary structure differs");
    auto slit_exps = [](const RegionGraph& R) {
        std::vector<Rational> v;
        for (auto& f : R.faces)
            if (f.has_slit()) v.push_back(f.area_exponent);
        return v;
    };
    auto sa = slit_exps(a), sb = slit_exps(b);
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb)
        return "slit-bearing face area exponent differs: " + exponent_list(sa) + " vs " + exponent_list(sb);
    auto all = [](const RegionGraph& R) {
        std::vector<Rational> v;
        for (auto& f : R.faces) v.push_back(f.area_exponent);
        std::sort(v.begin(), v.end());
        return v;
    };
    if (all(a) != all(b)) return "face area exponents differ: " + exponent_list(all(a)) + " vs " + exponent_list(all(b));
    return std::nullopt;
}

} // namespace detail

inline EquivalenceVerdict decide_equivalence(const PolygonalGerm& X, const PolygonalGerm& Y) {
    for (auto* g : {&X, &Y})
        if (is_lne(*g).status == LneStatus::NotLNE) fail(ErrorKind::NotLNEInput, "input germ is not LNE");
    EquivalenceVerdict v;
    bool isolated = X.all_closed() && Y.all_closed() && !X.has_shared_vertices() && !Y.has_shared_vertices();
    if (isolated) {
        auto a = extended_tree(X), b = extended_tree(Y);
        if (tree_isomorphic(a, b)) {
            v.status = EquivalenceStatus::Equivalent;
            return v;
        }
        v.status = EquivalenceStatus::Inequivalent;
        // labels are part of the shape: the encodings show where the trees part
        v.witness = "tree shape differs: " + canonical_encoding(a) + " vs " + canonical_encoding(b);
        return v;
    }
    auto RX = region_graph(X), RY = region_graph(Y);
    if (auto w = detail::region_mismatch(RX, RY)) {
        v.status = EquivalenceStatus::Inequivalent;
        v.witness = *w;
    } else {
        v.status = EquivalenceStatus::NecessaryConditionsHold;
    }
    return v;
}

} // namespace lipgeo
