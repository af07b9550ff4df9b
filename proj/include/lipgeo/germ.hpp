#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "puiseux.hpp"
#include "rational.hpp"

namespace lipgeo {

struct Point2 {
    double x = 0, y = 0;
    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    Point2 d = b - a;
    double l2 = dot(d, d);
    if (l2 == 0) return dist(p, a);
    double s = std::clamp(dot(p - a, d) / l2, 0.0, 1.0);
    return dist(p, a + s * d);
}

inline int orient(Point2 a, Point2 b, Point2 c) {
    double v = cross(b - a, c - a);
    return (v > 0) - (v < 0);
}

inline bool on_segment(Point2 p, Point2 a, Point2 b) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

inline bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
    int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    if (o1 == 0 && on_segment(c, a, b)) return true;
    if (o2 == 0 && on_segment(d, a, b)) return true;
    if (o3 == 0 && on_segment(a, c, d)) return true;
    if (o4 == 0 && on_segment(b, c, d)) return true;
    return false;
}

inline double segment_distance(Point2 a, Point2 b, Point2 c, Point2 d) {
    if (segments_intersect(a, b, c, d)) return 0.0;
    return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                     point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

// gamma(t) = (x(t), y(t), t); also used for difference vectors of arcs.
struct ArcGerm {
    PuiseuxSeries x, y;

    Point2 at(double t) const { return {x.eval(t), y.eval(t)}; }
    std::optional<std::array<Rational, 2>> at_exact(const Rational& t) const {
        auto a = x.eval_exact(t), b = y.eval_exact(t);
        if (!a || !b) return std::nullopt;
        return std::array<Rational, 2>{*a, *b};
    }
    bool is_zero() const { return x.is_zero() && y.is_zero(); }
    std::string str() const { return "x = " + x.str() + "; y = " + y.str(); }

    friend ArcGerm operator+(const ArcGerm& a, const ArcGerm& b) { return {a.x + b.x, a.y + b.y}; }
    friend ArcGerm operator-(const ArcGerm& a, const ArcGerm& b) { return {a.x - b.x, a.y - b.y}; }
    friend ArcGerm operator*(const PuiseuxSeries& s, const ArcGerm& a) { return {s * a.x, s * a.y}; }
    friend ArcGerm operator*(const Rational& s, const ArcGerm& a) { return {s * a.x, s * a.y}; }
    friend bool operator==(const ArcGerm&, const ArcGerm&) = default;
};

inline ArcGerm make_arc(const Rational& cx, const Rational& ex, const Rational& cy, const Rational& ey) {
    return {PuiseuxSeries::monomial(cx, ex), PuiseuxSeries::monomial(cy, ey)};
}

inline PuiseuxSeries cross(const ArcGerm& u, const ArcGerm& v) { return u.x * v.y - u.y * v.x; }
inline PuiseuxSeries dot(const ArcGerm& u, const ArcGerm& v) { return u.x * v.x + u.y * v.y; }
inline PuiseuxSeries orient_series(const ArcGerm& a, const ArcGerm& b, const ArcGerm& c) {
    return cross(b - a, c - a);
}
inline int eventual_orient(const ArcGerm& a, const ArcGerm& b, const ArcGerm& c) {
    return eventual_sign(orient_series(a, b, c));
}

// Exponent at which a vector germ starts, with its coefficient vector there.
struct LimitDirection {
    Rational exponent;
    Rational dx, dy;
    double angle() const { return std::atan2(dy.get_d(), dx.get_d()); }
};

inline LimitDirection limit_direction(const ArcGerm& v) {
    if (v.is_zero()) fail(ErrorKind::CoincidentArcs, "limit direction of coincident arcs");
    Rational e = v.x.is_zero() ? v.y.order() : v.y.is_zero() ? v.x.order() : std::min(v.x.order(), v.y.order());
    LimitDirection d{e, 0, 0};
    if (!v.x.is_zero() && v.x.order() == e) d.dx = v.x.leading().coeff;
    if (!v.y.is_zero() && v.y.order() == e) d.dy = v.y.leading().coeff;
    return d;
}

inline Rational cross(const LimitDirection& a, const LimitDirection& b) { return a.dx * b.dy - a.dy * b.dx; }
inline Rational dot(const LimitDirection& a, const LimitDirection& b) { return a.dx * b.dx + a.dy * b.dy; }

inline std::array<double, 3> tangent_direction(const ArcGerm& g) {
    auto coeff1 = [](const PuiseuxSeries& s) {
        for (auto& tm : s.terms())
            if (tm.exponent == 1) return tm.coeff.get_d();
        return 0.0;
    };
    double cx = coeff1(g.x), cy = coeff1(g.y);
    double n = std::sqrt(cx * cx + cy * cy + 1.0);
    return {cx / n, cy / n, 1.0 / n};
}

struct LinearTriangle {
    ArcGerm a, b;
    Point2 at(double t, double s) const { return (1 - s) * a.at(t) + s * b.at(t); }
};

struct Component {
    std::vector<ArcGerm> vertices;
    bool closed = false;

    size_t size() const { return vertices.size(); }
    size_t edge_count() const { return closed ? vertices.size() : vertices.size() - 1; }
    std::pair<size_t, size_t> edge(size_t e) const { return {e, (e + 1) % vertices.size()}; }
};

struct GridOptions {
    int depth = 15;
    std::optional<double> t_max;  // overrides the computed value
    int max_k = 40;
};

// ---- closed segment intersection decided on leading terms ------------------

namespace detail {

inline bool eventually_between(const ArcGerm& p, const ArcGerm& a, const ArcGerm& b) {
    // p assumed eventually collinear with a, b
    return eventual_sign(dot(p - a, b - a)) >= 0 && eventual_sign(dot(p - b, a - b)) >= 0;
}

// Node ids identify shared endpoints; returns true when the closed segments meet
// anywhere other than at a shared endpoint.
inline bool eventually_conflict(const ArcGerm& a, const ArcGerm& b, const ArcGerm& c, const ArcGerm& d, int ia,
                                int ib, int ic, int id) {
    int shared = (ia == ic) + (ia == id) + (ib == ic) + (ib == id);
    if (shared >= 2) return true;
    if (shared == 1) {
        const ArcGerm& s = (ia == ic || ia == id) ? a : b;
        const ArcGerm& p = (ia == ic || ia == id) ? b : a;
        const ArcGerm& q = (ic == ia || ic == ib) ? d : c;
        if (eventual_orient(s, p, q) != 0) return false;
        return eventual_sign(dot(p - s, q - s)) > 0;
    }
    int o1 = eventual_orient(a, b, c), o2 = eventual_orient(a, b, d);
    int o3 = eventual_orient(c, d, a), o4 = eventual_orient(c, d, b);
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    if (o1 == 0 && eventually_between(c, a, b)) return true;
    if (o2 == 0 && eventually_between(d, a, b)) return true;
    if (o3 == 0 && eventually_between(a, c, d)) return true;
    if (o4 == 0 && eventually_between(b, c, d)) return true;
    return false;
}

} // namespace detail

// Smallest k such that every series is led by its leading term on 2^-k .. 2^-(k+depth).
inline int stable_exponent(const std::vector<PuiseuxSeries>& series, int depth, int max_k) {
    // the leading term must dominate the rest by a factor 4, not merely fix the sign
    auto agrees = [&](const PuiseuxSeries& s, int k) {
        double c0 = s.leading().coeff.get_d();
        for (int j = 0; j <= depth; ++j) {
            double v = s.eval_scaled(std::ldexp(1.0, -(k + j)));
            if (!(std::abs(v - c0) <= std::abs(c0) / 4)) return false;
        }
        return true;
    };
    int k = 1;
    for (;;) {
        bool ok = true;
        for (auto& s : series) {
            if (s.is_zero()) continue;
            while (!agrees(s, k)) {
                ++k;
                ok = false;
                if (k > max_k) fail(ErrorKind::InvalidT, "leading terms do not dominate above t = 2^-" + std::to_string(max_k));
            }
        }
        if (ok) return k;
    }
}

inline std::vector<double> make_grid(double t_max, int depth) {
    std::vector<double> g;
    for (int j = 0; j <= depth; ++j) g.push_back(std::ldexp(t_max, -j));
    return g;
}

struct LinkEdge {
    int u, v;             // node ids
    size_t component, index;
};

struct PlaneLink {
    double t = 0;
    struct Chain {
        std::vector<Point2> points;
        bool closed = false;
    };
    std::vector<Chain> components;
};

class PolygonalGerm {
public:
    PolygonalGerm() = default;

    const std::vector<Component>& components() const { return comps_; }
    const Component& component(size_t c) const { return comps_.at(c); }
    size_t component_count() const { return comps_.size(); }

    // Distinct vertex arcs; components may share vertices.
    const std::vector<ArcGerm>& nodes() const { return nodes_; }
    int node_of(size_t c, size_t i) const { return node_ids_.at(c).at(i); }
    const std::vector<LinkEdge>& edges() const { return edges_; }

    double cone_opening() const { return std::sqrt(cone_opening_sq_.get_d()); }
    const Rational& cone_opening_sq() const { return cone_opening_sq_; }
    double t_max() const { return t_max_; }
    const std::vector<double>& grid() const { return grid_; }
    int grid_depth() const { return static_cast<int>(grid_.size()) - 1; }
    const GridOptions& options() const { return opts_; }

    bool all_closed() const {
        for (auto& c : comps_)
            if (!c.closed) return false;
        return true;
    }
    bool has_shared_vertices() const {
        size_t total = 0;
        for (auto& c : comps_) total += c.size();
        return total != nodes_.size();
    }

    friend PolygonalGerm make_polygonal_germ(std::vector<Component> comps, GridOptions opts);

private:
    std::vector<Component> comps_;
    std::vector<ArcGerm> nodes_;
    std::vector<std::vector<int>> node_ids_;
    std::vector<LinkEdge> edges_;
    Rational cone_opening_sq_ = 0;
    double t_max_ = 0;
    std::vector<double> grid_;
    GridOptions opts_;
};

inline PolygonalGerm make_polygonal_germ(std::vector<Component> comps, GridOptions opts = {}) {
    PolygonalGerm g;
    if (comps.empty()) fail(ErrorKind::TooFewVertices, "germ has no components");
    for (size_t c = 0; c < comps.size(); ++c) {
        auto& comp = comps[c];
        if (comp.closed && comp.size() < 3) fail(ErrorKind::TooFewVertices, "closed component needs >= 3 vertices");
        if (!comp.closed && comp.size() < 2) fail(ErrorKind::TooFewVertices, "open component needs >= 2 vertices");
        std::vector<int> ids;
        for (size_t i = 0; i < comp.size(); ++i) {
            const auto& v = comp.vertices[i];
            for (const auto* s : {&v.x, &v.y})
                if (!s->is_zero() && s->leading().exponent < 1)
                    fail(ErrorKind::ConeViolation, "component " + std::to_string(c) + " vertex " +
                                                       std::to_string(i) + " has leading exponent " +
                                                       to_string(s->leading().exponent) + " < 1");
            Rational r = 0;
            for (const auto* s : {&v.x, &v.y})
                for (auto& tm : s->terms())
                    if (tm.exponent == 1) r += tm.coeff * tm.coeff;
            g.cone_opening_sq_ = std::max(g.cone_opening_sq_, r);
            int id = -1;
            for (size_t n = 0; n < g.nodes_.size(); ++n)
                if (g.nodes_[n] == v) id = static_cast<int>(n);
            if (id < 0) {
                id = static_cast<int>(g.nodes_.size());
                g.nodes_.push_back(v);
            } else {
                for (int prev : ids)
                    if (prev == id) fail(ErrorKind::DuplicateVertex, "component " + std::to_string(c) + " repeats a vertex arc");
            }
            ids.push_back(id);
        }
        for (size_t e = 0; e < comp.edge_count(); ++e) {
            auto [i, j] = comp.edge(e);
            auto d = comp.vertices[i] - comp.vertices[j];
            if (d.is_zero()) {
                if (comp.vertices[i].x.truncation() != comp.vertices[j].x.truncation() ||
                    comp.vertices[i].y.truncation() != comp.vertices[j].y.truncation())
                    fail(ErrorKind::TruncationTooShort, "consecutive vertices agree up to truncation");
                fail(ErrorKind::DuplicateVertex, "consecutive vertices coincide");
            }
            g.edges_.push_back({ids[i], ids[j], c, e});
        }
        g.node_ids_.push_back(std::move(ids));
    }
    // simplicity, decided on leading terms
    for (size_t a = 0; a < g.edges_.size(); ++a)
        for (size_t b = a + 1; b < g.edges_.size(); ++b) {
            const auto& e = g.edges_[a];
            const auto& f = g.edges_[b];
            if (detail::eventually_conflict(g.nodes_[e.u], g.nodes_[e.v], g.nodes_[f.u], g.nodes_[f.v], e.u, e.v, f.u,
                                            f.v))
                fail(ErrorKind::NotSimple, "edges " + std::to_string(e.component) + ":" + std::to_string(e.index) +
                                               " and " + std::to_string(f.component) + ":" + std::to_string(f.index) +
                                               " meet for small t");
        }
    g.comps_ = std::move(comps);
    g.opts_ = opts;
    if (opts.t_max) {
        g.t_max_ = *opts.t_max;
    } else {
        std::vector<PuiseuxSeries> preds;
        const auto& N = g.nodes_;
        for (size_t i = 0; i < N.size(); ++i)
            for (size_t j = i + 1; j < N.size(); ++j) {
                preds.push_back(N[i].x - N[j].x);
                preds.push_back(N[i].y - N[j].y);
                for (size_t k = j + 1; k < N.size(); ++k) preds.push_back(orient_series(N[i], N[j], N[k]));
            }
        for (auto& v : N) {
            preds.push_back(v.x);
            preds.push_back(v.y);
        }
        g.t_max_ = std::ldexp(1.0, -stable_exponent(preds, opts.depth, opts.max_k));
    }
    g.grid_ = make_grid(g.t_max_, opts.depth);
    return g;
}

inline PlaneLink plane_link(const PolygonalGerm& g, double t) {
    if (!(t > 0)) fail(ErrorKind::InvalidT, "t must be positive");
    PlaneLink L;
    L.t = t;
    std::vector<Point2> pts;
    for (auto& n : g.nodes()) pts.push_back(n.at(t));
    for (auto& c : g.components()) {
        PlaneLink::Chain ch;
        ch.closed = c.closed;
        for (auto& v : c.vertices) ch.points.push_back(v.at(t));
        L.components.push_back(std::move(ch));
    }
    const auto& E = g.edges();
    for (size_t a = 0; a < E.size(); ++a)
        for (size_t b = a + 1; b < E.size(); ++b) {
            const auto& e = E[a];
            const auto& f = E[b];
            Point2 p = pts[e.u], q = pts[e.v], r = pts[f.u], s = pts[f.v];
            int shared = (e.u == f.u) + (e.u == f.v) + (e.v == f.u) + (e.v == f.v);
            bool bad;
            if (shared == 1) {
                int sv = (e.u == f.u || e.u == f.v) ? e.u : e.v;
                Point2 o = pts[sv];
                Point2 x = (sv == e.u) ? q : p;
                Point2 y = (sv == f.u) ? s : r;
                bad = orient(o, x, y) == 0 && dot(x - o, y - o) > 0;
            } else {
                bad = shared > 1 || segments_intersect(p, q, r, s);
            }
            if (bad)
                fail(ErrorKind::InvalidT, "link is not simple at t = " + std::to_string(t) + " (edges " +
                                              std::to_string(e.component) + ":" + std::to_string(e.index) + ", " +
                                              std::to_string(f.component) + ":" + std::to_string(f.index) + ")");
        }
    return L;
}

// ---- synchronized families -------------------------------------------------

// Rotation by an exact rational point of the unit circle.
struct Rotation {
    Rational c = 1, s = 0;

    static Rotation from_angle(double theta) {
        Rational u = approximate(std::tan(theta / 2), 1L << 24);
        Rational d = 1 + u * u;
        return {(1 - u * u) / d, 2 * u / d};
    }
    double angle() const { return std::atan2(s.get_d(), c.get_d()); }
    // Rotates the plane by -angle, so direction (c, s) becomes the x axis.
    ArcGerm apply(const ArcGerm& g) const { return {c * g.x + s * g.y, c * g.y - s * g.x}; }
};

class SynchronizedFamily {
public:
    const std::vector<ArcGerm>& arcs() const { return arcs_; }
    const Rotation& rotation() const { return rot_; }
    bool bounded() const { return std::isfinite(M_); }
    double M() const { return M_; }
    double limit_bound() const { return M_limit_; }
    const std::vector<double>& grid() const { return grid_; }

    std::vector<Point2> vertices_at(double t) const {
        std::vector<Point2> p;
        for (auto& a : arcs_) p.push_back(a.at(t));
        return p;
    }
    // f_t(x) by linear interpolation.
    double f(double t, double x) const {
        auto p = vertices_at(t);
        for (size_t i = 0; i + 1 < p.size(); ++i)
            if (x <= p[i + 1].x || i + 2 == p.size()) {
                double s = (x - p[i].x) / (p[i + 1].x - p[i].x);
                return p[i].y + s * (p[i + 1].y - p[i].y);
            }
        return p.back().y;
    }
    std::vector<double> slopes_at(double t) const {
        auto p = vertices_at(t);
        std::vector<double> s;
        for (size_t i = 0; i + 1 < p.size(); ++i) s.push_back((p[i + 1].y - p[i].y) / (p[i + 1].x - p[i].x));
        return s;
    }

    friend SynchronizedFamily synchronized_view(const std::vector<ArcGerm>& chain, const Rotation& rot, int depth);

private:
    std::vector<ArcGerm> arcs_;
    Rotation rot_;
    double M_ = 0, M_limit_ = 0;
    std::vector<double> grid_;
};

inline SynchronizedFamily synchronized_view(const std::vector<ArcGerm>& chain, const Rotation& rot, int depth = 15) {
    if (chain.size() < 2) fail(ErrorKind::NotSynchronizable, "chain needs two vertices");
    SynchronizedFamily F;
    F.rot_ = rot;
    for (auto& a : chain) F.arcs_.push_back(rot.apply(a));
    std::vector<PuiseuxSeries> preds;
    bool unbounded = false;
    double lim = 0;
    for (size_t i = 0; i + 1 < F.arcs_.size(); ++i) {
        auto dx = F.arcs_[i + 1].x - F.arcs_[i].x;
        auto dy = F.arcs_[i + 1].y - F.arcs_[i].y;
        if (compare_eventual(F.arcs_[i + 1].x, F.arcs_[i].x) != Ordering::Greater)
            fail(ErrorKind::NotSynchronizable, "x not eventually increasing at segment " + std::to_string(i));
        preds.push_back(dx);
        if (dy.is_zero()) continue;
        if (dy.order() < dx.order()) {
            unbounded = true;
        } else if (dy.order() == dx.order()) {
            lim = std::max(lim, std::abs(Rational(dy.leading().coeff / dx.leading().coeff).get_d()));
        }
    }
    double t_max = std::ldexp(1.0, -stable_exponent(preds, depth, 60));
    F.grid_ = make_grid(t_max, depth);
    F.M_limit_ = unbounded ? std::numeric_limits<double>::infinity() : lim;
    if (unbounded) {
        F.M_ = std::numeric_limits<double>::infinity();
    } else {
        double sup = lim;
        for (double t : F.grid_)
            for (double s : F.slopes_at(t)) sup = std::max(sup, std::abs(s));
        F.M_ = sup;
    }
    return F;
}

inline SynchronizedFamily synchronized_view(const std::vector<ArcGerm>& chain, double theta, int depth = 15) {
    return synchronized_view(chain, Rotation::from_angle(theta), depth);
}

} // namespace lipgeo
