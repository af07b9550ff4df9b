#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "germ.hpp"

namespace lipgeo {

struct TordValue {
    bool infinite = false;
    Rational value;
    SqrtCoefficient coefficient;

    static TordValue infinity() { return {true, 0, {}}; }
    std::string str() const { return infinite ? "inf" : to_string(value); }
    friend bool operator==(const TordValue& a, const TordValue& b) {
        return a.infinite == b.infinite && (a.infinite || (a.value == b.value && a.coefficient == b.coefficient));
    }
};

inline TordValue tord(const ArcGerm& a, const ArcGerm& b) {
    ArcGerm d = a - b;
    if (d.is_zero()) {
        if (a.x.truncation() == b.x.truncation() && a.y.truncation() == b.y.truncation()) return TordValue::infinity();
        fail(ErrorKind::TruncationTooShort, "arcs agree up to the shorter truncation");
    }
    auto l = norm2_leading(d.x, d.y);
    return {false, l.exponent / 2, SqrtCoefficient::of(l.coeff)};
}

// Exponent of the distance between two arcs; throws on coincident arcs.
inline Rational distance_exponent(const ArcGerm& a, const ArcGerm& b) {
    auto v = tord(a, b);
    if (v.infinite) fail(ErrorKind::CoincidentArcs, "coincident arcs");
    return v.value;
}

inline std::vector<std::vector<Rational>> edge_exponents(const PolygonalGerm& g) {
    std::vector<std::vector<Rational>> out;
    for (auto& c : g.components()) {
        std::vector<Rational> ex;
        for (size_t e = 0; e < c.edge_count(); ++e) {
            auto [i, j] = c.edge(e);
            ex.push_back(distance_exponent(c.vertices[i], c.vertices[j]));
        }
        out.push_back(std::move(ex));
    }
    return out;
}

inline Rational min_edge_exponent(const PolygonalGerm& g) {
    std::optional<Rational> m;
    for (auto& ex : edge_exponents(g))
        for (auto& e : ex)
            if (!m || e < *m) m = e;
    return *m;
}

// Path-length exponent of the shorter path along a single chain.
inline TordValue tord_inner(const Component& c, size_t i, size_t j) {
    if (i == j) return TordValue::infinity();
    auto path_exp = [&](size_t from, size_t to) {
        std::optional<Rational> m;
        for (size_t k = from; k != to; k = (k + 1) % c.size()) {
            auto e = distance_exponent(c.vertices[k], c.vertices[(k + 1) % c.size()]);
            if (!m || e < *m) m = e;
        }
        return *m;
    };
    size_t lo = std::min(i, j), hi = std::max(i, j);
    Rational best = path_exp(lo, hi);
    if (c.closed) best = std::max(best, path_exp(hi, lo));
    return {false, best, {}};
}

inline TordValue tord_inner(const PolygonalGerm& g, size_t comp_i, size_t i, size_t comp_j, size_t j) {
    if (comp_i != comp_j) fail(ErrorKind::DifferentComponents, "tord_inner needs vertices of one component");
    return tord_inner(g.component(comp_i), i, j);
}

inline double limit_angle(const ArcGerm& a, const ArcGerm& apex, const ArcGerm& b) {
    auto u = limit_direction(a - apex), v = limit_direction(b - apex);
    double c = dot(u, v).get_d() / std::sqrt(Rational(dot(u, u) * dot(v, v)).get_d());
    return std::acos(std::clamp(c, -1.0, 1.0));
}

inline bool limit_angle_is_pi(const ArcGerm& a, const ArcGerm& apex, const ArcGerm& b) {
    auto u = limit_direction(a - apex), v = limit_direction(b - apex);
    return cross(u, v) == 0 && dot(u, v) < 0;
}

inline bool limit_angle_is_zero(const ArcGerm& a, const ArcGerm& apex, const ArcGerm& b) {
    auto u = limit_direction(a - apex), v = limit_direction(b - apex);
    return cross(u, v) == 0 && dot(u, v) > 0;
}

// ---- link graph ------------------------------------------------------------

// Widest-path (maximin) exponents between nodes; nullopt when not connected along the link.
class InnerExponents {
public:
    explicit InnerExponents(const PolygonalGerm& g) {
        size_t n = g.nodes().size();
        w_.assign(n, std::vector<std::optional<Rational>>(n));
        edge_exp_.reserve(g.edges().size());
        for (auto& e : g.edges()) {
            Rational x = distance_exponent(g.nodes()[e.u], g.nodes()[e.v]);
            edge_exp_.push_back(x);
            auto& cur = w_[e.u][e.v];
            if (!cur || x > *cur) cur = w_[e.v][e.u] = x;
        }
        for (size_t k = 0; k < n; ++k)
            for (size_t i = 0; i < n; ++i) {
                if (!w_[i][k] || i == k) continue;
                for (size_t j = 0; j < n; ++j) {
                    if (j == k || i == j || !w_[k][j]) continue;
                    Rational via = std::min(*w_[i][k], *w_[k][j]);
                    if (!w_[i][j] || via > *w_[i][j]) w_[i][j] = via;
                }
            }
    }
    // Inner exponent between distinct nodes: paths through the apex have exponent 1.
    Rational between(int i, int j) const {
        const auto& v = w_[i][j];
        return v ? std::max(*v, Rational(1)) : Rational(1);
    }
    bool connected(int i, int j) const { return i == j || w_[i][j].has_value(); }
    const Rational& edge_exponent(size_t e) const { return edge_exp_[e]; }

private:
    std::vector<std::vector<std::optional<Rational>>> w_;
    std::vector<Rational> edge_exp_;
};

// ---- LNE -------------------------------------------------------------------

enum class LneStatus { LNE, NotLNE, HeuristicLNE };

inline std::string_view to_string(LneStatus s) {
    switch (s) {
    case LneStatus::LNE: return "LNE";
    case LneStatus::NotLNE: return "NotLNE";
    case LneStatus::HeuristicLNE: return "HeuristicLNE";
    }
    return "?";
}

// A point on the link: a node, or the point of an edge nearest to some node.
struct LinkPoint {
    int node = -1;                  // set when the point is a vertex arc
    int edge = -1;                  // otherwise: index into germ.edges()
    int foot_of = -1;               // node whose orthogonal projection gives the point
    std::string str() const {
        if (node >= 0) return "v" + std::to_string(node);
        return "proj(v" + std::to_string(foot_of) + " -> e" + std::to_string(edge) + ")";
    }
};

struct LneWitness {
    LinkPoint p, q;
    Rational outer, inner;
};

struct LneVerdict {
    LneStatus status = LneStatus::LNE;
    std::optional<LneWitness> witness;
    std::vector<std::pair<double, double>> constant_estimates;
    bool symbolic_decided = true;
    bool flat = true;
};

namespace detail {

struct Projection {
    enum Kind { AtU, AtV, Interior } kind;
    PuiseuxSeries num, den;  // s = num / den along u -> v
};

inline Projection project(const ArcGerm& p, const ArcGerm& u, const ArcGerm& v) {
    ArcGerm d = v - u;
    PuiseuxSeries num = dot(p - u, d), den = dot(d, d);
    if (eventual_sign(num) <= 0) return {Projection::AtU, num, den};
    auto c = compare_eventual(num, den);
    // Inconclusive: the foot sits on v up to the truncation order, which no exponent below it can see
    if (c != Ordering::Less) return {Projection::AtV, num, den};
    return {Projection::Interior, num, den};
}

} // namespace detail

// Symbolic phase. Returns the first violating pair, nullopt when every check passes.
inline std::optional<LneWitness> lne_symbolic(const PolygonalGerm& g) {
    const auto& N = g.nodes();
    const auto& E = g.edges();
    InnerExponents W(g);
    for (size_t i = 0; i < N.size(); ++i)
        for (size_t j = i + 1; j < N.size(); ++j) {
            Rational outer = distance_exponent(N[i], N[j]);
            Rational inner = W.between(int(i), int(j));
            if (outer != inner) return LneWitness{{int(i)}, {int(j)}, outer, inner};
        }
    for (size_t a = 0; a < E.size(); ++a)
        for (int p : {E[a].u, E[a].v})
            for (size_t b = 0; b < E.size(); ++b) {
                if (a == b) continue;
                const auto& e = E[b];
                if (p == e.u || p == e.v) continue;
                auto pr = detail::project(N[p], N[e.u], N[e.v]);
                if (pr.kind != detail::Projection::Interior) continue;  // vertex pairs already checked
                Rational eexp = W.edge_exponent(b);
                PuiseuxSeries cr = cross(N[e.v] - N[e.u], N[p] - N[e.u]);
                if (cr.is_zero()) fail(ErrorKind::TruncationTooShort, "vertex on an edge up to truncation");
                Rational outer = cr.order() - eexp;
                Rational to_u = pr.num.order() - eexp;
                PuiseuxSeries rest = pr.den - pr.num;
                Rational to_v = rest.order() - eexp;
                Rational inner;
                if (W.connected(p, e.u) || W.connected(p, e.v)) {
                    inner = 0;
                    if (W.connected(p, e.u)) inner = std::max(inner, std::min(W.between(p, e.u), to_u));
                    if (W.connected(p, e.v)) inner = std::max(inner, std::min(W.between(p, e.v), to_v));
                    inner = std::max(inner, Rational(1));
                } else {
                    inner = 1;
                }
                if (outer != inner)
                    return LneWitness{{p}, {-1, int(b), p}, outer, inner};
            }
    return std::nullopt;
}

namespace detail {

struct SampledLink {
    std::vector<Point2> node_pts;            // relative to node 0
    std::vector<double> node_abs_norm;       // |node| in R^3 at height t
    std::vector<double> edge_len;
    std::vector<std::vector<double>> dnode;  // inner distances between nodes (inf if disconnected)
};

inline SampledLink sample_link(const PolygonalGerm& g, double t) {
    SampledLink s;
    const auto& N = g.nodes();
    for (auto& n : N) {
        s.node_pts.push_back((n - N[0]).at(t));
        Point2 a = n.at(t);
        s.node_abs_norm.push_back(std::sqrt(dot(a, a) + t * t));
    }
    const double inf = std::numeric_limits<double>::infinity();
    size_t n = N.size();
    s.dnode.assign(n, std::vector<double>(n, inf));
    for (size_t i = 0; i < n; ++i) s.dnode[i][i] = 0;
    for (auto& e : g.edges()) {
        double l = norm((N[e.u] - N[e.v]).at(t));
        s.edge_len.push_back(l);
        s.dnode[e.u][e.v] = std::min(s.dnode[e.u][e.v], l);
        s.dnode[e.v][e.u] = s.dnode[e.u][e.v];
    }
    for (size_t k = 0; k < n; ++k)
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) s.dnode[i][j] = std::min(s.dnode[i][j], s.dnode[i][k] + s.dnode[k][j]);
    return s;
}

struct Sample {
    int edge;   // -1 for a node
    int node;   // node id when edge == -1
    double s;   // parameter along edge u -> v
    Point2 p;   // relative coordinates
};

} // namespace detail

// Sup of inner/outer distance ratios over vertices, interior samples and vertex projections.
inline double lne_constant(const PolygonalGerm& g, double t, int interior_samples = 3) {
    if (!(t > 0)) fail(ErrorKind::InvalidT, "t must be positive");
    auto L = detail::sample_link(g, t);
    const auto& E = g.edges();
    std::vector<detail::Sample> samples;
    for (size_t i = 0; i < g.nodes().size(); ++i) samples.push_back({-1, int(i), 0, L.node_pts[i]});
    for (size_t b = 0; b < E.size(); ++b) {
        Point2 u = L.node_pts[E[b].u], v = L.node_pts[E[b].v];
        std::vector<double> params;
        for (int k = 1; k <= interior_samples; ++k) params.push_back(double(k) / (interior_samples + 1));
        for (size_t i = 0; i < g.nodes().size(); ++i) {
            Point2 d = v - u;
            double s = dot(L.node_pts[i] - u, d) / dot(d, d);
            if (s > 1e-9 && s < 1 - 1e-9) params.push_back(s);
        }
        for (double s : params) samples.push_back({int(b), -1, s, u + s * (v - u)});
    }
    auto abs_norm = [&](const detail::Sample& a) {
        if (a.edge < 0) return L.node_abs_norm[a.node];
        return (1 - a.s) * L.node_abs_norm[E[a.edge].u] + a.s * L.node_abs_norm[E[a.edge].v];
    };
    auto ends = [&](const detail::Sample& a) {
        std::vector<std::pair<int, double>> r;
        if (a.edge < 0) {
            r.push_back({a.node, 0.0});
        } else {
            r.push_back({E[a.edge].u, a.s * L.edge_len[a.edge]});
            r.push_back({E[a.edge].v, (1 - a.s) * L.edge_len[a.edge]});
        }
        return r;
    };
    double best = 1.0;
    for (size_t i = 0; i < samples.size(); ++i)
        for (size_t j = i + 1; j < samples.size(); ++j) {
            const auto& a = samples[i];
            const auto& b = samples[j];
            double d = dist(a.p, b.p);
            if (d <= 0) continue;
            double dx = std::numeric_limits<double>::infinity();
            if (a.edge >= 0 && a.edge == b.edge) dx = std::abs(a.s - b.s) * L.edge_len[a.edge];
            for (auto [na, la] : ends(a))
                for (auto [nb, lb] : ends(b)) dx = std::min(dx, la + L.dnode[na][nb] + lb);
            dx = std::min(dx, abs_norm(a) + abs_norm(b));
            best = std::max(best, dx / d);
        }
    return best;
}

inline bool constants_flat(const std::vector<std::pair<double, double>>& est) {
    std::vector<double> v;
    for (auto& [t, c] : est) v.push_back(c);
    if (v.empty()) return true;
    std::sort(v.begin(), v.end());
    double median = v[v.size() / 2];
    return v.back() <= 2 * median;
}

inline LneVerdict is_lne(const PolygonalGerm& g, const std::vector<double>* grid = nullptr) {
    LneVerdict out;
    const auto& ts = grid ? *grid : g.grid();
    for (double t : ts) out.constant_estimates.push_back({t, lne_constant(g, t)});
    out.flat = constants_flat(out.constant_estimates);
    try {
        out.witness = lne_symbolic(g);
        out.status = out.witness ? LneStatus::NotLNE : LneStatus::LNE;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::TruncationTooShort) throw;
        out.symbolic_decided = false;
        if (!out.flat) throw;
        out.status = LneStatus::HeuristicLNE;
    }
    return out;
}

// Inner/outer ratio at a witness pair, numerically.
inline double witness_ratio(const PolygonalGerm& g, const LneWitness& w, double t) {
    auto L = detail::sample_link(g, t);
    const auto& E = g.edges();
    auto resolve = [&](const LinkPoint& lp) -> detail::Sample {
        if (lp.node >= 0) return {-1, lp.node, 0, L.node_pts[lp.node]};
        Point2 u = L.node_pts[E[lp.edge].u], v = L.node_pts[E[lp.edge].v];
        Point2 d = v - u;
        double s = dot(L.node_pts[lp.foot_of] - u, d) / dot(d, d);
        return {lp.edge, -1, s, u + s * d};
    };
    auto a = resolve(w.p), b = resolve(w.q);
    auto ends = [&](const detail::Sample& x) {
        std::vector<std::pair<int, double>> r;
        if (x.edge < 0) return std::vector<std::pair<int, double>>{{x.node, 0.0}};
        r.push_back({E[x.edge].u, x.s * L.edge_len[x.edge]});
        r.push_back({E[x.edge].v, (1 - x.s) * L.edge_len[x.edge]});
        return r;
    };
    double dx = std::numeric_limits<double>::infinity();
    for (auto [na, la] : ends(a))
        for (auto [nb, lb] : ends(b)) dx = std::min(dx, la + L.dnode[na][nb] + lb);
    return dx / dist(a.p, b.p);
}

} // namespace lipgeo
