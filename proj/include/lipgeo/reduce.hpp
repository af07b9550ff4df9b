#pragma once

#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lipgeo/envelope.hpp"
#include "lipgeo/germ_io.hpp"
#include "lipgeo/hull.hpp"
#include "lipgeo/metric.hpp"

namespace lipgeo {

// ---- moves -------------------------------------------------------------------

enum class MoveKind { CollinearRemoval, VertexSlide, VertexDrop, Perturbation, TriangleCollapse, MaxRunCollapse };

inline std::string_view to_string(MoveKind k) {
    switch (k) {
    case MoveKind::CollinearRemoval: return "CollinearRemoval";
    case MoveKind::VertexSlide: return "VertexSlide";
    case MoveKind::VertexDrop: return "VertexDrop";
    case MoveKind::Perturbation: return "Perturbation";
    case MoveKind::TriangleCollapse: return "TriangleCollapse";
    case MoveKind::MaxRunCollapse: return "MaxRunCollapse";
    }
    return "?";
}

inline MoveKind move_kind_from(std::string_view s) {
    for (auto k : {MoveKind::CollinearRemoval, MoveKind::VertexSlide, MoveKind::VertexDrop, MoveKind::Perturbation,
                   MoveKind::TriangleCollapse, MoveKind::MaxRunCollapse})
        if (to_string(k) == s) return k;
    fail(ErrorKind::ParseError, "unknown move kind '" + std::string(s) + "'");
}

// One replayable change of a component's vertex list.
//   Remove: drop `vertex`.
//   Slide:  v[vertex] += fraction * (v[toward] - v[vertex]).
//   Insert: new arc v[vertex] + fraction * t^shift * (v[toward] - v[vertex]) placed between the two.
struct Edit {
    enum Kind { Remove, Slide, Insert } kind = Remove;
    int vertex = 0;
    int toward = -1;
    Rational fraction = 0;
    Rational shift = 0;
    friend bool operator==(const Edit&, const Edit&) = default;
};

inline void apply_edit(Component& c, const Edit& e) {
    int n = static_cast<int>(c.size());
    auto check = [&](int i) {
        if (i < 0 || i >= n) fail(ErrorKind::PreconditionFailed, "edit index " + std::to_string(i) + " out of range");
    };
    check(e.vertex);
    switch (e.kind) {
    case Edit::Remove:
        c.vertices.erase(c.vertices.begin() + e.vertex);
        return;
    case Edit::Slide: {
        check(e.toward);
        auto& v = c.vertices[e.vertex];
        v = v + e.fraction * (c.vertices[e.toward] - v);
        return;
    }
    case Edit::Insert: {
        check(e.toward);
        const auto& a = c.vertices[e.vertex];
        ArcGerm w = a + PuiseuxSeries::monomial(e.fraction, e.shift) * (c.vertices[e.toward] - a);
        int succ = (e.vertex + 1) % n, pred = (e.vertex + n - 1) % n;
        int pos;
        if (e.toward == succ && (c.closed || e.vertex + 1 < n))
            pos = e.vertex + 1;
        else if (e.toward == pred && (c.closed || e.vertex > 0))
            pos = e.vertex == 0 ? n : e.vertex;
        else
            fail(ErrorKind::PreconditionFailed, "insert needs adjacent vertices");
        c.vertices.insert(c.vertices.begin() + pos, w);
        return;
    }
    }
}

struct ReductionMove {
    MoveKind kind = MoveKind::VertexDrop;
    int component = 0;
    int vertex = -1;
    std::vector<Edit> edits;
    std::vector<std::pair<std::string, Rational>> params;
    std::string envelope;  // "theta <value>" or "delta <value>" or "none"
    std::vector<ClearanceCertificate> certificates;

    bool certified() const {
        if (certificates.empty()) return false;
        for (auto& c : certificates)
            if (!c.clear) return false;
        return true;
    }
};

struct MoveResult {
    PolygonalGerm germ;
    ReductionMove move;
};

// ---- canonical forms and traces -----------------------------------------------

struct CanonicalForm {
    enum Kind { HolderTriangle, Horn } kind = HolderTriangle;
    Rational exponent = 1;
    bool circumradius_checked = false;

    bool is_cone() const { return kind == Horn && exponent == 1; }
    std::string str() const {
        if (kind == HolderTriangle) return "HolderTriangle alpha=" + to_string(exponent);
        return "Horn beta=" + to_string(exponent) + (is_cone() ? " (cone)" : "");
    }
    friend bool operator==(const CanonicalForm& a, const CanonicalForm& b) {
        return a.kind == b.kind && a.exponent == b.exponent;
    }
};

inline std::string germ_digest(const PolygonalGerm& g) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : write_germ(g)) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

struct ReductionTrace {
    std::string initial_digest;
    std::vector<ReductionMove> moves;
    std::string final_germ;  // germ file text
    std::optional<CanonicalForm> form;
};

inline std::string write_trace(const ReductionTrace& tr) {
    std::ostringstream os;
    os << "lipgerm-trace v1\n";
    os << "digest " << tr.initial_digest << "\n";
    for (size_t k = 0; k < tr.moves.size(); ++k) {
        const auto& m = tr.moves[k];
        os << "move " << k + 1 << " " << to_string(m.kind) << " component " << m.component << " vertex " << m.vertex
           << "\n";
        for (auto& e : m.edits) {
            switch (e.kind) {
            case Edit::Remove: os << "  edit remove " << e.vertex << "\n"; break;
            case Edit::Slide:
                os << "  edit slide " << e.vertex << " toward " << e.toward << " fraction " << e.fraction << "\n";
                break;
            case Edit::Insert:
                os << "  edit insert " << e.vertex << " toward " << e.toward << " fraction " << e.fraction << " shift "
                   << e.shift << "\n";
                break;
            }
        }
        for (auto& [name, v] : m.params) os << "  param " << name << " " << v << "\n";
        os << "  envelope " << (m.envelope.empty() ? "none" : m.envelope) << "\n";
        for (auto& c : m.certificates) os << "  certificate " << c.summary() << "\n";
        os << "end\n";
    }
    os << "final\n" << tr.final_germ;
    if (tr.form) os << "form " << tr.form->str() << "\n";
    return os.str();
}

// Reads back the replayable part of a trace: digest, moves with edits and params, final germ.
// Certificates come back as summaries only (clear flag set from the text).
inline ReductionTrace read_trace(const std::string& text) {
    ReductionTrace tr;
    std::istringstream in(text);
    std::string line;
    auto bad = [](const std::string& l) -> void { fail(ErrorKind::ParseError, "trace: cannot parse '" + l + "'"); };
    if (!std::getline(in, line) || line != "lipgerm-trace v1") bad(line);
    bool in_final = false;
    std::string final_text;
    while (std::getline(in, line)) {
        if (in_final) {
            if (line.rfind("form ", 0) == 0) continue;  // recomputed by the reader if needed
            final_text += line + "\n";
            continue;
        }
        std::istringstream ls(line);
        std::string w;
        ls >> w;
        if (w == "digest") {
            ls >> tr.initial_digest;
        } else if (w == "move") {
            ReductionMove m;
            std::string idx, kind, ck, vk;
            ls >> idx >> kind >> ck >> m.component >> vk >> m.vertex;
            if (!ls || ck != "component" || vk != "vertex") bad(line);
            m.kind = move_kind_from(kind);
            tr.moves.push_back(std::move(m));
        } else if (w == "edit" || w == "param" || w == "envelope" || w == "certificate") {
            if (tr.moves.empty()) bad(line);
            auto& m = tr.moves.back();
            if (w == "edit") {
                Edit e;
                std::string kind, kw;
                ls >> kind >> e.vertex;
                if (kind == "remove") {
                    e.kind = Edit::Remove;
                } else {
                    std::string frac;
                    ls >> kw >> e.toward >> frac >> e.fraction;
                    if (kw != "toward" || frac != "fraction") bad(line);
                    e.fraction.canonicalize();
                    if (kind == "slide") {
                        e.kind = Edit::Slide;
                    } else if (kind == "insert") {
                        e.kind = Edit::Insert;
                        std::string sh;
                        ls >> sh >> e.shift;
                        if (sh != "shift") bad(line);
                        e.shift.canonicalize();
                    } else {
                        bad(line);
                    }
                }
                if (!ls) bad(line);
                m.edits.push_back(e);
            } else if (w == "param") {
                std::string name;
                Rational v;
                ls >> name >> v;
                if (!ls) bad(line);
                v.canonicalize();
                m.params.push_back({name, v});
            } else if (w == "envelope") {
                std::getline(ls >> std::ws, m.envelope);
            } else {
                std::string rest;
                std::getline(ls >> std::ws, rest);
                ClearanceCertificate c;
                c.clear = rest.rfind("Clear", 0) == 0;
                c.symbolic_confirmed = c.clear;
                m.certificates.push_back(c);
            }
        } else if (w == "end") {
        } else if (w == "final") {
            in_final = true;
        } else if (!w.empty()) {
            bad(line);
        }
    }
    tr.final_germ = final_text;
    return tr;
}

// Applies every edit of every move to the initial germ, in order.
inline PolygonalGerm replay(const PolygonalGerm& initial, const std::vector<ReductionMove>& moves) {
    auto comps = initial.components();
    for (auto& m : moves) {
        if (m.component < 0 || m.component >= int(comps.size()))
            fail(ErrorKind::PreconditionFailed, "move names a missing component");
        for (auto& e : m.edits) apply_edit(comps[m.component], e);
    }
    return make_polygonal_germ(comps, initial.options());
}

// ---- geometric helpers ----------------------------------------------------------

namespace detail {

inline PolygonalGerm with_component(const PolygonalGerm& g, int c, Component comp) {
    auto comps = g.components();
    comps.at(c) = std::move(comp);
    return make_polygonal_germ(std::move(comps), g.options());
}

inline PolygonalGerm with_edits(const PolygonalGerm& g, int c, const std::vector<Edit>& edits) {
    Component comp = g.component(c);
    for (auto& e : edits) apply_edit(comp, e);
    return with_component(g, c, std::move(comp));
}

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

// Neighbours of vertex i, or -1 at the ends of an open chain.
inline std::pair<int, int> neighbours(const Component& c, int i) {
    int n = static_cast<int>(c.size());
    int p = i - 1, q = i + 1;
    if (c.closed) {
        p = wrap(p, n);
        q = wrap(q, n);
    } else {
        if (p < 0) p = -1;
        if (q >= n) q = -1;
    }
    return {p, q};
}

inline Rational edge_tord(const Component& c, int i, int j) { return distance_exponent(c.vertices[i], c.vertices[j]); }

// Leading-order collinearity: all three pairwise distances share one exponent
// and the oriented area drops below that scale squared.
inline bool leading_collinear(const ArcGerm& a, const ArcGerm& b, const ArcGerm& c) {
    auto s = orient_series(a, b, c);
    if (s.is_zero()) return true;
    Rational e = distance_exponent(a, b);
    if (distance_exponent(a, c) != e || distance_exponent(b, c) != e) return false;
    return s.order() > 2 * e;
}

inline bool degenerate_triple(const ArcGerm& a, const ArcGerm& b, const ArcGerm& c) {
    return eventual_orient(a, b, c) == 0 || leading_collinear(a, b, c);
}

// Exact orientation and order predicates on arcs, for the hull triangulation.
struct ArcPoints {
    std::vector<ArcGerm> arcs;
    size_t size() const { return arcs.size(); }
    int orient(int i, int j, int k) const { return eventual_orient(arcs[i], arcs[j], arcs[k]); }
    bool less(int i, int j) const {
        for (auto coord : {&ArcGerm::x, &ArcGerm::y}) {
            auto o = compare_eventual(arcs[i].*coord, arcs[j].*coord);
            if (o == Ordering::Inconclusive) fail(ErrorKind::UnstableCombinatorics, "arc order undecided");
            if (o != Ordering::Equal) return o == Ordering::Less;
        }
        return false;
    }
};

// A consecutive run of vertex indices of one component.
struct ChainView {
    std::vector<int> idx;
    bool closed = false;
    int size() const { return static_cast<int>(idx.size()); }
    int at(int k) const { return idx[wrap(k, size())]; }
};

inline ChainView whole_view(const Component& c) {
    ChainView v;
    v.closed = c.closed;
    for (int i = 0; i < int(c.size()); ++i) v.idx.push_back(i);
    return v;
}

inline int index_of(const Component& c, const ArcGerm& a) {
    for (int i = 0; i < int(c.size()); ++i)
        if (c.vertices[i] == a) return i;
    fail(ErrorKind::PipelineStuck, "window end arc vanished from the component");
}

// Open window from arc `s` forward to arc `e`.
inline ChainView window_view(const Component& c, const ArcGerm& s, const ArcGerm& e) {
    ChainView v;
    int n = static_cast<int>(c.size());
    int i = index_of(c, s), j = index_of(c, e);
    for (int k = i;; k = wrap(k + 1, n)) {
        v.idx.push_back(k);
        if (k == j) break;
        if (!c.closed && k == n - 1) fail(ErrorKind::PipelineStuck, "window runs off the open chain");
    }
    return v;
}

inline bool all_equal(const std::vector<Rational>& v) {
    for (auto& x : v)
        if (x != v.front()) return false;
    return true;
}

inline std::vector<Rational> view_tords(const Component& c, const ChainView& v) {
    std::vector<Rational> out;
    int m = v.size(), edges = v.closed ? m : m - 1;
    for (int k = 0; k < edges; ++k) out.push_back(edge_tord(c, v.at(k), v.at(k + 1)));
    return out;
}

inline std::string rational_text(double x) {
    std::ostringstream os;
    os << std::setprecision(9) << x;
    return os.str();
}

} // namespace detail

// ---- certified primitive moves ----------------------------------------------------

struct ReduceOptions {
    int max_halvings = 10;           // epsilon search: 1/2 ... 2^-max_halvings
    int delta_halvings = 20;         // supporting envelope search
    double theta_floor = std::ldexp(1.0, -20);
    bool check_invariants = true;
};

namespace detail {

// Kneading certificate for replacing wedge (a, m, b) of component c by the segment ab.
inline ThetaResult wedge_certificate(const PolygonalGerm& g, int c, int a, int m, int b, const ReduceOptions& opt) {
    const auto& V = g.component(c).vertices;
    std::vector<ArcGerm> w{V[a], V[m], V[b]};
    return theta_search(w[0], w[1], w[2], g, chain_edges(g, w), opt.theta_floor);
}

inline void check_angle_open(const Component& c, int i) {
    auto [p, q] = neighbours(c, i);
    if (p < 0 || q < 0) fail(ErrorKind::PreconditionFailed, "vertex " + std::to_string(i) + " is a chain end");
    const auto &A = c.vertices[p], &B = c.vertices[i], &C = c.vertices[q];
    if (limit_angle_is_pi(A, B, C) || limit_angle_is_zero(A, B, C))
        fail(ErrorKind::PreconditionFailed, "limit angle at vertex " + std::to_string(i) + " is not in (0, pi)");
}

// Slide of vertex i toward its neighbour j by the fraction q, certified by kneading the wedge
// (new point, old vertex, other neighbour) onto its base.
inline std::optional<MoveResult> try_slide(const PolygonalGerm& g, int c, int i, int j, const Rational& q,
                                           const ReduceOptions& opt) {
    const Component& comp = g.component(c);
    int n = static_cast<int>(comp.size());
    auto [p, s] = neighbours(comp, i);
    int k = j == p ? s : p;
    // temporary germ with the slid point inserted on edge (i, j)
    Component tmp = comp;
    apply_edit(tmp, Edit{Edit::Insert, i, j, q, 0});
    int ins = (j == wrap(i + 1, n) && (comp.closed || i + 1 < n)) ? i + 1 : (i == 0 ? n : i);
    int old_i = ins <= i ? i + 1 : i;
    int other = ins <= k ? k + 1 : k;
    PolygonalGerm T;
    try {
        T = with_component(g, c, tmp);
    } catch (const Error&) {
        return std::nullopt;
    }
    try {
        auto r = wedge_certificate(T, c, ins, old_i, other, opt);
        ReductionMove m;
        m.kind = MoveKind::VertexSlide;
        m.component = c;
        m.vertex = i;
        m.edits = {Edit{Edit::Slide, i, j, q, 0}};
        m.params = {{"eps", q}};
        m.envelope = "theta " + rational_text(r.theta);
        m.certificates = {r.certificate};
        return MoveResult{with_edits(g, c, m.edits), std::move(m)};
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::NoThetaFound || e.kind() == ErrorKind::DegenerateWedge) return std::nullopt;
        throw;
    }
}

inline void check_slide_pre(const Component& comp, int i, int j) {
    auto [p, s] = neighbours(comp, i);
    if (p < 0 || s < 0) fail(ErrorKind::PreconditionFailed, "cannot slide a chain end");
    if (j != p && j != s) fail(ErrorKind::PreconditionFailed, "slide target is not a neighbour");
    if (edge_tord(comp, p, i) != edge_tord(comp, i, s))
        fail(ErrorKind::TordMismatch, "edges at vertex " + std::to_string(i) + " have exponents " +
                                          to_string(edge_tord(comp, p, i)) + " and " + to_string(edge_tord(comp, i, s)));
    check_angle_open(comp, i);
}

} // namespace detail

// Removes vertex i where the chain is straight in the limit; certified by a supporting envelope.
inline MoveResult remove_collinear(const PolygonalGerm& g, int i, int c = 0, const ReduceOptions& opt = {}) {
    const Component& comp = g.component(c);
    auto [p, q] = detail::neighbours(comp, i);
    if (p < 0 || q < 0) fail(ErrorKind::AngleNotPi, "vertex " + std::to_string(i) + " is a chain end");
    if (!comp.closed && comp.size() < 3) fail(ErrorKind::AngleNotPi, "no interior vertex");
    if (comp.closed && comp.size() < 4) fail(ErrorKind::PreconditionFailed, "closed chain would drop below 3 vertices");
    const auto &A = comp.vertices[p], &B = comp.vertices[i], &C = comp.vertices[q];
    if (!limit_angle_is_pi(A, B, C)) fail(ErrorKind::AngleNotPi, "limit angle at vertex " + std::to_string(i) + " is not pi");
    std::vector<ArcGerm> w{A, B, C};
    auto fam = synchronized_view(w, Rotation::from_angle(limit_direction(C - A).angle()), g.grid_depth());
    auto excluded = chain_edges(g, w);
    Rational delta(1, 2);
    std::string last = "no delta tried";
    for (int k = 0; k <= opt.delta_halvings; ++k, delta /= 2) {
        auto env = supporting_envelope(fam, delta);
        auto cert = clearance(env.shape(w), g, excluded, g.grid());
        if (!cert.clear) {
            last = cert.summary();
            continue;
        }
        ReductionMove m;
        m.kind = MoveKind::CollinearRemoval;
        m.component = c;
        m.vertex = i;
        m.edits = {Edit{Edit::Remove, i}};
        m.params = {{"delta", delta}};
        m.envelope = "delta " + delta.get_str();
        m.certificates = {cert};
        return {detail::with_edits(g, c, m.edits), std::move(m)};
    }
    fail(ErrorKind::ClearanceFailed, "no clear supporting envelope at vertex " + std::to_string(i) + ": " + last);
}

// Moves vertex i toward neighbour `toward` (default: the previous one) by the edge fraction eps.
inline MoveResult slide_vertex(const PolygonalGerm& g, int i, const Rational& eps, int c = 0, int toward = -2,
                               const ReduceOptions& opt = {}) {
    const Component& comp = g.component(c);
    if (toward == -2) toward = detail::neighbours(comp, i).first;
    detail::check_slide_pre(comp, i, toward);
    if (!(eps > 0 && eps < 1)) fail(ErrorKind::EpsilonTooLarge, "eps must lie in (0, 1)");
    auto r = detail::try_slide(g, c, i, toward, eps, opt);
    if (!r) fail(ErrorKind::ClearanceFailed, "slide by " + eps.get_str() + " is not clear");
    return *r;
}

// Halving search for the slide fraction, starting at 1/2.
inline MoveResult slide_vertex_search(const PolygonalGerm& g, int i, int c = 0, int toward = -2,
                                      const ReduceOptions& opt = {}) {
    const Component& comp = g.component(c);
    if (toward == -2) toward = detail::neighbours(comp, i).first;
    detail::check_slide_pre(comp, i, toward);
    Rational q(1, 2);
    for (int k = 0; k < opt.max_halvings; ++k, q /= 2)
        if (auto r = detail::try_slide(g, c, i, toward, q, opt)) return *r;
    fail(ErrorKind::NoEpsilonFound, "no clear slide for vertex " + std::to_string(i));
}

namespace detail {

inline MoveResult collapse_wedge(const PolygonalGerm& g, int c, int a, int m, int b, MoveKind kind,
                                 const ReduceOptions& opt) {
    ThetaResult r = [&] {
        try {
            return wedge_certificate(g, c, a, m, b, opt);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::NoThetaFound || e.kind() == ErrorKind::DegenerateWedge)
                fail(ErrorKind::ClearanceFailed, "wedge at vertex " + std::to_string(m) + ": " + e.what());
            throw;
        }
    }();
    ReductionMove mv;
    mv.kind = kind;
    mv.component = c;
    mv.vertex = m;
    mv.edits = {Edit{Edit::Remove, m}};
    mv.envelope = "theta " + rational_text(r.theta);
    mv.certificates = {r.certificate};
    return {with_edits(g, c, mv.edits), std::move(mv)};
}

} // namespace detail

// Drops vertex i when one of its edges is strictly thinner than the other and the chain
// on the thick side is no thinner than the thin edge (or ends there).
inline MoveResult drop_vertex(const PolygonalGerm& g, int i, int c = 0, const ReduceOptions& opt = {}) {
    const Component& comp = g.component(c);
    int n = static_cast<int>(comp.size());
    auto [p, q] = detail::neighbours(comp, i);
    if (p < 0 || q < 0) fail(ErrorKind::PreconditionFailed, "cannot drop a chain end");
    if (comp.closed && n < 4) fail(ErrorKind::PreconditionFailed, "closed chain would drop below 3 vertices");
    Rational a_prev = detail::edge_tord(comp, p, i), a_next = detail::edge_tord(comp, i, q);
    if (a_prev == a_next) fail(ErrorKind::PreconditionFailed, "edges at vertex " + std::to_string(i) + " share their exponent");
    // thick side: the edge with the larger exponent; look one edge further along it
    bool forward = a_prev > a_next;
    int far = forward ? detail::neighbours(comp, p).first : detail::neighbours(comp, q).second;
    Rational thin = forward ? a_next : a_prev;
    if (far >= 0) {
        Rational beyond = forward ? detail::edge_tord(comp, far, p) : detail::edge_tord(comp, q, far);
        if (beyond > thin)
            fail(ErrorKind::PreconditionFailed, "edge beyond the thick side has exponent " + to_string(beyond) +
                                                    " > " + to_string(thin));
    }
    detail::check_angle_open(comp, i);
    auto r = detail::collapse_wedge(g, c, p, i, q, MoveKind::VertexDrop, opt);
    r.move.params = {{"item", Rational(far < 0 ? 1 : 2)}};
    return r;
}

namespace detail {

// True when vertex v of the view lies in a degenerate triple with two other view vertices.
inline bool vertex_degenerate(const Component& comp, const ChainView& view, int v) {
    const auto& V = comp.vertices;
    for (int a = 0; a < view.size(); ++a)
        for (int b = a + 1; b < view.size(); ++b) {
            int ia = view.idx[a], ib = view.idx[b];
            if (ia == v || ib == v) continue;
            if (degenerate_triple(V[ia], V[ib], V[v])) return true;
        }
    return false;
}

inline bool view_degenerate(const Component& comp, const ChainView& view) {
    for (int k = 0; k < view.size(); ++k)
        if (vertex_degenerate(comp, view, view.idx[k])) return true;
    return false;
}

// Direction from the moved vertex to `to` must not be parallel to any chord of the view.
inline bool direction_new(const Component& comp, const ChainView& view, int moved, const ArcGerm& from,
                          const ArcGerm& to) {
    auto d = limit_direction(to - from);
    const auto& V = comp.vertices;
    for (int a = 0; a < view.size(); ++a)
        for (int b = a + 1; b < view.size(); ++b) {
            int ia = view.idx[a], ib = view.idx[b];
            if (ia == moved || ib == moved) continue;
            if (cross(d, limit_direction(V[ib] - V[ia])) == 0) return false;
        }
    return true;
}

} // namespace detail

// Two certified slides per degenerate interior vertex of the view: first toward the previous
// vertex, then toward the next. Chain ends keep their arcs.
inline MoveResult perturb_view(const PolygonalGerm& g, int c, const detail::ChainView& view,
                               const ReduceOptions& opt = {}) {
    ReductionMove mv;
    mv.kind = MoveKind::Perturbation;
    mv.component = c;
    mv.envelope = "none";
    PolygonalGerm cur = g;
    for (int k = 1; k + 1 < view.size(); ++k) {
        int i = view.idx[k], prev = view.idx[k - 1], next = view.idx[k + 1];
        if (!detail::vertex_degenerate(cur.component(c), view, i)) continue;
        bool done = false;
        Rational q1(1, 2);
        for (int h1 = 0; h1 < opt.max_halvings && !done; ++h1, q1 /= 2) {
            const Component& comp = cur.component(c);
            ArcGerm g1 = comp.vertices[i] + q1 * (comp.vertices[prev] - comp.vertices[i]);
            if (!detail::direction_new(comp, view, i, g1, comp.vertices[next])) continue;
            Rational q2(1, 2);
            for (int h2 = 0; h2 < opt.max_halvings && !done; ++h2, q2 /= 2) {
                ArcGerm g2 = g1 + q2 * (comp.vertices[next] - g1);
                Component probe = comp;
                probe.vertices[i] = g2;
                if (!detail::direction_new(probe, view, i, g2, comp.vertices[prev])) continue;
                if (detail::vertex_degenerate(probe, view, i)) continue;
                auto s1 = detail::try_slide(cur, c, i, prev, q1, opt);
                if (!s1) break;  // smaller q2 will not help step one
                auto s2 = detail::try_slide(s1->germ, c, i, next, q2, opt);
                if (!s2) continue;
                for (auto* s : {&*s1, &*s2}) {
                    mv.edits.push_back(s->move.edits.front());
                    mv.certificates.push_back(s->move.certificates.front());
                    mv.envelope = s->move.envelope;
                }
                mv.params.push_back({"eps1_v" + std::to_string(i), q1});
                mv.params.push_back({"eps2_v" + std::to_string(i), q2});
                if (mv.vertex < 0) mv.vertex = i;
                cur = s2->germ;
                done = true;
            }
        }
        if (!done) fail(ErrorKind::NoEpsilonFound, "cannot perturb vertex " + std::to_string(i));
    }
    if (detail::view_degenerate(cur.component(c), view))
        fail(ErrorKind::NoEpsilonFound, "chain is still degenerate after perturbation");
    if (mv.edits.empty()) {
        // identity move; the empty certificate list marks it as trivially clear
        ClearanceCertificate id;
        id.clear = id.symbolic_confirmed = true;
        id.ts = g.grid();
        mv.certificates = {id};
    }
    return {cur, std::move(mv)};
}

inline MoveResult perturb_to_nondegenerate(const PolygonalGerm& g, int c = 0, const ReduceOptions& opt = {}) {
    const Component& comp = g.component(c);
    auto tords = detail::view_tords(comp, detail::whole_view(comp));
    if (!detail::all_equal(tords)) fail(ErrorKind::PreconditionFailed, "edge exponents differ");
    auto view = detail::whole_view(comp);
    view.closed = false;  // chain ends stay fixed, also for closed chains
    return perturb_view(g, c, view, opt);
}

// ---- pipeline -----------------------------------------------------------------------

struct GermInvariants {
    LneStatus lne = LneStatus::LNE;
    size_t components = 0;
    std::vector<bool> closed;
    Rational min_exponent;

    static GermInvariants of(const PolygonalGerm& g) {
        GermInvariants v;
        v.lne = is_lne(g).status;
        v.components = g.component_count();
        for (auto& c : g.components()) v.closed.push_back(c.closed);
        v.min_exponent = min_edge_exponent(g);
        return v;
    }
    // HeuristicLNE and LNE count as the same status.
    bool same_as(const GermInvariants& o) const {
        return (lne == LneStatus::NotLNE) == (o.lne == LneStatus::NotLNE) && components == o.components &&
               closed == o.closed && min_exponent == o.min_exponent;
    }
};

class ReductionPipeline {
public:
    ReductionPipeline(PolygonalGerm g, int component, ReduceOptions opt)
        : g_(std::move(g)), c_(component), opt_(opt) {
        if (opt_.check_invariants) inv_ = GermInvariants::of(g_);
    }

    const PolygonalGerm& germ() const { return g_; }
    const std::vector<ReductionMove>& moves() const { return moves_; }
    const Component& comp() const { return g_.component(c_); }

    bool finished() const {
        auto& k = comp();
        return k.closed ? k.size() == 3 : k.size() == 2;
    }

    void run() {
        size_t guard = 8 * comp().size() + 32;
        while (!finished()) {
            if (guard-- == 0) stuck("no progress");
            step();
        }
    }

    // One stage of the case analysis on the whole component.
    void step() {
        auto view = detail::whole_view(comp());
        if (remove_collinear_in(view)) return;
        auto tords = detail::view_tords(comp(), view);
        if (detail::all_equal(tords))
            case1_step(view);
        else
            case2_step(tords);
    }

    // Reduces all-equal-exponent chains to a segment or a 3-gon.
    void case1_reduce_whole() {
        while (!finished()) case1_step(detail::whole_view(comp()));
    }

    void case2_step(const std::vector<Rational>& a) {
        const auto& k = comp();
        int n = static_cast<int>(k.size());
        if (!k.closed) {
            int E = n - 1;
            if (a[0] > a[1]) return push(drop_vertex(g_, 1, c_, opt_));
            if (a[E - 1] > a[E - 2]) return push(drop_vertex(g_, n - 2, c_, opt_));
        }
        Rational top = *std::max_element(a.begin(), a.end());
        int E = static_cast<int>(a.size());
        // leftmost maximal run [k1, k2] of edges at the top exponent
        int k1 = -1, k2 = -1;
        if (!k.closed) {
            for (int e = 0; e < E; ++e)
                if (a[e] == top) {
                    k1 = e;
                    break;
                }
            k2 = k1;
            while (k2 + 1 < E && a[k2 + 1] == top) ++k2;
        } else {
            for (int e = 0; e < E; ++e)
                if (a[e] == top && a[detail::wrap(e - 1, E)] != top) {
                    k1 = e;
                    break;
                }
            k2 = k1;
            while (a[detail::wrap(k2 + 1, E)] == top) ++k2;
        }
        bool has_prev = k.closed || k1 > 0, has_next = k.closed || k2 < E - 1;
        int prev_e = detail::wrap(k1 - 1, E), next_e = detail::wrap(k2 + 1, E);
        if (k1 == k2 && has_prev && has_next) {
            // single interior edge: drop one of its ends
            int left = k1, right = detail::wrap(k1 + 1, n);
            if (a[prev_e] > a[next_e])
                return push(drop_vertex(g_, left, c_, opt_));
            return push(drop_vertex(g_, right, c_, opt_));
        }
        collapse_run(k1, k2, top, has_prev, has_next);
    }

    // Flanks the run with substitute arcs where it meets thinner edges, then collapses it.
    void collapse_run(int k1, int k2, const Rational& top, bool has_prev, bool has_next) {
        const auto& k0 = comp();
        int n = static_cast<int>(k0.size());
        ArcGerm start = k0.vertices[k1], end = k0.vertices[detail::wrap(k2 + 1, n)];
        // leading coefficient of the run's length
        double run_len = 0;
        for (int e = k1; e <= k2; ++e) {
            auto d = k0.vertices[detail::wrap(e + 1, n)] - k0.vertices[detail::wrap(e, n)];
            run_len += std::sqrt(norm2_leading(d.x, d.y).coeff.get_d());
        }
        ReductionMove mv;
        mv.kind = MoveKind::MaxRunCollapse;
        mv.component = c_;
        mv.vertex = k1;
        mv.params = {{"run_first", Rational(k1)}, {"run_last", Rational(k2)}, {"alpha", top}};
        mv.envelope = "none";
        Component work = k0;
        auto flank = [&](const ArcGerm& at, bool forward) {
            int i = detail::index_of(work, at);
            int m = static_cast<int>(work.size());
            int j = detail::wrap(forward ? i + 1 : i - 1, m);
            auto d = work.vertices[j] - work.vertices[i];
            auto lead = norm2_leading(d.x, d.y);
            Rational beta = lead.exponent / 2;
            Rational q = approximate(run_len / std::sqrt(lead.coeff.get_d()), 64);
            Edit e{Edit::Insert, i, j, q, top - beta};
            apply_edit(work, e);
            mv.edits.push_back(e);
            mv.params.push_back({"a_alpha", q});
            int pos = detail::index_of(work, at);
            return work.vertices[detail::wrap(forward ? pos + 1 : pos - 1, int(work.size()))];
        };
        ArcGerm ws = start, we = end;
        if (has_next) we = flank(end, true);
        if (has_prev) ws = flank(start, false);
        if (!mv.edits.empty()) {
            // subdividing edges leaves the germ unchanged as a set
            ClearanceCertificate id;
            id.clear = id.symbolic_confirmed = true;
            id.ts = g_.grid();
            mv.certificates = {id};
            push(MoveResult{detail::with_component(g_, c_, work), std::move(mv)});
        }
        // the window is an open chain with every edge at the top exponent
        while (true) {
            auto view = detail::window_view(comp(), ws, we);
            if (view.size() == 2) break;
            if (remove_collinear_in(view)) continue;
            case1_step(view);
        }
    }

    // Removes the lowest-index vertex of the view with a straight limit angle.
    bool remove_collinear_in(const detail::ChainView& view) {
        const auto& k = comp();
        if (k.closed && k.size() <= 3) return false;
        int m = view.size();
        for (int p = 0; p < m; ++p) {
            if (!view.closed && (p == 0 || p == m - 1)) continue;
            int i = view.idx[p];
            const auto &A = k.vertices[view.at(p - 1)], &B = k.vertices[i], &C = k.vertices[view.at(p + 1)];
            if (limit_angle_is_pi(A, B, C)) {
                push(remove_collinear(g_, i, c_, opt_));
                return true;
            }
        }
        return false;
    }

    // Case 1 on a view whose edges share one exponent: one certified collapse.
    void case1_step(const detail::ChainView& view) {
        const auto& k = comp();
        int m = view.size();
        if (view.closed ? m <= 3 : m <= 2) return;
        auto tords = detail::view_tords(k, view);
        if (!detail::all_equal(tords)) stuck("window exponents differ");
        if (!view.closed && m == 3) {
            push(detail::collapse_wedge(g_, c_, view.idx[0], view.idx[1], view.idx[2], MoveKind::TriangleCollapse, opt_));
            return;
        }
        auto pv = view;
        if (pv.closed) pv.closed = false;  // chain ends fixed as in the perturbation lemma
        if (detail::view_degenerate(k, view)) {
            push(perturb_view(g_, c_, pv, opt_));
            return;
        }
        detail::ArcPoints pts;
        for (int i : view.idx) pts.arcs.push_back(k.vertices[i]);
        auto T = chain_hull_triangulation(pts, view.closed);
        int mid = find_double_highlighted_triangle(T).middle;
        // slide the far neighbour toward the middle, then collapse the small triangle
        int prev = view.closed ? detail::wrap(mid - 1, m) : mid - 1;
        int next = view.closed ? detail::wrap(mid + 1, m) : mid + 1;
        bool can_next = view.closed || next < m - 1;
        bool can_prev = view.closed || prev > 0;
        if (!can_next && !can_prev) stuck("highlighted triangle spans the whole window");
        int slid = can_next ? next : prev, keep = can_next ? prev : next;
        int vi = view.idx[mid], vs = view.idx[slid], vk = view.idx[keep];
        ArcGerm mid_arc = k.vertices[vi], keep_arc = k.vertices[vk];
        Rational q(1, 2);
        std::string why;
        for (int h = 0; h < opt_.max_halvings; ++h, q /= 2) {
            auto s = detail::try_slide(g_, c_, vs, vi, q, opt_);
            if (!s) {
                why = "slide not clear";
                continue;
            }
            const auto& k2 = s->germ.component(c_);
            int a = detail::index_of(k2, keep_arc), b = detail::index_of(k2, mid_arc);
            int cidx = detail::index_of(k2, k2.vertices[vs]);
            try {
                auto col = detail::collapse_wedge(s->germ, c_, a, b, cidx, MoveKind::TriangleCollapse, opt_);
                push(std::move(*s));
                push(std::move(col));
                return;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::ClearanceFailed) throw;
                why = e.what();
            }
        }
        stuck("no certified triangle collapse at vertex " + std::to_string(vi) + ": " + why);
    }

private:
    [[noreturn]] void stuck(const std::string& why) const {
        std::string diag = why + "; after " + std::to_string(moves_.size()) + " moves; current chain:\n" +
                           write_germ(std::vector<Component>{comp()});
        fail(ErrorKind::PipelineStuck, diag);
    }

    void push(MoveResult r) {
        if (!r.move.certified()) stuck(std::string("uncertified ") + std::string(to_string(r.move.kind)));
        if (opt_.check_invariants && !r.move.edits.empty()) {
            auto now = GermInvariants::of(r.germ);
            if (!now.same_as(inv_))
                stuck(std::string("invariants changed by ") + std::string(to_string(r.move.kind)));
        }
        g_ = std::move(r.germ);
        moves_.push_back(std::move(r.move));
    }

    PolygonalGerm g_;
    int c_;
    ReduceOptions opt_;
    GermInvariants inv_;
    std::vector<ReductionMove> moves_;
};

// One leftmost maximal run (or the whole chain when every edge shares its exponent) reduced.
inline std::pair<PolygonalGerm, std::vector<ReductionMove>> collapse_equal_run(const PolygonalGerm& g, int c = 0,
                                                                               const ReduceOptions& opt = {}) {
    ReductionPipeline P(g, c, opt);
    auto view = detail::whole_view(P.comp());
    auto tords = detail::view_tords(P.comp(), view);
    if (detail::all_equal(tords))
        P.case1_reduce_whole();
    else
        P.case2_step(tords);
    return {P.germ(), P.moves()};
}

namespace detail {

inline CanonicalForm final_form(const Component& k) {
    CanonicalForm f;
    if (!k.closed) {
        if (k.size() != 2) fail(ErrorKind::PipelineStuck, "open chain not reduced to one edge");
        f.kind = CanonicalForm::HolderTriangle;
        f.exponent = distance_exponent(k.vertices[0], k.vertices[1]);
        return f;
    }
    if (k.size() != 3) fail(ErrorKind::PipelineStuck, "closed chain not reduced to a 3-gon");
    const auto &A = k.vertices[0], &B = k.vertices[1], &C = k.vertices[2];
    Rational x = distance_exponent(A, B), y = distance_exponent(B, C), z = distance_exponent(C, A);
    if (x != y || y != z) fail(ErrorKind::PipelineStuck, "3-gon sides have different exponents");
    f.kind = CanonicalForm::Horn;
    f.exponent = x;
    // circumradius xyz / 4S: exponent x + y + z - order(2S)
    auto area2 = orient_series(A, B, C);
    if (area2.is_zero()) fail(ErrorKind::PipelineStuck, "final 3-gon is flat");
    Rational r = x + y + z - area2.order();
    f.circumradius_checked = r == x;
    if (!f.circumradius_checked)
        fail(ErrorKind::PipelineStuck, "circumradius exponent " + to_string(r) + " differs from " + to_string(x));
    return f;
}

} // namespace detail

struct Classification {
    CanonicalForm form;
    ReductionTrace trace;
    PolygonalGerm final_germ;
};

inline Classification classify_connected(const PolygonalGerm& g, const ReduceOptions& opt = {}) {
    if (g.component_count() != 1) fail(ErrorKind::PreconditionFailed, "classify_connected needs one component");
    auto lne = is_lne(g);
    if (lne.status == LneStatus::NotLNE) {
        std::string w = lne.witness ? " (witness " + lne.witness->p.str() + ", " + lne.witness->q.str() + ")" : "";
        fail(ErrorKind::NotLNEInput, "germ is not LNE" + w);
    }
    ReductionPipeline P(g, 0, opt);
    P.run();
    Classification out{detail::final_form(P.comp()), {}, P.germ()};
    out.trace.initial_digest = germ_digest(g);
    out.trace.moves = P.moves();
    out.trace.final_germ = write_germ(P.germ());
    out.trace.form = out.form;
    return out;
}

inline PolygonalGerm single_component(const PolygonalGerm& g, int c) {
    return make_polygonal_germ({g.component(c)}, g.options());
}

} // namespace lipgeo
