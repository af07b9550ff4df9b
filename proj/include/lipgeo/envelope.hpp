#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lipgeo/conemaps.hpp"
#include "lipgeo/error.hpp"
#include "lipgeo/germ.hpp"
#include "lipgeo/metric.hpp"

namespace lipgeo {

// Per-t convex quadrilateral around a chain. Corners are relative to `apex` and listed
// counterclockwise; corners[0] and corners[2] sit on the anchoring arcs `first` and `last`.
struct EnvelopeShape {
    ArcGerm apex, first, last;
    std::vector<ArcGerm> chain;  // first ... last, the part being replaced
    std::function<std::array<Point2, 4>(double t)> corners;
    // limit directions bounding the envelope angle at first and last, in original coordinates
    std::array<Point2, 2> sector_first, sector_last;
    Rational diameter_exponent;
};

namespace detail {

inline Point2 rotate(Point2 v, double c, double s) { return {c * v.x - s * v.y, s * v.x + c * v.y}; }
inline Point2 unit(Point2 v) {
    double n = norm(v);
    return {v.x / n, v.y / n};
}
inline Point2 as_point(const LimitDirection& d) { return unit({d.dx.get_d(), d.dy.get_d()}); }

// Intersection of p + u d and q + w e; nullopt when parallel.
inline std::optional<std::pair<double, double>> ray_params(Point2 p, Point2 d, Point2 q, Point2 e) {
    double den = cross(d, e);
    if (std::abs(den) <= 1e-15 * norm(d) * norm(e)) return std::nullopt;
    Point2 w = q - p;
    return std::pair{cross(w, e) / den, cross(w, d) / den};
}

// Strictly inside the closed sector spanned counterclockwise from a to b (angle < pi).
inline bool in_sector(Point2 v, Point2 a, Point2 b, double margin = 1e-12) {
    return cross(a, v) >= -margin && cross(v, b) >= -margin;
}

inline bool in_convex(Point2 p, const std::array<Point2, 4>& q) {
    for (int i = 0; i < 4; ++i) {
        Point2 a = q[i], b = q[(i + 1) % 4];
        // base the cross product at the nearer end; points hugging a corner lose their offset otherwise
        Point2 base = norm(p - a) <= norm(p - b) ? a : b;
        if (cross(b - a, p - base) < 0) return false;
    }
    return true;
}

inline double segment_quad_distance(Point2 a, Point2 b, const std::array<Point2, 4>& q) {
    if (in_convex(a, q) || in_convex(b, q)) return 0;
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) d = std::min(d, segment_distance(a, b, q[i], q[(i + 1) % 4]));
    return d;
}

// Exponent of the distance from arc p to the segment between arcs u and v.
inline Rational point_segment_exponent(const ArcGerm& p, const ArcGerm& u, const ArcGerm& v) {
    if (p == u || p == v) return std::numeric_limits<int>::max();
    auto pr = project(p, u, v);
    if (pr.kind == Projection::AtU) return tord(p, u).value;
    if (pr.kind == Projection::AtV) return tord(p, v).value;
    PuiseuxSeries cr = cross(v - u, p - u);
    if (cr.is_zero()) return std::numeric_limits<int>::max();
    return cr.order() - tord(u, v).value;
}

// Exponent of the distance between two non-crossing segments: the closest endpoint-segment pair.
inline Rational segment_exponent(const ArcGerm& a, const ArcGerm& b, const ArcGerm& c, const ArcGerm& d) {
    return std::max({point_segment_exponent(a, c, d), point_segment_exponent(b, c, d),
                     point_segment_exponent(c, a, b), point_segment_exponent(d, a, b)});
}

inline Rational diameter_exponent(const std::vector<ArcGerm>& arcs) {
    Rational e = std::numeric_limits<int>::max();
    for (size_t i = 0; i < arcs.size(); ++i)
        for (size_t j = i + 1; j < arcs.size(); ++j) e = std::min(e, tord(arcs[i], arcs[j]).value);
    return e;
}

} // namespace detail

// ---- supporting envelope -------------------------------------------------------

struct EnvelopeSlopes {
    double m0, M0, m1, M1;
};

class SupportingEnvelope {
public:
    SupportingEnvelope(SynchronizedFamily fam, Rational delta) : fam_(std::move(fam)), delta_(std::move(delta)) {}

    const SynchronizedFamily& family() const { return fam_; }
    const Rational& delta() const { return delta_; }

    // Extremes of difference quotients from each endpoint; piecewise linear chains attain them at vertices.
    // Differences are formed on the series before evaluating; tiny clusters far from the origin cancel otherwise.
    EnvelopeSlopes slopes(double t) const {
        auto& a = fam_.arcs();
        size_t n = a.size();
        EnvelopeSlopes s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (size_t j = 1; j < n; ++j) {
            Point2 d = (a[j] - a[0]).at(t);
            double q = d.y / d.x;
            s.m0 = std::min(s.m0, q);
            s.M0 = std::max(s.M0, q);
        }
        for (size_t j = 0; j + 1 < n; ++j) {
            Point2 d = (a[j] - a[n - 1]).at(t);
            double q = d.y / d.x;
            s.m1 = std::min(s.m1, q);
            s.M1 = std::max(s.M1, q);
        }
        return s;
    }
    double lower(double t, double x) const {
        auto p = fam_.vertices_at(t);
        auto s = slopes(t);
        double d = delta_.get_d();
        return std::max(p.front().y + (s.m0 - d) * (x - p.front().x), p.back().y + (s.M1 + d) * (x - p.back().x));
    }
    double upper(double t, double x) const {
        auto p = fam_.vertices_at(t);
        auto s = slopes(t);
        double d = delta_.get_d();
        return std::min(p.front().y + (s.M0 + d) * (x - p.front().x), p.back().y + (s.m1 - d) * (x - p.back().x));
    }
    // Membership in the family's rotated frame.
    bool contains(double t, Point2 q, double tol = 0) const {
        auto p = fam_.vertices_at(t);
        double span = p.back().x - p.front().x, tl = tol * span;
        if (q.x < p.front().x - tl || q.x > p.back().x + tl) return false;
        return lower(t, q.x) <= q.y + tl && q.y <= upper(t, q.x) + tl;
    }

    // Limit slopes from each endpoint (exact leading-term quotients).
    EnvelopeSlopes limit_slopes() const {
        auto& a = fam_.arcs();
        size_t n = a.size();
        auto quotient = [](const ArcGerm& from, const ArcGerm& to) {
            auto dx = to.x - from.x, dy = to.y - from.y;
            if (dy.is_zero() || dy.order() > dx.order()) return 0.0;
            if (dy.order() < dx.order()) fail(ErrorKind::UnboundedFamily, "vertical limit slope");
            return Rational(dy.leading().coeff / dx.leading().coeff).get_d();
        };
        EnvelopeSlopes s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (size_t j = 1; j < n; ++j) {
            double q = quotient(a[0], a[j]);
            s.m0 = std::min(s.m0, q);
            s.M0 = std::max(s.M0, q);
        }
        for (size_t j = 0; j + 1 < n; ++j) {
            double q = quotient(a[n - 1], a[j]);
            s.m1 = std::min(s.m1, q);
            s.M1 = std::max(s.M1, q);
        }
        return s;
    }

    EnvelopeShape shape(const std::vector<ArcGerm>& original_chain) const {
        EnvelopeShape sh;
        sh.chain = original_chain;
        sh.apex = original_chain.front();
        sh.first = original_chain.front();
        sh.last = original_chain.back();
        sh.diameter_exponent = detail::diameter_exponent(original_chain);
        double c = fam_.rotation().c.get_d(), s = fam_.rotation().s.get_d(), d = delta_.get_d();
        auto back = [c, s](Point2 v) { return detail::rotate(v, c, s); };
        SupportingEnvelope self = *this;
        sh.corners = [self, back, d](double t) {
            auto& a = self.fam_.arcs();
            Point2 p1 = (a.back() - a.front()).at(t);
            auto sl = self.slopes(t);
            // lower kink: y = (m0 - d) x meets y = y1 + (M1 + d)(x - x1)
            auto kink = [&](double k0, double k1) {
                double x = (p1.y - k1 * p1.x) / (k0 - k1);
                return Point2{x, k0 * x};
            };
            Point2 lo = kink(sl.m0 - d, sl.M1 + d), hi = kink(sl.M0 + d, sl.m1 - d);
            return std::array<Point2, 4>{back({0, 0}), back(lo), back(p1), back(hi)};
        };
        auto ls = limit_slopes();
        sh.sector_first = {detail::unit(back({1, ls.m0 - d})), detail::unit(back({1, ls.M0 + d}))};
        sh.sector_last = {detail::unit(back({-1, -(ls.m1 - d)})), detail::unit(back({-1, -(ls.M1 + d)}))};
        return sh;
    }

private:
    SynchronizedFamily fam_;
    Rational delta_;
};

inline SupportingEnvelope supporting_envelope(const SynchronizedFamily& fam, const Rational& delta) {
    if (!fam.bounded()) fail(ErrorKind::UnboundedFamily, "family is not M-bounded");
    if (delta <= 0) fail(ErrorKind::PreconditionFailed, "delta must be positive");
    return SupportingEnvelope(fam, delta);
}

// Families (f, a, b, g) = (upper, chain, secant, lower) in the rotated frame, with the
// separation constant max(M, 2(delta + M)/delta).
inline IsotopyFamilies kneading_families(const SupportingEnvelope& env) {
    const auto& fam = env.family();
    double d = env.delta().get_d(), M = fam.M();
    IsotopyFamilies F;
    F.f = [env](double t, double x) { return env.upper(t, x); };
    F.g = [env](double t, double x) { return env.lower(t, x); };
    F.a = [fam](double t, double x) { return fam.f(t, x); };
    F.b = [fam](double t, double x) {
        auto p = fam.vertices_at(t);
        return p.front().y + (x - p.front().x) * (p.back().y - p.front().y) / (p.back().x - p.front().x);
    };
    F.x0 = [fam](double t) { return fam.arcs().front().at(t).x; };
    F.x1 = [fam](double t) { return fam.arcs().back().at(t).x; };
    F.M = std::max(M, 2 * (d + M) / d);
    return F;
}

// ---- kneading envelope ---------------------------------------------------------

class KneadingEnvelope {
public:
    const ArcGerm& left() const { return g1_; }
    const ArcGerm& middle() const { return g2_; }
    const ArcGerm& right() const { return g3_; }
    const Rational& theta() const { return theta_; }

    // Corners gamma_1, gamma_+, gamma_3, gamma_- relative to the middle arc (counterclockwise).
    std::array<Point2, 4> corners(double t) const {
        Point2 p1 = (g1_ - g2_).at(t), p3 = (g3_ - g2_).at(t);
        double c = rot_.c.get_d(), s = sgn_ * rot_.s.get_d();
        Point2 d1p = detail::rotate(Point2{0, 0} - p1, c, -s);
        Point2 d3p = detail::rotate(Point2{0, 0} - p3, c, s);
        Point2 d1m = detail::rotate(p3 - p1, c, s);
        Point2 d3m = detail::rotate(p1 - p3, c, -s);
        auto up = detail::ray_params(p1, d1p, p3, d3p);
        auto dn = detail::ray_params(p1, d1m, p3, d3m);
        if (!up || !dn || up->first <= 0 || up->second <= 0 || dn->first <= 0 || dn->second <= 0)
            fail(ErrorKind::RaysParallel, "envelope rays do not meet at t=" + std::to_string(t));
        Point2 plus = p1 + Point2{up->first * d1p.x, up->first * d1p.y};
        Point2 minus = p1 + Point2{dn->first * d1m.x, dn->first * d1m.y};
        std::array<Point2, 4> q{p1, plus, p3, minus};
        if (sgn_ < 0) std::swap(q[1], q[3]);
        return q;
    }
    Point2 plus_corner(double t) const { return corners(t)[sgn_ > 0 ? 1 : 3]; }
    Point2 minus_corner(double t) const { return corners(t)[sgn_ > 0 ? 3 : 1]; }

    // Leading exponent and coefficient of |gamma_+ - gamma_2| fitted at two small t.
    std::pair<double, double> plus_corner_fit(double t_small) const {
        double t0 = t_small, t1 = 2 * t_small;
        double d0 = norm(plus_corner(t0)), d1 = norm(plus_corner(t1));
        double e = std::log(d1 / d0) / std::log(t1 / t0);
        return {e, d0 / std::pow(t0, e)};
    }

    EnvelopeShape shape() const {
        EnvelopeShape sh;
        sh.apex = g2_;
        sh.first = g1_;
        sh.last = g3_;
        sh.chain = {g1_, g2_, g3_};
        sh.diameter_exponent = detail::diameter_exponent(sh.chain);
        KneadingEnvelope self = *this;
        sh.corners = [self](double t) { return self.corners(t); };
        double c = rot_.c.get_d(), s = sgn_ * rot_.s.get_d();
        Point2 to2 = detail::as_point(limit_direction(g2_ - g1_)), to3 = detail::as_point(limit_direction(g3_ - g1_));
        Point2 from3to2 = detail::as_point(limit_direction(g2_ - g3_)), from3to1 = detail::as_point(limit_direction(g1_ - g3_));
        Point2 a1 = detail::rotate(to2, c, -s), b1 = detail::rotate(to3, c, s);
        Point2 a3 = detail::rotate(from3to1, c, -s), b3 = detail::rotate(from3to2, c, s);
        // counterclockwise order of the sector bounds depends on orientation
        sh.sector_first = sgn_ > 0 ? std::array<Point2, 2>{a1, b1} : std::array<Point2, 2>{b1, a1};
        sh.sector_last = sgn_ > 0 ? std::array<Point2, 2>{a3, b3} : std::array<Point2, 2>{b3, a3};
        return sh;
    }

    friend KneadingEnvelope kneading_envelope(const ArcGerm&, const ArcGerm&, const ArcGerm&, double);

private:
    ArcGerm g1_, g2_, g3_;
    Rational theta_;
    Rotation rot_;
    int sgn_ = 1;
};

inline KneadingEnvelope kneading_envelope(const ArcGerm& g1, const ArcGerm& g2, const ArcGerm& g3, double theta) {
    if (g1 == g2 || g2 == g3 || g1 == g3) fail(ErrorKind::DegenerateWedge, "wedge arcs coincide");
    int s = eventual_orient(g1, g2, g3);
    if (s == 0) fail(ErrorKind::DegenerateWedge, "wedge arcs are collinear");
    if (!(theta > 0)) fail(ErrorKind::PreconditionFailed, "theta must be positive");
    KneadingEnvelope K;
    K.g1_ = g1;
    K.g2_ = g2;
    K.g3_ = g3;
    K.rot_ = Rotation::from_angle(theta);
    K.theta_ = approximate(K.rot_.angle(), 1L << 30);
    K.sgn_ = s;
    double th = K.rot_.angle();
    if (limit_angle_is_zero(g1, g2, g3)) fail(ErrorKind::RaysParallel, "wedge closes up at the middle arc");
    double a2 = limit_angle(g1, g2, g3), a1 = limit_angle(g3, g1, g2), a3 = limit_angle(g1, g3, g2);
    if (a2 <= 2 * th || a1 + 2 * th >= std::numbers::pi || a3 + 2 * th >= std::numbers::pi)
        fail(ErrorKind::RaysParallel, "theta too large for the wedge angles");
    return K;
}

// ---- clearance -----------------------------------------------------------------

struct ClearanceViolation {
    double t = 0;
    int edge = -1;  // index into germ.edges()
    std::string reason;
};

struct ClearanceCertificate {
    bool clear = false;
    bool symbolic_confirmed = false;
    std::vector<double> ts;
    std::vector<double> min_distance;  // per t, over non-touching edges
    std::optional<ClearanceViolation> violation;

    std::string summary() const {
        if (clear) return "Clear (" + std::to_string(ts.size()) + " samples, symbolic confirmed)";
        std::string s = "Violation";
        if (violation)
            s += " at t=" + std::to_string(violation->t) + " edge " + std::to_string(violation->edge) + ": " +
                 violation->reason;
        return s;
    }
};

namespace detail {

// The segment uv comes within t^e of corner `first` or `last`, in a limit direction strictly
// outside the envelope angle there; then its distance to the envelope has the same exponent.
inline bool corner_explains(const EnvelopeShape& env, const ArcGerm& u, const ArcGerm& v, const Rational& e) {
    for (int k = 0; k < 2; ++k) {
        const ArcGerm& c = k == 0 ? env.first : env.last;
        const auto& sec = k == 0 ? env.sector_first : env.sector_last;
        if (point_segment_exponent(c, u, v) < e) continue;
        auto pr = project(c, u, v);
        Point2 dir;
        if (pr.kind == Projection::AtU) {
            dir = as_point(limit_direction(u - c));
        } else if (pr.kind == Projection::AtV) {
            dir = as_point(limit_direction(v - c));
        } else {
            Point2 d = as_point(limit_direction(v - u));
            int side = eventual_orient(u, v, c);
            if (side == 0) continue;
            dir = side > 0 ? Point2{d.y, -d.x} : Point2{-d.y, d.x};
        }
        if (!in_sector(dir, sec[0], sec[1], 1e-9)) return true;
    }
    return false;
}

} // namespace detail

inline ClearanceCertificate clearance(const EnvelopeShape& env, const PolygonalGerm& g, const std::set<int>& excluded,
                                      const std::vector<double>& grid) {
    ClearanceCertificate cert;
    cert.ts = grid;
    cert.min_distance.assign(grid.size(), std::numeric_limits<double>::infinity());
    cert.symbolic_confirmed = true;
    auto violate = [&](double t, int e, std::string why) {
        cert.clear = false;
        cert.violation = ClearanceViolation{t, e, std::move(why)};
        return cert;
    };
    std::vector<ArcGerm> inner(env.chain.begin() + 1, env.chain.end() - 1);
    std::vector<std::array<Point2, 4>> quads;
    for (double t : grid) quads.push_back(env.corners(t));

    const auto& nodes = g.nodes();
    const auto& edges = g.edges();
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
        if (excluded.count(e)) continue;
        const ArcGerm& u = nodes[edges[e].u];
        const ArcGerm& v = nodes[edges[e].v];
        for (auto& a : inner)
            if (u == a || v == a) {
                cert.symbolic_confirmed = false;
                return violate(0, e, "edge meets the interior of the envelope at a chain vertex");
            }
        bool touch_first = u == env.first || v == env.first, touch_last = u == env.last || v == env.last;
        if (touch_first && touch_last) {
            cert.symbolic_confirmed = false;
            return violate(0, e, "edge joins both envelope corners");
        }
        if (touch_first || touch_last) {
            const ArcGerm& corner = touch_first ? env.first : env.last;
            const ArcGerm& other = u == corner ? v : u;
            const auto& sec = touch_first ? env.sector_first : env.sector_last;
            Point2 dir = detail::as_point(limit_direction(other - corner));
            if (detail::in_sector(dir, sec[0], sec[1], 1e-12)) {
                cert.symbolic_confirmed = false;
                return violate(0, e, "edge leaves the corner inside the envelope angle");
            }
            for (size_t k = 0; k < grid.size(); ++k) {
                double t = grid[k];
                Point2 c = (corner - env.apex).at(t), w = (other - env.apex).at(t);
                // step off the corner by more than the rounding noise of its coordinates
                double f = std::max(1e-6, 1e-9 * norm(c) / std::max(norm(w - c), 1e-300));
                if (f >= 0.5) continue;  // edge below double resolution here; the limit direction decides
                Point2 start = c + Point2{(w.x - c.x) * f, (w.y - c.y) * f};
                if (detail::segment_quad_distance(start, w, quads[k]) == 0)
                    return violate(t, e, "edge enters the envelope near its corner");
            }
            continue;
        }
        std::vector<Rational> seps;
        for (size_t i = 0; i + 1 < env.chain.size(); ++i)
            seps.push_back(detail::segment_exponent(u, v, env.chain[i], env.chain[i + 1]));
        seps.push_back(detail::segment_exponent(u, v, env.first, env.last));
        Rational sep = *std::max_element(seps.begin(), seps.end());
        for (size_t k = 0; k < grid.size(); ++k) {
            double t = grid[k];
            Point2 a = (u - env.apex).at(t), b = (v - env.apex).at(t);
            // closest approach t^sep below double resolution of the coordinates: nothing to sample here
            double scale = std::max(norm(a), norm(b));
            for (auto& c : quads[k]) scale = std::max(scale, norm(c));
            if (std::pow(t, sep.get_d()) < 1e-10 * scale) continue;
            double d = detail::segment_quad_distance(a, b, quads[k]);
            if (d == 0) return violate(t, e, "edge intersects the envelope");
            cert.min_distance[k] = std::min(cert.min_distance[k], d);
        }
        // an approach faster than the envelope scale is fine when a corner realizes it from outside its angle
        bool explained = true;
        for (auto& e : seps)
            if (e > env.diameter_exponent && !detail::corner_explains(env, u, v, e)) explained = false;
        if (!explained) {
            cert.symbolic_confirmed = false;
            return violate(grid.empty() ? 0 : grid.back(), e,
                           "separation exponent " + sep.get_str() + " exceeds envelope size exponent " +
                               env.diameter_exponent.get_str());
        }
    }
    cert.clear = true;
    return cert;
}

struct ThetaResult {
    double theta;
    KneadingEnvelope envelope;
    ClearanceCertificate certificate;
};

inline ThetaResult theta_search(const ArcGerm& g1, const ArcGerm& g2, const ArcGerm& g3, const PolygonalGerm& g,
                                const std::set<int>& excluded, double floor = std::ldexp(1.0, -20)) {
    std::string last = "no admissible theta";
    for (double th = std::numbers::pi / 8; th >= floor; th /= 2) {
        try {
            auto env = kneading_envelope(g1, g2, g3, th);
            auto cert = clearance(env.shape(), g, excluded, g.grid());
            if (cert.clear) return {th, env, cert};
            last = cert.summary();
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::RaysParallel) throw;
            last = e.what();
        }
    }
    fail(ErrorKind::NoThetaFound, last);
}

// Edge indices of g whose endpoints are consecutive arcs of the chain.
inline std::set<int> chain_edges(const PolygonalGerm& g, const std::vector<ArcGerm>& chain) {
    std::set<int> out;
    const auto& nodes = g.nodes();
    for (int e = 0; e < static_cast<int>(g.edges().size()); ++e) {
        const auto& E = g.edges()[e];
        for (size_t i = 0; i + 1 < chain.size(); ++i)
            if ((nodes[E.u] == chain[i] && nodes[E.v] == chain[i + 1]) ||
                (nodes[E.v] == chain[i] && nodes[E.u] == chain[i + 1]))
                out.insert(e);
    }
    return out;
}

} // namespace lipgeo
