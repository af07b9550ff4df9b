#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "lipgeo/error.hpp"
#include "lipgeo/germ.hpp"
#include "lipgeo/puiseux.hpp"
#include "lipgeo/rational.hpp"

namespace lipgeo {

// Point of R^3; the last coordinate plays the role of t inside the cone.
template <class S>
struct Vec3 {
    S x{}, y{}, z{};
    friend bool operator==(const Vec3&, const Vec3&) = default;
};
using Vec3d = Vec3<double>;
using Vec3q = Vec3<Rational>;

namespace detail {

inline double as_double(double v) { return v; }
inline double as_double(const Rational& v) { return v.get_d(); }

inline double sqrt_of(double v) { return std::sqrt(v); }
inline Rational sqrt_of(const Rational& v) {
    if (auto r = exact_sqrt(v)) return *r;
    return approximate(std::sqrt(v.get_d()), 1L << 40);
}

template <class S>
S scalar(const Rational& q) {
    if constexpr (std::is_same_v<S, Rational>)
        return q;
    else
        return q.get_d();
}

inline double series_at(const PuiseuxSeries& s, double t) { return s.eval(t); }
inline Rational series_at(const PuiseuxSeries& s, const Rational& t) {
    if (auto v = s.eval_exact(t)) return *v;
    return approximate(s.eval(t.get_d()), 1L << 40);
}

} // namespace detail

// ---- stereographic reduction ----------------------------------------------

template <class S>
Vec3<S> stereographic(const Vec3<S>& p, const S& R) {
    S den = p.z + R;
    if (den == S(0)) fail(ErrorKind::SouthPole, "stereographic projection of the south pole");
    S lam = S(2) * R / den;
    return {S(lam * p.x), S(lam * p.y), R};
}

template <class S>
Vec3<S> stereographic_inverse(const Vec3<S>& q, const S& R) {
    S lam = S(4) * R * R / (q.x * q.x + q.y * q.y + S(4) * R * R);
    return {S(lam * q.x), S(lam * q.y), S((S(2) * lam - S(1)) * R)};
}

// Horizontal radius (over R) of the spherical cap boundary that projects onto the cone section of
// opening a. The cap boundary sits at height (4 - a^2) R / (a^2 + 4).
inline Rational cap_opening(const Rational& a) { return 4 * a / (a * a + 4); }

// ---- cone model -------------------------------------------------------------

// Cone {x^2 + y^2 <= (a t)^2}; b = sqrt(a) is the radius factor of the inner cone D.
// a is kept a perfect square so b is exact.
struct ConeModel {
    Rational a = 4;

    Rational b() const {
        auto r = exact_sqrt(a);
        if (!r) fail(ErrorKind::PreconditionFailed, "cone opening " + a.get_str() + " is not a square");
        return *r;
    }
    template <class S>
    bool contains(const Vec3<S>& p) const {
        S at = detail::scalar<S>(a) * p.z;
        return p.z >= S(0) && p.x * p.x + p.y * p.y <= at * at;
    }
    template <class S>
    bool on_boundary(const Vec3<S>& p) const {
        S at = detail::scalar<S>(a) * p.z;
        return p.x * p.x + p.y * p.y == at * at;
    }
    // Radius of the shell with parameter lambda at height t.
    double shell_radius(double lambda, double t) const {
        double A = a.get_d(), B = b().get_d();
        return (lambda * B + (1 - lambda) * A) * t;
    }
};

// Smallest integer b with b > a0, b >= 2 sup|gamma|/t + 1 and b > sup f; the cone uses a = b^2.
inline ConeModel choose_cone(double a0, double sup_ratio, double sup_factor = 0) {
    double need = std::max({a0 + 1, 2 * sup_ratio + 1, sup_factor + 1, 2.0});
    long b = static_cast<long>(std::ceil(need));
    return {Rational(b) * b};
}

inline double sup_ratio(const ArcGerm& g, const std::vector<double>& grid) {
    double s = 0;
    for (double t : grid) s = std::max(s, norm(g.at(t)) / t);
    return s;
}

inline ConeModel choose_cone(double a0, const ArcGerm& g, const std::vector<double>& grid) {
    return choose_cone(a0, sup_ratio(g, grid));
}

// Checks that the shells stay disjoint after translating by gamma: |gamma(t)| < (a - b) t.
inline void check_translation_margin(const ConeModel& m, const ArcGerm& g, const std::vector<double>& grid) {
    double width = Rational(m.a - m.b()).get_d();
    for (double t : grid)
        if (norm(g.at(t)) >= width * t)
            fail(ErrorKind::ConeTooNarrow, "arc leaves the shell margin at t=" + std::to_string(t));
}

enum class Direction { Forward, Inverse };

// ---- arc translation ----------------------------------------------------------

namespace detail {

template <class S>
S shell_lambda(const ConeModel& m, const S& r, const S& t) {
    S A = detail::scalar<S>(m.a), B = detail::scalar<S>(m.b());
    return S((A * t - r) / ((A - B) * t));
}

template <class S>
void check_in_cone(const ConeModel& m, const Vec3<S>& p) {
    if (p.z <= S(0) || !m.contains(p)) fail(ErrorKind::OutsideDomain, "point outside the cone");
}

// Root in [0, 1] of A l^2 + B l + C = 0 (A < 0, C <= 0 in practice).
template <class S>
S unit_root(const S& A, const S& B, const S& C) {
    auto in_unit = [](double v) { return v >= -1e-12 && v <= 1 + 1e-12; };
    if constexpr (std::is_same_v<S, Rational>) {
        if (A == 0) {
            if (B != 0) return S(-C / B);
        } else {
            Rational disc = B * B - 4 * A * C;
            if (disc >= 0) {
                if (auto r = exact_sqrt(disc)) {
                    Rational l1 = (-B + *r) / (2 * A), l2 = (-B - *r) / (2 * A);
                    if (l1 >= 0 && l1 <= 1) return l1;
                    if (l2 >= 0 && l2 <= 1) return l2;
                }
            }
        }
    }
    double a = as_double(A), b = as_double(B), c = as_double(C);
    double l = 0;
    if (std::abs(a) < 1e-300) {
        l = -c / b;
    } else {
        double disc = std::max(0.0, b * b - 4 * a * c);
        double sq = std::sqrt(disc);
        // numerically stable pair of roots
        double qv = -0.5 * (b + std::copysign(sq, b));
        double r1 = qv / a, r2 = qv != 0 ? c / qv : r1;
        l = in_unit(r1) ? r1 : r2;
    }
    l = std::clamp(l, 0.0, 1.0);
    // polish by bisection on the sign of the quadratic
    double lo = std::max(0.0, l - 1e-9), hi = std::min(1.0, l + 1e-9);
    auto f = [&](double x) { return (a * x + b) * x + c; };
    if (f(lo) * f(hi) < 0)
        for (int i = 0; i < 80 && hi - lo > 1e-15; ++i) {
            double mid = 0.5 * (lo + hi);
            (f(lo) * f(mid) <= 0 ? hi : lo) = mid;
        }
    l = 0.5 * (lo + hi);
    if constexpr (std::is_same_v<S, Rational>)
        return approximate(l, 1L << 40);
    else
        return l;
}

} // namespace detail

template <class S>
Vec3<S> translate_along_arc(const Vec3<S>& p, const ArcGerm& g, const ConeModel& m, Direction dir = Direction::Forward) {
    const S& t = p.z;
    if (t <= S(0)) fail(ErrorKind::OutsideDomain, "t must be positive");
    if (g.is_zero()) return p;
    S gx = detail::series_at(g.x, t), gy = detail::series_at(g.y, t);
    S A = detail::scalar<S>(m.a), B = detail::scalar<S>(m.b());
    S at = A * t, bt = B * t;
    if (dir == Direction::Forward) {
        detail::check_in_cone(m, p);
        S r2 = p.x * p.x + p.y * p.y;
        if (r2 >= at * at) return p;
        if (r2 <= bt * bt) return {S(p.x - gx), S(p.y - gy), t};
        S lam = detail::shell_lambda(m, detail::sqrt_of(r2), t);
        return {S(p.x - lam * gx), S(p.y - lam * gy), t};
    }
    S r2 = p.x * p.x + p.y * p.y;
    if (r2 > at * at) fail(ErrorKind::OutsideDomain, "point outside the cone");
    if (r2 == at * at) return p;
    S ux = p.x + gx, uy = p.y + gy;
    if (ux * ux + uy * uy <= bt * bt) return {ux, uy, t};
    // |q + l g| = a t - l (a - b) t
    S w = (A - B) * t;
    S qa = gx * gx + gy * gy - w * w;
    S qb = S(2) * (p.x * gx + p.y * gy) + S(2) * A * t * w;
    S qc = r2 - at * at;
    S lam = detail::unit_root(qa, qb, qc);
    return {S(p.x + lam * gx), S(p.y + lam * gy), t};
}

// Termwise image of a vertex arc lying in D: subtract gamma.
inline ArcGerm translate_arc(const ArcGerm& v, const ArcGerm& g) { return v - g; }

// ---- function dilatation ------------------------------------------------------

inline void check_dilation_factor(const PuiseuxSeries& f) {
    auto ld = f.leading();
    if (ld.zero || ld.exponent != 0 || ld.coeff <= 0)
        fail(ErrorKind::NonPositiveLeading, "dilation factor must start with a positive constant: " + f.str());
    for (auto& tm : f.terms())
        if (tm.exponent < 0) fail(ErrorKind::NonPositiveLeading, "negative exponent in dilation factor");
}

template <class S>
Vec3<S> dilate_by_function(const Vec3<S>& p, const PuiseuxSeries& f, const ConeModel& m,
                           Direction dir = Direction::Forward) {
    check_dilation_factor(f);
    const S& t = p.z;
    if (t <= S(0)) fail(ErrorKind::OutsideDomain, "t must be positive");
    S F = detail::series_at(f, t);
    if (F <= S(0)) fail(ErrorKind::NonPositiveLeading, "dilation factor not positive at t");
    S A = detail::scalar<S>(m.a), B = detail::scalar<S>(m.b());
    if (F * B >= A) fail(ErrorKind::ConeTooNarrow, "dilation factor exceeds a/b");
    S at = A * t, bt = B * t;
    S r2 = p.x * p.x + p.y * p.y;
    if (r2 > at * at) fail(ErrorKind::OutsideDomain, "point outside the cone");
    if (r2 == at * at) return p;
    if (dir == Direction::Forward) {
        if (r2 <= bt * bt) return {S(F * p.x), S(F * p.y), t};
        S lam = detail::shell_lambda(m, detail::sqrt_of(r2), t);
        S k = (lam * F * B + (S(1) - lam) * A) / (lam * B + (S(1) - lam) * A);
        return {S(k * p.x), S(k * p.y), t};
    }
    S fbt = F * bt;
    if (r2 <= fbt * fbt) return {S(p.x / F), S(p.y / F), t};
    S s = detail::sqrt_of(r2) / t;
    S lam = (A - s) / (A - F * B);
    S k = (lam * F * B + (S(1) - lam) * A) / (lam * B + (S(1) - lam) * A);
    return {S(p.x / k), S(p.y / k), t};
}

inline ArcGerm dilate_arc(const ArcGerm& v, const PuiseuxSeries& f) { return {v.x * f, v.y * f}; }

// ---- curvilinear rectangle isotopy ---------------------------------------------

// Four families of graphs over [x0(t), x1(t)] with g <= a, b <= f.
struct IsotopyFamilies {
    std::function<double(double t, double x)> f, a, b, g;
    std::function<double(double t)> x0, x1;
    double M = 2;

    // Chains given as synchronized vertex arcs sharing the end arcs.
    static IsotopyFamilies from_chains(const SynchronizedFamily& f, const SynchronizedFamily& a,
                                       const SynchronizedFamily& b, const SynchronizedFamily& g, double M) {
        IsotopyFamilies F;
        F.f = [f](double t, double x) { return f.f(t, x); };
        F.a = [a](double t, double x) { return a.f(t, x); };
        F.b = [b](double t, double x) { return b.f(t, x); };
        F.g = [g](double t, double x) { return g.f(t, x); };
        F.x0 = [a](double t) { return a.arcs().front().at(t).x; };
        F.x1 = [a](double t) { return a.arcs().back().at(t).x; };
        F.M = M;
        return F;
    }

    double x_at(double u, double t) const { return (1 - u) * x0(t) + u * x1(t); }
    // gamma_{u,v}(t)
    Point2 point(double u, double v, double t) const {
        double x = x_at(u, t), lo = g(t, x), hi = f(t, x);
        return {x, lo + v * (hi - lo)};
    }
    // Ratios (a - g)/(f - g) and (b - g)/(f - g); nullopt where f = g.
    std::optional<std::pair<double, double>> ratios(double u, double t) const {
        double x = x_at(u, t), lo = g(t, x), hi = f(t, x);
        if (!(hi - lo > 0)) return std::nullopt;
        return std::pair{(a(t, x) - lo) / (hi - lo), (b(t, x) - lo) / (hi - lo)};
    }
};

// Two-piece linear map of [0,1] pinned at 0 and 1 with from -> to.
inline double pinned_reparam(double v, double from, double to) {
    // exact at the pins and for the identity, not just up to rounding
    if (v <= 0 || v >= 1 || from == to) return v;
    if (v <= from) return from > 0 ? v * to / from : to;
    return from < 1 ? to + (v - from) * (1 - to) / (1 - from) : to;
}

inline Point2 rect_isotopy(const IsotopyFamilies& fam, double u, double v, double t, double tau) {
    auto r = fam.ratios(u, t);
    if (!r) return fam.point(u, v, t);
    auto [alpha, beta] = *r;
    double lo = 1 / fam.M, hi = 1 - 1 / fam.M, tol = 1e-12;
    if (alpha < lo - tol || alpha > hi + tol || beta < lo - tol || beta > hi + tol)
        fail(ErrorKind::SeparationViolated, "ratio outside [1/M, 1-1/M] at t=" + std::to_string(t));
    double target = (1 - tau) * alpha + tau * beta;
    return fam.point(u, pinned_reparam(v, alpha, target), t);
}

// Ambient form: locate p in the rectangle and move it.
inline Point2 rect_isotopy_at(const IsotopyFamilies& fam, Point2 p, double t, double tau) {
    double x0 = fam.x0(t), x1 = fam.x1(t);
    if (p.x < x0 || p.x > x1) return p;
    double lo = fam.g(t, p.x), hi = fam.f(t, p.x);
    if (!(hi - lo > 0) || p.y < lo || p.y > hi) return p;
    double u = (p.x - x0) / (x1 - x0), v = (p.y - lo) / (hi - lo);
    return rect_isotopy(fam, u, v, t, tau);
}

// ---- sampled bi-Lipschitz harness ---------------------------------------------

enum class LipschitzVerdict { Bounded, Unbounded, Inconclusive };

inline std::string_view to_string(LipschitzVerdict v) {
    switch (v) {
    case LipschitzVerdict::Bounded: return "Bounded";
    case LipschitzVerdict::Unbounded: return "Unbounded";
    case LipschitzVerdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

struct LipschitzReport {
    struct PerT {
        double t = 0, min_ratio = 0, max_ratio = 0;
        int samples = 0;
    };
    std::vector<PerT> rows;
    double global_min = 0, global_max = 0;
    // largest ratio between per-t extremes across the grid
    double spread = 0;
    LipschitzVerdict verdict = LipschitzVerdict::Inconclusive;
    int samples = 0;

    std::string str() const {
        std::string s = "verdict: " + std::string(to_string(verdict)) + "\n";
        s += "samples: " + std::to_string(samples) + "\n";
        s += "min ratio: " + std::to_string(global_min) + "\nmax ratio: " + std::to_string(global_max) + "\n";
        s += "spread: " + std::to_string(spread) + "\n";
        for (auto& r : rows)
            s += "t=" + std::to_string(r.t) + " min=" + std::to_string(r.min_ratio) +
                 " max=" + std::to_string(r.max_ratio) + " n=" + std::to_string(r.samples) + "\n";
        return s;
    }
};

struct SampleDomain {
    std::function<Vec3d(std::mt19937&, double t)> sample;
    std::function<bool(const Vec3d&)> contains;

    // Uniform points of the cone section at height t.
    static SampleDomain cone(const ConeModel& m) {
        double A = m.a.get_d();
        SampleDomain d;
        d.sample = [A](std::mt19937& rng, double t) {
            std::uniform_real_distribution<double> U(0, 1);
            double r = A * t * std::sqrt(U(rng)), th = 2 * std::numbers::pi * U(rng);
            return Vec3d{r * std::cos(th), r * std::sin(th), t};
        };
        d.contains = [A](const Vec3d& p) { return p.z > 0 && std::hypot(p.x, p.y) <= A * p.z; };
        return d;
    }
};

struct LipschitzOptions {
    int points_per_t = 200;
    unsigned seed = 7;
    double bounded_spread = 1.1;
    double unbounded_spread = 10;
};

// Every t reuses the same random stream, so scale-invariant maps see identical normalized samples.
// Stability is judged on the finer half of the grid, where the germ lives.
inline LipschitzReport verify_bilipschitz(const std::function<Vec3d(const Vec3d&)>& map, const SampleDomain& dom,
                                          std::vector<double> grid, LipschitzOptions opt = {}) {
    LipschitzReport rep;
    std::sort(grid.begin(), grid.end(), std::greater<>());
    for (double t : grid) {
        std::mt19937 rng(opt.seed);
        std::normal_distribution<double> N(0, 1);
        LipschitzReport::PerT row{t, std::numeric_limits<double>::infinity(), 0, 0};
        for (int i = 0; i < opt.points_per_t; ++i) {
            Vec3d p = dom.sample(rng, t);
            for (double h : {t * 1e-2, t * 1e-3}) {
                double dx = N(rng), dy = N(rng), dz = N(rng), n = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (n == 0) continue;
                Vec3d q{p.x + h * dx / n, p.y + h * dy / n, p.z + h * dz / n};
                if (!dom.contains(q)) continue;
                Vec3d mp = map(p), mq = map(q);
                double num = std::sqrt((mp.x - mq.x) * (mp.x - mq.x) + (mp.y - mq.y) * (mp.y - mq.y) +
                                       (mp.z - mq.z) * (mp.z - mq.z));
                double den = std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) + (p.z - q.z) * (p.z - q.z));
                double ratio = num / den;
                row.min_ratio = std::min(row.min_ratio, ratio);
                row.max_ratio = std::max(row.max_ratio, ratio);
                ++row.samples;
            }
        }
        rep.samples += row.samples;
        if (row.samples > 0) rep.rows.push_back(row);
    }
    if (rep.rows.size() < 2 || rep.samples < 20) return rep;
    auto spread_of = [](auto first, auto last) {
        double maxlo = std::numeric_limits<double>::infinity(), maxhi = 0;
        double minlo = std::numeric_limits<double>::infinity(), minhi = 0;
        for (auto it = first; it != last; ++it) {
            maxlo = std::min(maxlo, it->max_ratio);
            maxhi = std::max(maxhi, it->max_ratio);
            minlo = std::min(minlo, it->min_ratio);
            minhi = std::max(minhi, it->min_ratio);
        }
        if (minlo <= 0) return std::numeric_limits<double>::infinity();
        return std::max(maxhi / maxlo, minhi / minlo);
    };
    rep.global_min = std::numeric_limits<double>::infinity();
    for (auto& r : rep.rows) {
        rep.global_min = std::min(rep.global_min, r.min_ratio);
        rep.global_max = std::max(rep.global_max, r.max_ratio);
    }
    rep.spread = spread_of(rep.rows.begin(), rep.rows.end());
    double tail = spread_of(rep.rows.begin() + static_cast<long>(rep.rows.size() / 2), rep.rows.end());
    if (rep.spread >= opt.unbounded_spread)
        rep.verdict = LipschitzVerdict::Unbounded;
    else if (tail <= opt.bounded_spread)
        rep.verdict = LipschitzVerdict::Bounded;
    return rep;
}

} // namespace lipgeo
