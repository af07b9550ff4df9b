#include <catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"
#include "lipgeo/envelope.hpp"
#include "lipgeo/germ_io.hpp"

using namespace lipgeo;

namespace {

ArcGerm arc(const char* x, const char* y) { return {parse_series(x), parse_series(y)}; }

std::vector<ArcGerm> tent() { return {arc("-t", "0"), arc("0", "-t"), arc("t", "0")}; }

PolygonalGerm open_germ(const std::vector<std::vector<ArcGerm>>& chains) {
    std::vector<Component> comps;
    for (auto& c : chains) comps.push_back(Component{c, false});
    return make_polygonal_germ(comps);
}

} // namespace

TEST_CASE("supporting envelope of the tent") {
    auto fam = synchronized_view(tent(), Rotation{});
    for (Rational delta : {Rational(1, 2), Rational(1, 10)}) {
        auto env = supporting_envelope(fam, delta);
        double d = delta.get_d();
        for (double t : {0.25, 0.01}) {
            for (double x : {-t, -0.7 * t, -0.2 * t, 0.0}) {
                CHECK(env.lower(t, x) == Catch::Approx(-(1 + d) * (t + x)).margin(1e-15));
                CHECK(env.upper(t, x) == Catch::Approx(d * (t + x)).margin(1e-15));
            }
            for (double x : {0.0, 0.3 * t, t}) {
                CHECK(env.lower(t, x) == Catch::Approx((1 + d) * (x - t)).margin(1e-15));
                CHECK(env.upper(t, x) == Catch::Approx(d * (t - x)).margin(1e-15));
            }
        }
    }
}

TEST_CASE("supporting envelope of a single segment is a thin wedge") {
    auto fam = synchronized_view({arc("0", "0"), arc("t", "1/2*t")}, Rotation{});
    auto env = supporting_envelope(fam, Rational(1, 8));
    auto s = env.slopes(0.1);
    CHECK(s.m0 == Catch::Approx(0.5));
    CHECK(s.M0 == Catch::Approx(0.5));
    CHECK(env.upper(0.1, 0.01) == Catch::Approx(0.01 * (0.5 + 0.125)));
    CHECK(env.lower(0.1, 0.01) == Catch::Approx(0.01 * (0.5 - 0.125)));
}

TEST_CASE("supporting envelope of a convex 3-vertex chain") {
    // p, q, r with slopes u < v < w
    auto fam = synchronized_view({arc("-t", "t"), arc("0", "0"), arc("2*t", "3*t")}, Rotation{});
    auto env = supporting_envelope(fam, Rational(1, 4));
    double t = 0.05, u = -1, v = 2.0 / 3, w = 1.5, d = 0.25;
    auto sl = env.slopes(t);
    CHECK(sl.m0 == Catch::Approx(u));
    CHECK(sl.M0 == Catch::Approx(v));
    CHECK(sl.m1 == Catch::Approx(v));
    CHECK(sl.M1 == Catch::Approx(w));
    // rays from p have slopes u - d and v + d
    double x = -t + 1e-4;
    CHECK(env.lower(t, x) == Catch::Approx(t + (u - d) * (x + t)));
    CHECK(env.upper(t, x) == Catch::Approx(t + (v + d) * (x + t)));
    // rays from r follow the defining slopes w + d (below) and v - d (above)
    x = 2 * t - 1e-4;
    CHECK(env.lower(t, x) == Catch::Approx(3 * t + (w + d) * (x - 2 * t)));
    CHECK(env.upper(t, x) == Catch::Approx(3 * t + (v - d) * (x - 2 * t)));
}

TEST_CASE("supporting envelope rejects unbounded families") {
    auto fam = synchronized_view({arc("0", "0"), arc("t^2", "t"), arc("t", "0")}, Rotation{});
    CHECK_FALSE(fam.bounded());
    CHECK_THROWS_AS(supporting_envelope(fam, 1), Error);
}

TEST_CASE("envelope containment and monotonicity in delta") {
    std::mt19937 rng(21);
    std::uniform_int_distribution<int> c(-3, 3);
    for (int it = 0; it < 60; ++it) {
        std::vector<ArcGerm> chain;
        int n = 3 + it % 4;
        for (int i = 0; i < n; ++i)
            chain.push_back({PuiseuxSeries::monomial(i, 1) + PuiseuxSeries::monomial(c(rng), 2),
                             PuiseuxSeries::monomial(c(rng), 1) + PuiseuxSeries::monomial(c(rng), 2)});
        auto fam = synchronized_view(chain, Rotation{});
        auto big = supporting_envelope(fam, Rational(1, 2)), small = supporting_envelope(fam, Rational(1, 16));
        for (double t : fam.grid()) {
            auto p = fam.vertices_at(t);
            for (size_t i = 0; i + 1 < p.size(); ++i)
                for (double s : {0.0, 0.3, 0.7}) {
                    Point2 q{p[i].x + s * (p[i + 1].x - p[i].x), p[i].y + s * (p[i + 1].y - p[i].y)};
                    CHECK(small.contains(t, q, 1e-12));
                }
            for (double s = 0; s <= 1; s += 0.125) {
                double x = p.front().x + s * (p.back().x - p.front().x);
                CHECK(big.lower(t, x) <= small.lower(t, x) + 1e-15 * t);
                CHECK(small.upper(t, x) <= big.upper(t, x) + 1e-15 * t);
            }
        }
    }
}

TEST_CASE("chain is kneaded onto its secant inside the supporting envelope") {
    std::vector<ArcGerm> chain{arc("-t", "0"), arc("-1/3*t", "-t"), arc("1/2*t", "-1/2*t + t^2"), arc("t", "0")};
    auto fam = synchronized_view(chain, Rotation{});
    auto env = supporting_envelope(fam, Rational(1, 4));
    auto F = kneading_families(env);
    for (double t : {0.25, 1e-2, 1e-4}) {
        for (double u = 0.05; u < 1; u += 0.05) {
            double x = F.x_at(u, t);
            Point2 on_chain{x, F.a(t, x)};
            auto img = rect_isotopy_at(F, on_chain, t, 1.0);
            CHECK(std::abs(img.y - F.b(t, x)) <= 1e-9 * t);
            for (double y : {F.f(t, x), F.g(t, x)}) {
                auto b = rect_isotopy_at(F, Point2{x, y}, t, 1.0);
                CHECK(std::abs(b.y - y) <= 1e-12 * t);
            }
        }
    }
}

TEST_CASE("kneading envelope of the symmetric tent") {
    auto g1 = arc("-t", "0"), g2 = arc("0", "t"), g3 = arc("t", "0");
    auto K = kneading_envelope(g1, g2, g3, std::numbers::pi / 36);
    for (double t : {0.1, 1e-3}) {
        auto q = K.corners(t);
        auto plus = K.plus_corner(t), minus = K.minus_corner(t);
        CHECK(std::abs(plus.x) < 1e-12 * t);
        CHECK(plus.y > 0);
        CHECK(std::abs(minus.x) < 1e-12 * t);
        CHECK(minus.y < -t);
        // mirror symmetry of the anchoring corners about the axis
        CHECK(q[0].x == Catch::Approx(-q[2].x));
        CHECK(q[0].y == Catch::Approx(q[2].y));
    }
    auto fit = K.plus_corner_fit(1e-4);
    CHECK(fit.first == Catch::Approx(1.0).margin(1e-6));
    CHECK_THROWS_AS(kneading_envelope(arc("-t", "0"), arc("0", "0"), arc("t", "0"), 0.1), Error);
}

TEST_CASE("kneading envelopes shrink to the triangle as theta halves") {
    auto g1 = arc("-t", "0"), g2 = arc("1/4*t", "t + t^2"), g3 = arc("t", "t^2");
    double t = 0.01;
    double prev_plus = std::numeric_limits<double>::infinity(), prev_minus = prev_plus;
    std::optional<std::array<Point2, 4>> outer;
    for (double th = std::numbers::pi / 16; th > 1e-4; th /= 2) {
        auto K = kneading_envelope(g1, g2, g3, th);
        double dp = norm(K.plus_corner(t));
        Point2 p1 = (g1 - g2).at(t), p3 = (g3 - g2).at(t);
        double dm = point_segment_distance(K.minus_corner(t), p1, p3);
        CHECK(dp < prev_plus);
        CHECK(dm < prev_minus);
        prev_plus = dp;
        prev_minus = dm;
        auto q = K.corners(t);
        if (outer)
            for (auto& c : q) CHECK(detail::in_convex(c, *outer));
        outer = q;
    }
    CHECK(prev_plus < 1e-3 * t);
}

TEST_CASE("clearance examples") {
    auto chain = tent();
    auto alone = open_germ({chain});
    auto ex = chain_edges(alone, chain);
    CHECK(ex.size() == 2);
    auto K = kneading_envelope(chain[0], chain[1], chain[2], std::numbers::pi / 8);
    CHECK(clearance(K.shape(), alone, ex, alone.grid()).clear);
    auto r = theta_search(chain[0], chain[1], chain[2], alone, ex);
    CHECK(r.theta == Catch::Approx(std::numbers::pi / 8));

    // a neighbour just above the apex is engulfed by a wide envelope
    auto wedge = std::vector<ArcGerm>{arc("-t", "0"), arc("0", "t"), arc("t", "0")};
    auto g = open_germ({wedge, {arc("-1/4*t", "7/5*t"), arc("1/4*t", "7/5*t")}});
    auto wx = chain_edges(g, wedge);
    auto wide = clearance(kneading_envelope(wedge[0], wedge[1], wedge[2], std::numbers::pi / 8).shape(), g, wx, g.grid());
    CHECK_FALSE(wide.clear);
    REQUIRE(wide.violation);
    CHECK(wide.violation->edge == 2);
    CHECK(wide.violation->t > 0);
    auto found = theta_search(wedge[0], wedge[1], wedge[2], g, wx);
    CHECK(found.theta == Catch::Approx(std::numbers::pi / 32));
    CHECK(found.certificate.clear);
    CHECK(found.certificate.symbolic_confirmed);
}

TEST_CASE("tail wedge inside the X1 triangle clears") {
    // the tail bent at its midpoint, scale t^3 against triangle scale t^2
    auto g = parse_germ(R"(lipgerm v1
component closed
x = 0; y = 0
x = t^2; y = t^2
x = t^2; y = -t^2
component open
x = 0; y = 0
x = 1/2*t^3; y = t^4
x = t^3; y = 0
)");
    auto& tail = g.component(1).vertices;
    auto ex = chain_edges(g, tail);
    auto r = theta_search(tail[0], tail[1], tail[2], g, ex);
    CHECK(r.certificate.clear);
    CHECK(r.theta >= std::numbers::pi / 64);
    for (auto d : r.certificate.min_distance) CHECK(d > 0);
}

TEST_CASE("pinch wedge has no clear envelope") {
    auto g = parse_germ(fixtures::pinch);
    auto& c = g.component(0).vertices;
    CHECK_THROWS_MATCHES(theta_search(c[0], c[1], c[2], g, chain_edges(g, c)), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) { return e.kind() == ErrorKind::NoThetaFound; }));
}

TEST_CASE("edges leaving a corner inside the envelope angle are rejected") {
    // closing edge of a triangle runs between both corners
    auto g = parse_germ(fixtures::x1);
    auto& tri = g.component(0).vertices;
    std::vector<ArcGerm> w{tri[0], tri[1], tri[2]};
    auto K = kneading_envelope(w[0], w[1], w[2], 0.05);
    auto cert = clearance(K.shape(), g, chain_edges(g, w), g.grid());
    CHECK_FALSE(cert.clear);
}
