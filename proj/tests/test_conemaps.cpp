#include <catch_amalgamated.hpp>

#include <random>

#include "lipgeo/conemaps.hpp"

using namespace lipgeo;

namespace {

ArcGerm arc(const char* x, const char* y) { return {parse_series(x), parse_series(y)}; }

std::vector<double> dyadic_grid(int from, int to) {
    std::vector<double> g;
    for (int k = from; k <= to; ++k) g.push_back(std::ldexp(1.0, -k));
    return g;
}

Vec3d random_in_cone(std::mt19937& rng, double A, double t) {
    std::uniform_real_distribution<double> U(0, 1);
    double r = A * t * std::sqrt(U(rng)), th = 2 * std::numbers::pi * U(rng);
    return {r * std::cos(th), r * std::sin(th), t};
}

double dist3(const Vec3d& p, const Vec3d& q) { return std::sqrt(std::pow(p.x - q.x, 2) + std::pow(p.y - q.y, 2) + std::pow(p.z - q.z, 2)); }

} // namespace

TEST_CASE("stereographic examples") {
    Rational R(3, 2);
    Vec3q north{0, 0, R};
    CHECK(stereographic(north, R) == north);
    CHECK_THROWS_AS(stereographic(Vec3q{0, 0, -R}, R), Error);

    std::mt19937 rng(5);
    std::normal_distribution<double> N(0, 1);
    for (int i = 0; i < 1000; ++i) {
        double x = N(rng), y = N(rng), z = N(rng), n = std::sqrt(x * x + y * y + z * z), r = 2.0;
        Vec3d p{r * x / n, r * y / n, r * z / n};
        if (p.z < -r + 1e-3) continue;
        auto back = stereographic_inverse(stereographic(p, r), r);
        // conditioning degrades near the south pole
        CHECK(dist3(back, p) < 1e-12 * (1 + 16 / std::pow(p.z + r, 2)));
    }
}

TEST_CASE("cap boundary projects onto the cone section") {
    // exact in rationals: the cap boundary point (4a/(a^2+4) R, 0, (4-a^2)/(a^2+4) R)
    for (int a_num : {3, 5, 7, 12}) {
        Rational a(a_num), R(2, 3);
        Rational ap = cap_opening(a);
        for (auto [cx, cy] : {std::pair{3, 4}, std::pair{1, 0}, std::pair{-5, 12}}) {
            Rational n = std::hypot(cx, cy);
            Vec3q p{ap * R * cx / n, ap * R * cy / n, (4 - a * a) / (a * a + 4) * R};
            CHECK(p.x * p.x + p.y * p.y + p.z * p.z == R * R);
            auto q = stereographic(p, R);
            CHECK(q.x * q.x + q.y * q.y == a * a * R * R);
        }
        // the north pole side of the cap lands strictly inside the section
        Vec3q top{0, 0, R};
        auto qt = stereographic(top, R);
        CHECK(qt.x * qt.x + qt.y * qt.y < a * a * R * R);
    }
}

TEST_CASE("translate_along_arc examples") {
    ConeModel m{9};
    CHECK(m.b() == 3);
    auto g = arc("t^2", "0");
    Rational t(1, 10);
    Vec3q p{Rational(1, 10), 0, t};
    auto q = translate_along_arc(p, g, m);
    CHECK(q == Vec3q{Rational(9, 100), 0, t});
    CHECK(translate_along_arc(q, g, m, Direction::Inverse) == p);

    // zero arc is the identity
    Vec3q s{Rational(1, 5), Rational(-1, 7), t};
    CHECK(translate_along_arc(s, arc("0", "0"), m) == s);

    // boundary points stay put, exactly
    for (auto [cx, cy] : {std::pair{3, 4}, std::pair{0, 1}, std::pair{-12, 5}}) {
        Rational n = std::hypot(cx, cy);
        Vec3q b{9 * t * cx / n, 9 * t * cy / n, t};
        CHECK(translate_along_arc(b, g, m) == b);
        CHECK(translate_along_arc(b, g, m, Direction::Inverse) == b);
    }
    CHECK_THROWS_AS(translate_along_arc(Vec3q{1, 0, t}, g, m), Error);
}

TEST_CASE("translation round trip and shells") {
    auto g = arc("t^2 - 2*t^3", "3*t^2");
    auto grid = dyadic_grid(2, 15);
    auto m = choose_cone(1.0, g, grid);
    REQUIRE_NOTHROW(check_translation_margin(m, g, grid));
    std::mt19937 rng(11);
    double A = m.a.get_d();
    for (double t : grid)
        for (int i = 0; i < 300; ++i) {
            auto p = random_in_cone(rng, A, t);
            auto q = translate_along_arc(p, g, m);
            CHECK(m.contains(Vec3d{q.x, q.y, q.z * (1 + 1e-12)}));
            auto back = translate_along_arc(q, g, m, Direction::Inverse);
            CHECK(dist3(back, p) <= 1e-9 * t);
        }
    // shell radii are distinct for distinct lambda
    for (double t : grid)
        for (double l1 : {0.0, 0.25, 0.5}) CHECK(m.shell_radius(l1, t) != m.shell_radius(l1 + 0.5, t));
}

TEST_CASE("inverse translation is exact when the shell equation has a rational root") {
    ConeModel m{9};
    auto g = arc("t^2", "0");
    Rational t(1, 10);
    // forward image of a shell point with rational radius
    Vec3q p{Rational(1, 2) * 3 * t + Rational(1, 2) * 9 * t, 0, t};
    auto q = translate_along_arc(p, g, m);
    CHECK(translate_along_arc(q, g, m, Direction::Inverse) == p);
}

TEST_CASE("dilate_by_function examples") {
    ConeModel m{9};
    Rational t(1, 8);
    Vec3q p{3 * t / 2, 0, t};
    CHECK(dilate_by_function(p, parse_series("2"), m) == Vec3q{3 * t, 0, t});
    CHECK(dilate_by_function(p, parse_series("1"), m) == p);
    CHECK_THROWS_AS(dilate_by_function(p, parse_series("-1 + t"), m), Error);
    CHECK_THROWS_AS(dilate_by_function(p, parse_series("t"), m), Error);
    Vec3q b{9 * t * 3 / 5, 9 * t * 4 / 5, t};
    CHECK(dilate_by_function(b, parse_series("2 + t"), m) == b);

    auto f = parse_series("2 - t + t^(3/2)");
    std::mt19937 rng(2);
    double A = m.a.get_d();
    auto grid = dyadic_grid(2, 15);
    int n = 0;
    while (n < 10000) {
        double t0 = grid[n % grid.size()];
        auto x = random_in_cone(rng, A, t0);
        auto y = dilate_by_function(x, f, m);
        CHECK(m.contains(Vec3d{y.x, y.y, y.z * (1 + 1e-12)}));
        auto back = dilate_by_function(y, f, m, Direction::Inverse);
        CHECK(dist3(back, x) <= 1e-9 * t0);
        ++n;
    }
}

TEST_CASE("dilation composition with the reciprocal factor") {
    ConeModel m{16};
    auto f = parse_series("2 + t");
    std::mt19937 rng(4);
    for (int i = 0; i < 500; ++i) {
        double t = std::ldexp(1.0, -(2 + i % 12));
        auto p = random_in_cone(rng, 16, t);
        // inside D the reciprocal factor undoes f
        if (std::hypot(p.x, p.y) > 4 * t / 3) continue;
        double F = f.eval(t);
        auto q = dilate_by_function(p, f, m);
        CHECK(std::abs(q.x / F - p.x) < 1e-12);
        CHECK(std::abs(q.y / F - p.y) < 1e-12);
    }
}

namespace {
// families on [-t, t]: g = -t, f = t (flat), a = 0, b = c t
IsotopyFamilies flat_families(double c, double M = 4) {
    IsotopyFamilies F;
    F.f = [](double t, double) { return t; };
    F.g = [](double t, double) { return -t; };
    F.a = [](double, double) { return 0.0; };
    F.b = [c](double t, double) { return c * t; };
    F.x0 = [](double t) { return -t; };
    F.x1 = [](double t) { return t; };
    F.M = M;
    return F;
}
} // namespace

TEST_CASE("rect_isotopy examples") {
    auto fam = flat_families(0.5);
    for (double t : {0.5, 0.01})
        for (double u : {0.0, 0.3, 1.0})
            for (double v : {0.0, 0.2, 0.7, 1.0}) {
                auto id = fam.point(u, v, t);
                auto p0 = rect_isotopy(fam, u, v, t, 0);
                CHECK(p0.x == Catch::Approx(id.x));
                CHECK(p0.y == Catch::Approx(id.y));
                if (v == 0.0 || v == 1.0)
                    for (double tau : {0.3, 1.0}) {
                        auto p = rect_isotopy(fam, u, v, t, tau);
                        CHECK(p.y == Catch::Approx(id.y));
                    }
            }
    // tau = 1 sends the a-graph onto the b-graph
    auto p = rect_isotopy(fam, 0.4, 0.5, 0.1, 1);
    CHECK(p.y == Catch::Approx(0.05));
    // a = b is the identity for every tau
    auto same = flat_families(0.0);
    for (double tau : {0.0, 0.5, 1.0}) CHECK(rect_isotopy(same, 0.2, 0.3, 0.1, tau).y == Catch::Approx(same.point(0.2, 0.3, 0.1).y));
    CHECK_THROWS_AS(rect_isotopy(flat_families(0.95, 4), 0.5, 0.5, 0.1, 1), Error);
}

TEST_CASE("rect_isotopy is Lipschitz in tau") {
    auto fam = flat_families(-0.4, 8);
    for (double t : {0.25, 0.01, 1e-4}) {
        double L = 0;
        for (double u = 0; u <= 1; u += 0.125)
            for (double v = 0; v <= 1; v += 0.0625)
                for (double tau = 0; tau < 1; tau += 0.1) {
                    auto p = rect_isotopy(fam, u, v, t, tau), q = rect_isotopy(fam, u, v, t, tau + 0.1);
                    L = std::max(L, dist(p, q) / 0.1);
                }
        CHECK(std::isfinite(L));
        CHECK(L / t < 2);
    }
}

TEST_CASE("verify_bilipschitz examples") {
    ConeModel m{9};
    auto grid = dyadic_grid(3, 15);
    auto dom = SampleDomain::cone(m);
    auto id = verify_bilipschitz([](const Vec3d& p) { return p; }, dom, grid);
    CHECK(id.verdict == LipschitzVerdict::Bounded);
    CHECK(id.global_min == Catch::Approx(1.0));
    CHECK(id.global_max == Catch::Approx(1.0));

    auto g = arc("t^2", "0");
    auto tr = verify_bilipschitz([&](const Vec3d& p) { return translate_along_arc(p, g, m); }, dom, grid);
    CHECK(tr.verdict == LipschitzVerdict::Bounded);
    CHECK(tr.global_min >= 0.5);
    CHECK(tr.global_max <= 2.0);

    auto bad = verify_bilipschitz([](const Vec3d& p) { return Vec3d{p.x * std::abs(p.x) / (p.z * p.z), p.y, p.z}; },
                                  dom, grid);
    CHECK(bad.verdict == LipschitzVerdict::Unbounded);
    CHECK(bad.spread >= 10);

    auto f = parse_series("2 - t");
    auto dl = verify_bilipschitz([&](const Vec3d& p) { return dilate_by_function(p, f, m); }, dom, grid);
    CHECK(dl.verdict == LipschitzVerdict::Bounded);
}

TEST_CASE("translation of vertex arcs is termwise") {
    auto v = arc("t + t^2", "2*t^(3/2)");
    auto g = arc("t^2", "-t^3");
    auto w = translate_arc(v, g);
    CHECK(w == arc("t", "2*t^(3/2) + t^3"));
    auto d = dilate_arc(v, parse_series("2"));
    CHECK(d == arc("2*t + 2*t^2", "4*t^(3/2)"));
}
