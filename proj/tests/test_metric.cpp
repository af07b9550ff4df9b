#include <catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"
#include "lipgeo/germ_io.hpp"
#include "lipgeo/metric.hpp"
#include "oracles.hpp"

using namespace lipgeo;

namespace {

ArcGerm arc(const char* x, const char* y) { return {parse_series(x), parse_series(y)}; }

ArcGerm random_arc(std::mt19937& rng, int max_terms = 3) {
    std::uniform_int_distribution<int> c(-6, 6), e(0, 8), n(1, max_terms);
    auto series = [&] {
        std::vector<Term> terms;
        int k = n(rng);
        for (int i = 0; i < k; ++i) terms.push_back({1 + make_rational(e(rng), 2), make_rational(c(rng), 2)});
        return PuiseuxSeries(std::move(terms), 12);
    };
    return {series(), series()};
}

} // namespace

TEST_CASE("tord examples") {
    auto a = arc("t^2", "0"), b = arc("0", "t^3");
    CHECK(tord(a, a).infinite);
    auto v = tord(a, b);
    CHECK(v.value == 2);
    double slope = oracle::loglog_slope([](double t) { return std::hypot(t * t, t * t * t); }, 8, 20);
    CHECK(std::abs(slope - 2) < 0.05);
    CHECK(tord(arc("0", "0"), arc("t^3", "0")).value == 3);
    CHECK(tord(arc("t^2", "t^2"), arc("0", "0")).coefficient.needs_sqrt);
    CHECK_THROWS_AS(tord(arc("t + O(t^3)", "0"), arc("t + O(t^5)", "0")), Error);
}

TEST_CASE("tord_inner examples") {
    auto g = parse_germ("lipgerm v1\ncomponent open\nx = 0; y = 0\nx = t; y = 0\nx = t + t^2; y = t^2\n");
    CHECK(tord_inner(g, 0, 0, 0, 1).value == 1);
    CHECK(tord_inner(g, 0, 1, 0, 2).value == 2);
    CHECK(tord_inner(g, 0, 0, 0, 2).value == 1);
    auto sq = parse_germ(fixtures::square);
    CHECK(tord_inner(sq, 0, 0, 0, 2).value == 1);
    auto two = parse_germ(fixtures::nested_squares);
    CHECK_THROWS_AS(tord_inner(two, 0, 0, 1, 0), Error);
}

TEST_CASE("limit_angle examples") {
    auto o = arc("0", "0");
    CHECK(limit_angle(arc("t", "0"), o, arc("0", "t")) == Catch::Approx(std::numbers::pi / 2));
    CHECK(limit_angle(arc("-t", "0"), o, arc("t", "0")) == Catch::Approx(std::numbers::pi));
    CHECK(limit_angle(arc("t", "0"), o, arc("2*t", "0")) == Catch::Approx(0).margin(1e-12));
    CHECK(limit_angle_is_pi(arc("-t", "0"), o, arc("t", "0")));
    CHECK(limit_angle_is_zero(arc("t", "t^2"), o, arc("2*t", "0")));
    CHECK_THROWS_AS(limit_angle(o, o, arc("t", "0")), Error);
}

TEST_CASE("edge_exponents examples") {
    auto sq = edge_exponents(parse_germ(fixtures::square));
    CHECK(sq[0] == std::vector<Rational>{1, 1, 1, 1});
    auto x1 = edge_exponents(parse_germ(fixtures::x1));
    CHECK(x1[0] == std::vector<Rational>{2, 2, 2});
    CHECK(x1[1] == std::vector<Rational>{3});
    auto ch = edge_exponents(parse_germ("lipgerm v1\ncomponent open\nx = 0; y = 0\nx = t; y = 0\nx = t; y = t^2\n"));
    CHECK(ch[0] == std::vector<Rational>{1, 2});
}

TEST_CASE("is_lne examples") {
    auto pinch = parse_germ(fixtures::pinch);
    auto v = is_lne(pinch);
    CHECK(v.status == LneStatus::NotLNE);
    REQUIRE(v.witness);
    CHECK(v.witness->p.node == 0);
    CHECK(v.witness->q.node == 2);
    CHECK(v.witness->outer == 2);
    CHECK(v.witness->inner == 1);
    double slope = oracle::loglog_slope([&](double t) { return witness_ratio(pinch, *v.witness, t); }, 8, 20);
    CHECK(std::abs(slope + 1) < 0.05);

    auto sq = is_lne(parse_germ(fixtures::square));
    CHECK(sq.status == LneStatus::LNE);
    CHECK(sq.flat);
    auto x1 = is_lne(parse_germ(fixtures::x1));
    CHECK(x1.status == LneStatus::LNE);
    CHECK(x1.flat);
    CHECK(is_lne(parse_germ(fixtures::x2)).status == LneStatus::LNE);
    CHECK(is_lne(parse_germ(fixtures::nested_squares)).status == LneStatus::LNE);
}

TEST_CASE("endpoint close to the interior of another edge is caught") {
    // tip of the third edge comes within t^2 of the first edge's interior
    auto g = parse_germ("lipgerm v1\ncomponent open\nx = -t; y = 0\nx = t; y = 0\nx = t; y = t\nx = 0; y = t^2\n");
    auto v = is_lne(g);
    CHECK(v.status == LneStatus::NotLNE);
    REQUIRE(v.witness);
    CHECK(v.witness->outer > v.witness->inner);
    // two horns tangent to each other
    auto h = parse_germ("lipgerm v1\ncomponent closed\nx = t + t^2; y = 0\nx = t; y = t^2\nx = t - t^2; y = 0\n"
                        "component closed\nx = t + t^2; y = 3*t^2\nx = t; y = 4*t^2\nx = t - t^2; y = 3*t^2\n");
    CHECK(is_lne(h).status == LneStatus::NotLNE);
}

TEST_CASE("lne_constant examples") {
    auto seg = parse_germ("lipgerm v1\ncomponent open\nx = 0; y = 0\nx = t; y = t\n");
    CHECK(lne_constant(seg, 0.1) == Catch::Approx(1.0));
    auto corner = parse_germ("lipgerm v1\ncomponent open\nx = t; y = 0\nx = 0; y = 0\nx = 0; y = t\n");
    CHECK(lne_constant(corner, 0.1) == Catch::Approx(std::sqrt(2.0)));
    double c = lne_constant(parse_germ(fixtures::square), 0.125);
    CHECK(c >= 1.0);
    CHECK(c <= 2.01);
}

TEST_CASE("tord properties on random arcs") {
    std::mt19937 rng(99);
    for (int it = 0; it < 300; ++it) {
        auto a = random_arc(rng), b = random_arc(rng), c = random_arc(rng);
        if (a == b || b == c || a == c) continue;
        auto ab = tord(a, b), bc = tord(b, c), ac = tord(a, c);
        CHECK(ab == tord(b, a));
        Rational m = std::min(ab.value, bc.value);
        CHECK(ac.value >= m);
        if (ab.value != bc.value) CHECK(ac.value == m);
    }
}

TEST_CASE("tord matches numeric slope") {
    std::mt19937 rng(1234);
    int checked = 0;
    while (checked < 100) {
        auto a = random_arc(rng), b = random_arc(rng);
        if (a == b) continue;
        auto v = tord(a, b);
        auto d = a - b;
        double slope = oracle::loglog_slope([&](double t) { return std::hypot(d.x.eval(t), d.y.eval(t)); }, 30, 40);
        CHECK(std::abs(slope - to_double(v.value)) < 0.05);
        ++checked;
    }
}

TEST_CASE("limit angle is symmetric and ignores higher order noise") {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> c(-5, 5);
    for (int it = 0; it < 200; ++it) {
        auto lin = [&] { return ArcGerm{PuiseuxSeries::monomial(c(rng), 1), PuiseuxSeries::monomial(c(rng), 1)}; };
        auto a = lin(), b = lin(), o = lin();
        if (a == o || b == o) continue;
        double ang = limit_angle(a, o, b);
        CHECK(ang == Catch::Approx(limit_angle(b, o, a)));
        auto noise = [&] {
            return ArcGerm{PuiseuxSeries::monomial(c(rng), make_rational(3, 2)), PuiseuxSeries::monomial(c(rng), 2)};
        };
        CHECK(ang == Catch::Approx(limit_angle(a + noise(), o + noise(), b + noise())).margin(1e-12));
    }
}

TEST_CASE("outer exponent is at least the inner exponent") {
    std::mt19937 rng(8);
    std::uniform_int_distribution<int> c(-6, 6), e(2, 6);
    for (int it = 0; it < 100; ++it) {
        // random monotone chain; x increasing guarantees simplicity
        Component comp;
        int n = 3 + it % 4;
        for (int i = 0; i < n; ++i)
            comp.vertices.push_back({PuiseuxSeries::monomial(i, 1) + PuiseuxSeries::monomial(c(rng), make_rational(e(rng) + 1, 2)),
                                     PuiseuxSeries::monomial(c(rng), make_rational(e(rng), 2))});
        auto g = make_polygonal_germ({comp});
        for (size_t i = 0; i < comp.size(); ++i)
            for (size_t j = i + 1; j < comp.size(); ++j)
                CHECK(tord(comp.vertices[i], comp.vertices[j]).value >= tord_inner(g.component(0), i, j).value);
    }
}
