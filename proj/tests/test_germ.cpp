#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "lipgeo/germ_io.hpp"
#include "lipgeo/metric.hpp"
#include "oracles.hpp"

using namespace lipgeo;

TEST_CASE("square germ") {
    auto g = parse_germ(fixtures::square);
    CHECK(g.component_count() == 1);
    CHECK(g.cone_opening_sq() == 2);
    CHECK(g.cone_opening() == Catch::Approx(std::sqrt(2.0)));
    auto L = plane_link(g, 0.25);
    REQUIRE(L.components[0].points.size() == 4);
    CHECK(L.components[0].points[1].x == -0.25);
    CHECK(L.components[0].points[1].y == 0.25);
    CHECK(L.components[0].closed);
}

TEST_CASE("triangle plus tail is valid and shares a vertex") {
    auto g = parse_germ(fixtures::x1);
    CHECK(g.nodes().size() == 4);
    CHECK(g.has_shared_vertices());
    auto L = plane_link(g, 0.1);
    CHECK(L.components[0].points[1].x == Catch::Approx(0.01));
    CHECK(L.components[0].points[2].y == Catch::Approx(-0.01));
    CHECK(L.components[1].points[1].x == Catch::Approx(0.001));
}

TEST_CASE("validation errors") {
    auto kind = [](const std::string& text) {
        try {
            parse_germ(text);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::NotFound;
    };
    CHECK(kind("lipgerm v1\ncomponent open\nx = t^{1/2}; y = 0\nx = t; y = 0\n") == ErrorKind::ConeViolation);
    CHECK(kind("lipgerm v1\ncomponent open\nx = t; y = 0\nx = t; y = 0\n") == ErrorKind::DuplicateVertex);
    CHECK(kind("lipgerm v1\ncomponent closed\nx = t; y = 0\nx = 0; y = t\n") == ErrorKind::TooFewVertices);
    CHECK(kind("lipgerm v1\ncomponent open\nx = t; y = 0\n") == ErrorKind::TooFewVertices);
    CHECK(kind("component open\n") == ErrorKind::ParseError);
    CHECK(kind("lipgerm v1\nx = t; y = 0\n") == ErrorKind::ParseError);
    // bow tie: edges cross for all t
    CHECK(kind("lipgerm v1\ncomponent closed\nx = t; y = t\nx = -t; y = -t\nx = t; y = -t\nx = -t; y = t\n") ==
          ErrorKind::NotSimple);
}

TEST_CASE("crossing at large t is reported as InvalidT") {
    // vertical segment from (0,t) to (0,t-3t^2) meets the x axis only for t > 1/3
    auto g = parse_germ("lipgerm v1\ncomponent open\nx = -t; y = 0\nx = t; y = 0\n"
                        "component open\nx = 0; y = t\nx = 0; y = t - 3*t^2\n");
    CHECK(g.t_max() <= 0.25);
    CHECK_NOTHROW(plane_link(g, 0.25));
    CHECK_NOTHROW(plane_link(g, 1.0 / 8));
    try {
        plane_link(g, 0.5);
        FAIL("expected InvalidT");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidT);
    }
    // independent oracle agrees on the crossing
    auto at = [](double t) {
        return oracle::seg_cross({-t, 0}, {t, 0}, {0, t}, {0, t - 3 * t * t});
    };
    CHECK(at(0.5));
    CHECK(!at(0.25));
}

TEST_CASE("tangent_direction") {
    auto d = tangent_direction({parse_series("t"), parse_series("0")});
    CHECK(d[0] == Catch::Approx(1 / std::sqrt(2.0)));
    CHECK(d[1] == 0);
    auto e = tangent_direction({parse_series("t^2"), parse_series("t^3")});
    CHECK(e[2] == 1.0);
    auto f = tangent_direction({parse_series("t"), parse_series("t")});
    CHECK(f[0] == Catch::Approx(1 / std::sqrt(3.0)));
}

TEST_CASE("synchronized views") {
    std::vector<ArcGerm> tent{{parse_series("-t"), parse_series("0")},
                              {parse_series("0"), parse_series("t")},
                              {parse_series("t"), parse_series("0")}};
    auto F = synchronized_view(tent, 0.0);
    CHECK(F.bounded());
    CHECK(F.limit_bound() == 1.0);
    CHECK(F.M() == Catch::Approx(1.0));
    auto s = F.slopes_at(0.01);
    CHECK(s[0] == Catch::Approx(1));
    CHECK(s[1] == Catch::Approx(-1));

    std::vector<ArcGerm> steep{{parse_series("-t^2"), parse_series("0")},
                               {parse_series("0"), parse_series("t")},
                               {parse_series("t^2"), parse_series("0")}};
    auto G = synchronized_view(steep, 0.0);
    CHECK(!G.bounded());

    std::vector<ArcGerm> seg{{parse_series("0"), parse_series("0")}, {parse_series("2*t"), parse_series("t")}};
    CHECK(synchronized_view(seg, 0.0).M() == Catch::Approx(0.5));

    std::vector<ArcGerm> back{{parse_series("t"), parse_series("0")}, {parse_series("0"), parse_series("t")}};
    CHECK_THROWS_AS(synchronized_view(back, 0.0), Error);
}

TEST_CASE("synchronized family t-derivative stays bounded") {
    std::vector<ArcGerm> chain{{parse_series("-t"), parse_series("t^2")},
                               {parse_series("t^2"), parse_series("t + t^2")},
                               {parse_series("t + t^3"), parse_series("-t^2")}};
    auto F = synchronized_view(chain, 0.0);
    // d/dt f_t(x_u(t)) along arc coordinates u, by central differences
    std::vector<double> sups;
    for (int k = 6; k <= 20; ++k) {
        double t = std::ldexp(1.0, -k), h = t * 1e-4;
        double sup = 0;
        for (double u : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            auto val = [&](double s) {
                auto p = F.vertices_at(s);
                double x = (1 - u) * p.front().x + u * p.back().x;
                return F.f(s, x);
            };
            sup = std::max(sup, std::abs(val(t + h) - val(t - h)) / (2 * h));
        }
        sups.push_back(sup);
    }
    for (size_t i = 4; i + 1 < sups.size(); ++i) CHECK(sups[i + 1] <= sups[i] * 1.01 + 1e-9);
}

TEST_CASE("edge lengths follow their exponents on the grid") {
    auto g = parse_germ(fixtures::x1);
    auto ex = edge_exponents(g);
    for (size_t c = 0; c < g.component_count(); ++c) {
        const auto& comp = g.component(c);
        for (size_t e = 0; e < comp.edge_count(); ++e) {
            auto [i, j] = comp.edge(e);
            double slope = oracle::loglog_slope(
                [&](double t) {
                    auto p = comp.vertices[i].at(t), q = comp.vertices[j].at(t);
                    return std::hypot(p.x - q.x, p.y - q.y);
                },
                8, 20);
            CHECK(std::abs(slope - to_double(ex[c][e])) < 0.05);
        }
    }
}

TEST_CASE("write, plane link and reparse round trip at rational t") {
    for (const auto* text : {&fixtures::square, &fixtures::x1, &fixtures::nested_squares}) {
        auto g = parse_germ(*text);
        auto again = parse_germ(write_germ(g));
        REQUIRE(again.components().size() == g.components().size());
        Rational t = make_rational(1, 10);
        for (size_t c = 0; c < g.component_count(); ++c)
            for (size_t i = 0; i < g.component(c).size(); ++i) {
                CHECK(again.component(c).vertices[i] == g.component(c).vertices[i]);
                CHECK(*again.component(c).vertices[i].at_exact(t) == *g.component(c).vertices[i].at_exact(t));
            }
    }
}
