#include <catch_amalgamated.hpp>

#include <random>

#include "lipgeo/puiseux.hpp"
#include "oracles.hpp"

using namespace lipgeo;

namespace {

PuiseuxSeries S(const char* s) { return parse_series(s); }

PuiseuxSeries random_series(std::mt19937& rng) {
    std::uniform_int_distribution<int> ram(1, 6), nterms(0, 8), num(0, 30), coef(-9, 9), den(1, 5);
    int r = ram(rng);
    std::vector<Term> terms;
    int n = nterms(rng);
    for (int i = 0; i < n; ++i) {
        int c = coef(rng);
        if (c == 0) c = 1;
        terms.push_back({make_rational(num(rng), r), make_rational(c, den(rng))});
    }
    return PuiseuxSeries(std::move(terms), 12);
}

// drop terms at or beyond k, for comparing values known to different truncations
PuiseuxSeries cut(const PuiseuxSeries& s, const Rational& k) { return s.truncated(k); }

} // namespace

TEST_CASE("add examples") {
    CHECK((S("t") + S("-t")).is_zero());
    CHECK(S("t + t^2") + S("t^2") == S("t + 2*t^2"));
    auto s = S("t^{3/2}") + S("t^{1/2}");
    REQUIRE(s.terms().size() == 2);
    CHECK(s.terms()[0].exponent == make_rational(1, 2));
    CHECK(s.ramification() == 2);
}

TEST_CASE("truncation of sums and products") {
    auto a = parse_series("t + O(t^{3})");
    auto b = parse_series("t^2 + O(t^{5})");
    CHECK((a + b).truncation() == 3);
    // min(K_a + lead(b), K_b + lead(a)) = min(5, 6)
    CHECK((a * b).truncation() == 5);
}

TEST_CASE("mul examples") {
    CHECK((S("t") * S("t")).terms() == S("t^2").terms());
    auto k5 = parse_series("t + O(t^{5})");
    CHECK((k5 * PuiseuxSeries(12)).is_zero());
    auto x = S("t + t^2");
    CHECK((x * x).truncated(12) == S("t^2 + 2*t^3 + t^4").truncated((x * x).truncation()));
}

TEST_CASE("leading examples") {
    auto l = S("3*t^2 + t^5").leading();
    CHECK(!l.zero);
    CHECK(l.exponent == 2);
    CHECK(l.coeff == 3);
    CHECK(PuiseuxSeries().leading().zero);
    auto m = S("1/2*t^{3/2} - t^2").leading();
    CHECK(m.exponent == make_rational(3, 2));
    CHECK(m.coeff == make_rational(1, 2));
}

TEST_CASE("norm2_leading examples") {
    auto a = norm2_leading(S("t^2"), PuiseuxSeries());
    CHECK(a.exponent == 4);
    CHECK(a.coeff == 1);
    auto b = norm2_leading(S("t^2"), S("t^3"));
    CHECK(b.exponent == 4);
    CHECK(b.coeff == 1);
    double slope = oracle::loglog_slope([](double t) { return std::sqrt(std::pow(t, 4) + std::pow(t, 6)); }, 5, 20);
    CHECK(slope == Catch::Approx(to_double(b.exponent) / 2).margin(0.01));
    auto c = norm2_leading(S("t^2"), S("t^2"));
    CHECK(c.exponent == 4);
    CHECK(c.coeff == 2);
    auto root = SqrtCoefficient::of(c.coeff);
    CHECK(root.needs_sqrt);
    CHECK(root.approx() == Catch::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(norm2_leading(PuiseuxSeries(), PuiseuxSeries()), Error);
}

TEST_CASE("eval examples") {
    CHECK(S("t^2").eval(0.5) == 0.25);
    CHECK(PuiseuxSeries().eval(0.3) == 0.0);
    CHECK(S("t - t^2").eval(0.25) == 0.1875);
    CHECK(*S("t^{3/2}").eval_exact(make_rational(1, 4)) == make_rational(1, 8));
    CHECK(!S("t^{1/2}").eval_exact(make_rational(1, 2)));
}

TEST_CASE("compare_eventual examples") {
    CHECK(compare_eventual(S("t"), S("t^2")) == Ordering::Greater);
    CHECK(compare_eventual(S("t^2"), S("t")) == Ordering::Less);
    CHECK(compare_eventual(S("t + t^3"), S("t + t^3")) == Ordering::Equal);
    CHECK(compare_eventual(parse_series("t + O(t^3)"), parse_series("t + O(t^5)")) == Ordering::Inconclusive);
}

TEST_CASE("text form round trip") {
    for (const char* s : {"t", "-t^2 + 1/3*t^{5/2}", "2 + t", "0", "-7/2*t^{7/3} + O(t^{9})", "t^(3/2) - 2t^3"}) {
        auto a = parse_series(s);
        CHECK(parse_series(a.str()) == a);
    }
    CHECK(parse_series("1.5*t").leading().coeff == make_rational(3, 2));
    CHECK_THROWS_AS(parse_series("t^"), Error);
    CHECK_THROWS_AS(parse_series("x + t"), Error);
    CHECK_THROWS_AS(parse_series(""), Error);
}

TEST_CASE("ring axioms on random series") {
    std::mt19937 rng(20260101);
    for (int it = 0; it < 300; ++it) {
        auto a = random_series(rng), b = random_series(rng), c = random_series(rng);
        CHECK(a + b == b + a);
        CHECK((a + b) + c == a + (b + c));
        CHECK(a * b == b * a);
        auto l = (a * b) * c, r = a * (b * c);
        Rational k = std::min(l.truncation(), r.truncation());
        CHECK(cut(l, k) == cut(r, k));
        auto dl = a * (b + c), dr = a * b + a * c;
        Rational k2 = std::min(dl.truncation(), dr.truncation());
        CHECK(cut(dl, k2) == cut(dr, k2));
        CHECK((a - a).is_zero());
    }
}

TEST_CASE("leading exponent of a product adds") {
    std::mt19937 rng(7);
    for (int it = 0; it < 300; ++it) {
        auto a = random_series(rng), b = random_series(rng);
        if (a.is_zero() || b.is_zero()) continue;
        auto p = a * b;
        REQUIRE(!p.is_zero());
        CHECK(p.leading().exponent == a.leading().exponent + b.leading().exponent);
    }
}

TEST_CASE("sign of evaluation matches leading coefficient for small t") {
    std::mt19937 rng(11);
    for (int it = 0; it < 200; ++it) {
        auto a = random_series(rng);
        if (a.is_zero()) continue;
        // coefficients are bounded by 9 and exponent gaps are at least 1/6
        double t = std::pow(2.0, -6.0 * 12);
        double v = a.eval_scaled(t);
        CHECK((v > 0) == (a.leading().coeff > 0));
    }
}

TEST_CASE("norm2 exponent lies in the ramification lattice") {
    std::mt19937 rng(5);
    for (int it = 0; it < 200; ++it) {
        auto a = random_series(rng), b = random_series(rng);
        if (a.is_zero() && b.is_zero()) continue;
        auto l = norm2_leading(a, b);
        mpz_class r = 1;
        mpz_lcm(r.get_mpz_t(), mpz_class(a.ramification()).get_mpz_t(), mpz_class(b.ramification()).get_mpz_t());
        Rational scaled = l.exponent * r;
        CHECK(scaled.get_den() == 1);
    }
}
