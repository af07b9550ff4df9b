#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "error.hpp"

namespace lipgeo {

using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline double to_double(const Rational& q) { return q.get_d(); }

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline int sign(const Rational& q) { return sgn(q); }

// Accepts "p", "p/q", and finite decimals like "-1.25".
inline Rational parse_rational(std::string_view s) {
    std::string str(s);
    while (!str.empty() && std::isspace(static_cast<unsigned char>(str.back()))) str.pop_back();
    size_t b = 0;
    while (b < str.size() && std::isspace(static_cast<unsigned char>(str[b]))) ++b;
    str = str.substr(b);
    if (str.empty()) fail(ErrorKind::ParseError, "empty number");
    if (str[0] == '+') str = str.substr(1);
    auto dot = str.find('.');
    try {
        if (dot != std::string::npos) {
            std::string digits = str.substr(0, dot) + str.substr(dot + 1);
            std::string den = "1" + std::string(str.size() - dot - 1, '0');
            if (digits.empty() || digits == "-") fail(ErrorKind::ParseError, "bad decimal '" + str + "'");
            Rational q{mpz_class(digits), mpz_class(den)};
            q.canonicalize();
            return q;
        }
        Rational q(str);
        if (q.get_den() == 0) fail(ErrorKind::ParseError, "zero denominator in '" + str + "'");
        q.canonicalize();
        return q;
    } catch (const std::invalid_argument&) {
        fail(ErrorKind::ParseError, "bad rational '" + str + "'");
    }
}

inline std::optional<mpz_class> exact_root(const mpz_class& z, unsigned long n) {
    if (z < 0) {
        if (n % 2 == 0) return std::nullopt;
        auto r = exact_root(-z, n);
        if (!r) return std::nullopt;
        return mpz_class(-*r);
    }
    mpz_class r;
    if (mpz_root(r.get_mpz_t(), z.get_mpz_t(), n) != 0) return r;
    return std::nullopt;
}

inline std::optional<Rational> exact_root(const Rational& q, unsigned long n) {
    auto num = exact_root(mpz_class(q.get_num()), n);
    auto den = exact_root(mpz_class(q.get_den()), n);
    if (!num || !den) return std::nullopt;
    Rational r(*num, *den);
    r.canonicalize();
    return r;
}

inline std::optional<Rational> exact_sqrt(const Rational& q) {
    if (q < 0) return std::nullopt;
    return exact_root(q, 2);
}

// q^e for rational e, exact when the root exists.
inline std::optional<Rational> exact_pow(const Rational& q, const Rational& e) {
    unsigned long den = mpz_class(e.get_den()).get_ui();
    auto root = exact_root(q, den);
    if (!root) return std::nullopt;
    mpz_class num = e.get_num();
    bool neg = num < 0;
    if (neg) num = -num;
    if (neg && *root == 0) return std::nullopt;
    Rational out = 1;
    Rational base = *root;
    unsigned long k = num.get_ui();
    while (k) {
        if (k & 1UL) out *= base;
        base *= base;
        k >>= 1;
    }
    if (neg) out = 1 / out;
    return out;
}

inline double pow_rational(double t, const Rational& e) {
    if (e == 0) return 1.0;
    if (e.get_den() == 1 && mpz_class(e.get_num()).fits_slong_p())
        return std::pow(t, static_cast<double>(mpz_class(e.get_num()).get_si()));
    return std::pow(t, e.get_d());
}

// Rational approximation of a double with bounded denominator (continued fractions).
inline Rational approximate(double x, long max_den = 1L << 20) {
    if (!std::isfinite(x)) fail(ErrorKind::ParseError, "non-finite value");
    long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double v = x;
    for (int i = 0; i < 64; ++i) {
        double a = std::floor(v);
        if (std::abs(a) > 1e15) break;
        long ai = static_cast<long>(a);
        long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        double frac = v - a;
        if (frac < 1e-15) break;
        v = 1.0 / frac;
    }
    return make_rational(p1, q1);
}

} // namespace lipgeo
