#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "rational.hpp"

namespace lipgeo {

struct Term {
    Rational exponent;
    Rational coeff;
    friend bool operator==(const Term&, const Term&) = default;
};

struct LeadingTerm {
    bool zero = true;
    Rational exponent;
    Rational coeff;

    static LeadingTerm zero_marker() { return {}; }
    friend bool operator==(const LeadingTerm&, const LeadingTerm&) = default;
};

// Positive square root of a rational, kept symbolic unless the radicand is a square.
struct SqrtCoefficient {
    Rational value;
    bool needs_sqrt = false;

    static SqrtCoefficient of(const Rational& radicand) {
        if (auto r = exact_sqrt(radicand)) return {*r, false};
        return {radicand, true};
    }
    double approx() const { return needs_sqrt ? std::sqrt(value.get_d()) : value.get_d(); }
    std::string str() const { return needs_sqrt ? "sqrt(" + to_string(value) + ")" : to_string(value); }
    friend bool operator==(const SqrtCoefficient&, const SqrtCoefficient&) = default;
};

enum class Ordering { Less, Equal, Greater, Inconclusive };

inline std::string_view to_string(Ordering o) {
    switch (o) {
    case Ordering::Less: return "Less";
    case Ordering::Equal: return "Equal";
    case Ordering::Greater: return "Greater";
    case Ordering::Inconclusive: return "Inconclusive";
    }
    return "?";
}

class PuiseuxSeries {
public:
    static inline Rational default_truncation = 12;

    PuiseuxSeries() : trunc_(default_truncation) {}
    explicit PuiseuxSeries(Rational truncation) : trunc_(std::move(truncation)) {}

    // Terms may arrive unsorted or with repeated exponents; they are merged.
    PuiseuxSeries(std::vector<Term> terms, Rational truncation) : trunc_(std::move(truncation)) {
        std::map<Rational, Rational> acc;
        for (auto& tm : terms) acc[tm.exponent] += tm.coeff;
        for (auto& [e, c] : acc) {
            if (e < 0) fail(ErrorKind::ParseError, "negative exponent " + to_string(e));
            if (c != 0 && e < trunc_) terms_.push_back({e, c});
        }
    }

    static PuiseuxSeries monomial(const Rational& c, const Rational& e,
                                  const Rational& truncation = default_truncation) {
        return PuiseuxSeries({{e, c}}, truncation);
    }
    static PuiseuxSeries constant(const Rational& c, const Rational& truncation = default_truncation) {
        return monomial(c, 0, truncation);
    }
    static PuiseuxSeries t(const Rational& truncation = default_truncation) {
        return monomial(1, 1, truncation);
    }

    const std::vector<Term>& terms() const { return terms_; }
    const Rational& truncation() const { return trunc_; }
    bool is_zero() const { return terms_.empty(); }

    long ramification() const {
        mpz_class l = 1;
        for (auto& tm : terms_) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), tm.exponent.get_den_mpz_t());
        return l.get_si();
    }

    LeadingTerm leading() const {
        if (terms_.empty()) return LeadingTerm::zero_marker();
        return {false, terms_.front().exponent, terms_.front().coeff};
    }

    // Exponent used for truncation bookkeeping; the zero series is known up to its truncation.
    const Rational& order() const { return terms_.empty() ? trunc_ : terms_.front().exponent; }

    PuiseuxSeries truncated(const Rational& k) const {
        return PuiseuxSeries(terms_, std::min(k, trunc_));
    }

    double eval(double t) const {
        double s = 0.0;
        for (auto& tm : terms_) s += tm.coeff.get_d() * pow_rational(t, tm.exponent);
        return s;
    }

    // Series divided by t^(leading exponent); keeps sign tests free of underflow.
    double eval_scaled(double t) const {
        if (terms_.empty()) return 0.0;
        double s = 0.0;
        const Rational& e0 = terms_.front().exponent;
        for (auto& tm : terms_) s += tm.coeff.get_d() * pow_rational(t, tm.exponent - e0);
        return s;
    }

    std::optional<Rational> eval_exact(const Rational& t) const {
        Rational s = 0;
        for (auto& tm : terms_) {
            auto p = exact_pow(t, tm.exponent);
            if (!p) return std::nullopt;
            s += tm.coeff * *p;
        }
        return s;
    }

    PuiseuxSeries operator-() const {
        PuiseuxSeries r(trunc_);
        r.terms_ = terms_;
        for (auto& tm : r.terms_) tm.coeff = -tm.coeff;
        return r;
    }

    friend PuiseuxSeries operator+(const PuiseuxSeries& a, const PuiseuxSeries& b) {
        PuiseuxSeries r(std::min(a.trunc_, b.trunc_));
        size_t i = 0, j = 0;
        auto push = [&](const Rational& e, const Rational& c) {
            if (c != 0 && e < r.trunc_) r.terms_.push_back({e, c});
        };
        while (i < a.terms_.size() || j < b.terms_.size()) {
            if (j == b.terms_.size() || (i < a.terms_.size() && a.terms_[i].exponent < b.terms_[j].exponent)) {
                push(a.terms_[i].exponent, a.terms_[i].coeff);
                ++i;
            } else if (i == a.terms_.size() || b.terms_[j].exponent < a.terms_[i].exponent) {
                push(b.terms_[j].exponent, b.terms_[j].coeff);
                ++j;
            } else {
                push(a.terms_[i].exponent, a.terms_[i].coeff + b.terms_[j].coeff);
                ++i;
                ++j;
            }
        }
        return r;
    }

    friend PuiseuxSeries operator-(const PuiseuxSeries& a, const PuiseuxSeries& b) { return a + (-b); }

    friend PuiseuxSeries operator*(const PuiseuxSeries& a, const PuiseuxSeries& b) {
        Rational ka = a.trunc_ + b.order(), kb = b.trunc_ + a.order();
        Rational k = std::min(ka, kb);
        std::vector<Term> prod;
        prod.reserve(a.terms_.size() * b.terms_.size());
        for (auto& x : a.terms_)
            for (auto& y : b.terms_) {
                Rational e = x.exponent + y.exponent;
                if (e < k) prod.push_back({e, x.coeff * y.coeff});
            }
        return PuiseuxSeries(std::move(prod), k);
    }

    friend PuiseuxSeries operator*(const Rational& c, const PuiseuxSeries& a) {
        if (c == 0) return PuiseuxSeries(a.trunc_);
        PuiseuxSeries r = a;
        for (auto& tm : r.terms_) tm.coeff *= c;
        return r;
    }

    PuiseuxSeries& operator+=(const PuiseuxSeries& o) { return *this = *this + o; }
    PuiseuxSeries& operator-=(const PuiseuxSeries& o) { return *this = *this - o; }
    PuiseuxSeries& operator*=(const PuiseuxSeries& o) { return *this = *this * o; }

    // Multiply by t^e.
    PuiseuxSeries shifted(const Rational& e) const {
        PuiseuxSeries r(trunc_ + e);
        r.terms_ = terms_;
        for (auto& tm : r.terms_) tm.exponent += e;
        return r;
    }

    friend bool operator==(const PuiseuxSeries& a, const PuiseuxSeries& b) {
        return a.trunc_ == b.trunc_ && a.terms_ == b.terms_;
    }

    std::string str() const;

private:
    std::vector<Term> terms_;
    Rational trunc_;
};

inline Ordering compare_eventual(const PuiseuxSeries& a, const PuiseuxSeries& b) {
    PuiseuxSeries d = a - b;
    if (d.is_zero()) return a.truncation() == b.truncation() ? Ordering::Equal : Ordering::Inconclusive;
    return d.leading().coeff > 0 ? Ordering::Greater : Ordering::Less;
}

// Sign of a series for all small t; 0 for the zero series.
inline int eventual_sign(const PuiseuxSeries& a) {
    if (a.is_zero()) return 0;
    return sgn(a.leading().coeff);
}

inline LeadingTerm norm2_leading(const PuiseuxSeries& dx, const PuiseuxSeries& dy) {
    if (dx.is_zero() && dy.is_zero()) fail(ErrorKind::BothZero, "norm2_leading of zero vector");
    Rational e = dx.is_zero() ? dy.order() : dy.is_zero() ? dx.order() : std::min(dx.order(), dy.order());
    Rational c = 0;
    if (!dx.is_zero() && dx.order() == e) c += dx.leading().coeff * dx.leading().coeff;
    if (!dy.is_zero() && dy.order() == e) c += dy.leading().coeff * dy.leading().coeff;
    return {false, 2 * e, c};
}

// ---- text form -------------------------------------------------------------

namespace detail {

inline std::string exponent_text(const Rational& e) {
    if (e == 1) return "t";
    return "t^{" + to_string(e) + "}";
}

class SeriesParser {
public:
    SeriesParser(std::string_view s, Rational default_k) : s_(s), k_(std::move(default_k)) {}

    PuiseuxSeries parse() {
        std::vector<Term> terms;
        std::optional<Rational> big_o;
        skip();
        bool first = true;
        while (!done()) {
            int sgn_ = 1;
            if (peek() == '+' || peek() == '-') {
                sgn_ = peek() == '-' ? -1 : 1;
                ++pos_;
                skip();
            } else if (!first) {
                error("expected '+' or '-'");
            }
            first = false;
            if (peek() == 'O') {
                ++pos_;
                expect('(');
                expect('t');
                Rational e = 1;
                skip();
                if (peek() == '^') {
                    ++pos_;
                    e = exponent();
                }
                expect(')');
                big_o = e;
            } else {
                terms.push_back(term(sgn_));
            }
            skip();
        }
        if (terms.empty() && !big_o) error("empty series");
        return PuiseuxSeries(std::move(terms), big_o ? *big_o : k_);
    }

private:
    Term term(int sgn_) {
        Rational c = 1;
        bool has_coeff = false;
        if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') {
            c = number();
            has_coeff = true;
            skip();
            if (peek() == '*') {
                ++pos_;
                skip();
            } else if (peek() != 't') {
                return {0, sgn_ * c};
            }
        }
        if (peek() != 't') error(has_coeff ? "expected 't'" : "expected term");
        ++pos_;
        skip();
        Rational e = 1;
        if (peek() == '^') {
            ++pos_;
            e = exponent();
        }
        return {e, sgn_ * c};
    }

    Rational exponent() {
        skip();
        char open = peek();
        if (open == '{' || open == '(') {
            ++pos_;
            skip();
            Rational e = signed_number();
            expect(open == '{' ? '}' : ')');
            return e;
        }
        return number();
    }

    Rational signed_number() {
        bool neg = false;
        if (peek() == '-') {
            neg = true;
            ++pos_;
        }
        Rational r = number();
        return neg ? Rational(-r) : r;
    }

    Rational number() {
        size_t b = pos_;
        while (!done() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) ++pos_;
        if (!done() && peek() == '/') {
            ++pos_;
            while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        }
        if (b == pos_) error("expected number");
        return parse_rational(s_.substr(b, pos_ - b));
    }

    void expect(char c) {
        skip();
        if (peek() != c) error(std::string("expected '") + c + "'");
        ++pos_;
        skip();
    }
    void skip() {
        while (!done() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool done() const { return pos_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }
    [[noreturn]] void error(const std::string& m) const {
        fail(ErrorKind::ParseError, m + " at column " + std::to_string(pos_ + 1) + " in '" + std::string(s_) + "'");
    }

    std::string_view s_;
    Rational k_;
    size_t pos_ = 0;
};

} // namespace detail

inline std::string PuiseuxSeries::str() const {
    std::string out;
    for (auto& tm : terms_) {
        Rational c = tm.coeff;
        if (out.empty()) {
            if (c < 0) {
                out += "-";
                c = -c;
            }
        } else {
            out += c < 0 ? " - " : " + ";
            if (c < 0) c = -c;
        }
        if (tm.exponent == 0) {
            out += to_string(c);
        } else {
            if (c != 1) out += to_string(c) + "*";
            out += detail::exponent_text(tm.exponent);
        }
    }
    if (out.empty()) out = "0";
    out += " + O(t^{" + to_string(trunc_) + "})";
    return out;
}

inline PuiseuxSeries parse_series(std::string_view text,
                                  const Rational& default_k = PuiseuxSeries::default_truncation) {
    return detail::SeriesParser(text, default_k).parse();
}

inline std::ostream& operator<<(std::ostream& os, const PuiseuxSeries& s) { return os << s.str(); }

} // namespace lipgeo
