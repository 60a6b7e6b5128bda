#pragma once

// Exact rational arithmetic on 128-bit integers.
//
// Volumes, thresholds and coverage values are ratios of small integers
// (cell counts over 2^(k*d), replicate counts over n, dyadic doubles), so a
// reduced 128-bit fraction has generous headroom for every product that
// appears in the estimators.  Overflow throws instead of wrapping.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rset {

using int128 = __int128;
using uint128 = unsigned __int128;

namespace detail {

inline uint128 uabs128(int128 v) {
    return v < 0 ? uint128(-(v + 1)) + 1 : uint128(v);
}

inline uint128 gcd128(uint128 a, uint128 b) {
    while (b != 0) {
        uint128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

inline int128 checked_mul(int128 a, int128 b) {
    int128 out;
    if (__builtin_mul_overflow(a, b, &out))
        throw std::overflow_error("rational: 128-bit multiply overflow");
    return out;
}

inline int128 checked_add(int128 a, int128 b) {
    int128 out;
    if (__builtin_add_overflow(a, b, &out))
        throw std::overflow_error("rational: 128-bit add overflow");
    return out;
}

} // namespace detail

class Rational {
public:
    Rational() = default;
    Rational(int64_t value) : num_(value), den_(1) {}
    Rational(int64_t num, int64_t den) : num_(num), den_(den) { normalize(); }
    Rational(int128 num, int128 den) : num_(num), den_(den) { normalize(); }

    // Exact value of a finite double.  Magnitudes below 2^-120 collapse to
    // zero; doubles that large-scale beyond 128 bits are rejected.  Every
    // probability or volume handed across the API fits comfortably.
    static Rational from_double(double x);

    int128 num() const { return num_; }
    int128 den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    int sign() const { return num_ == 0 ? 0 : (num_ < 0 ? -1 : 1); }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    Rational operator-() const {
        Rational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        using namespace detail;
        uint128 g = gcd128(uabs128(a.den_), uabs128(b.den_));
        int128 bd = b.den_ / int128(g);
        int128 n = checked_add(checked_mul(a.num_, bd),
                               checked_mul(b.num_, a.den_ / int128(g)));
        int128 d = checked_mul(a.den_, bd);
        return Rational(n, d);
    }

    friend Rational operator-(const Rational& a, const Rational& b) {
        return a + (-b);
    }

    friend Rational operator*(const Rational& a, const Rational& b) {
        using namespace detail;
        // cross-reduce before multiplying to keep magnitudes down
        uint128 g1 = gcd128(uabs128(a.num_), uabs128(b.den_));
        uint128 g2 = gcd128(uabs128(b.num_), uabs128(a.den_));
        int128 n = checked_mul(a.num_ / int128(g1), b.num_ / int128(g2));
        int128 d = checked_mul(a.den_ / int128(g2), b.den_ / int128(g1));
        return Rational(n, d);
    }

    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational: division by zero");
        Rational inv;
        inv.num_ = b.den_;
        inv.den_ = b.num_;
        if (inv.den_ < 0) { inv.num_ = -inv.num_; inv.den_ = -inv.den_; }
        return a * inv;
    }

    Rational& operator+=(const Rational& o) { *this = *this + o; return *this; }
    Rational& operator-=(const Rational& o) { *this = *this - o; return *this; }
    Rational& operator*=(const Rational& o) { *this = *this * o; return *this; }

    // Exact comparison.  Cross products can exceed 128 bits for extreme
    // operands, so fall back to the continued-fraction walk when they would.
    friend int compare(const Rational& a, const Rational& b);

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) { return compare(a, b) < 0; }
    friend bool operator>(const Rational& a, const Rational& b) { return compare(a, b) > 0; }
    friend bool operator<=(const Rational& a, const Rational& b) { return compare(a, b) <= 0; }
    friend bool operator>=(const Rational& a, const Rational& b) { return compare(a, b) >= 0; }

    std::string to_string() const;

private:
    int128 num_ = 0;
    int128 den_ = 1;

    void normalize() {
        if (den_ == 0) throw std::domain_error("rational: zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        if (num_ == 0) { den_ = 1; return; }
        uint128 g = detail::gcd128(detail::uabs128(num_), detail::uabs128(den_));
        num_ /= int128(g);
        den_ /= int128(g);
    }
};

inline Rational abs(const Rational& a) { return a.sign() < 0 ? -a : a; }

namespace detail {

// Compare a/b with c/d for non-negative a,c and positive b,d without
// forming cross products: Euclidean steps on the integer parts, flipping
// the answer each time both sides are replaced by their reciprocals.
inline int cmp_frac_nonneg(uint128 a, uint128 b, uint128 c, uint128 d) {
    int flip = 1;
    for (;;) {
        uint128 q1 = a / b, r1 = a % b;
        uint128 q2 = c / d, r2 = c % d;
        if (q1 != q2) return flip * (q1 < q2 ? -1 : 1);
        if (r1 == 0 && r2 == 0) return 0;
        if (r1 == 0) return -flip;
        if (r2 == 0) return flip;
        // r1/b vs r2/d  ==  reverse of  b/r1 vs d/r2
        a = b; b = r1;
        c = d; d = r2;
        flip = -flip;
    }
}

} // namespace detail

inline int compare(const Rational& a, const Rational& b) {
    if (a.sign() != b.sign()) return a.sign() < b.sign() ? -1 : 1;
    bool neg = a.sign() < 0;
    int128 l, r;
    bool of = __builtin_mul_overflow(a.num_, b.den_, &l) ||
              __builtin_mul_overflow(b.num_, a.den_, &r);
    if (!of) return l == r ? 0 : (l < r ? -1 : (1));
    int c = detail::cmp_frac_nonneg(detail::uabs128(a.num_), detail::uabs128(a.den_),
                                    detail::uabs128(b.num_), detail::uabs128(b.den_));
    return neg ? -c : c;
}

inline Rational Rational::from_double(double x) {
    if (x != x || x - x != 0.0)
        throw std::domain_error("rational: non-finite double");
    if (x == 0.0) return Rational();
    bool neg = x < 0;
    double ax = neg ? -x : x;
    int exp = 0;
    double frac = std::frexp(ax, &exp); // ax = frac * 2^exp, frac in [0.5, 1)
    int64_t mant = static_cast<int64_t>(std::ldexp(frac, 53)); // 53-bit integer
    int shift = exp - 53;
    Rational r;
    if (shift >= 0) {
        if (shift > 70) throw std::overflow_error("rational: double too large");
        r = Rational(int128(mant) << shift, int128(1));
    } else {
        if (-shift > 120) return Rational(); // below 2^-120: treat as zero
        r = Rational(int128(mant), int128(1) << (-shift));
    }
    return neg ? -r : r;
}

inline std::string Rational::to_string() const {
    auto u128s = [](uint128 v) {
        if (v == 0) return std::string("0");
        std::string s;
        while (v) { s.insert(s.begin(), char('0' + int(v % 10))); v /= 10; }
        return s;
    };
    std::string s = num_ < 0 ? "-" : "";
    s += u128s(detail::uabs128(num_));
    if (den_ != 1) { s += "/"; s += u128s(uint128(den_)); }
    return s;
}

} // namespace rset
