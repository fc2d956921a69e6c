#pragma once

// Exact rational arithmetic on 64-bit numerators/denominators.
//
// Intermediate products are formed in 128 bits; any result that does not fit
// back into 64 bits raises std::overflow_error so that callers can fall back
// to floating point instead of silently losing exactness.

#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>

namespace qplab {

class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT: implicit by design of a number type

    Rational(std::int64_t num, std::int64_t den) { assign(num, den); }

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    explicit operator double() const noexcept { return to_double(); }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    /// Parses "3", "-7/4", "0.95", "1e-3". Decimal literals are converted exactly.
    static Rational parse(std::string_view text) {
        while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
        while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
        if (text.empty()) throw std::invalid_argument("empty rational literal");
        if (auto slash = text.find('/'); slash != std::string_view::npos) {
            return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
        }
        return parse_decimal(text);
    }

    /// Exact value of the shortest decimal string that round-trips to `value`.
    /// 0.9 becomes 9/10 rather than the binary expansion of the double.
    static Rational from_double(double value) {
        if (!std::isfinite(value)) throw std::overflow_error("non-finite value has no rational form");
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof(buf), value);
        if (res.ec != std::errc{}) throw std::overflow_error("cannot format double");
        return parse_decimal(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                    static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                    static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return make(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
    }
    Rational operator-() const { return make(-static_cast<__int128>(num_), den_); }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
        const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
        const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;

    static __int128 gcd128(__int128 a, __int128 b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static Rational make(__int128 num, __int128 den) {
        if (den == 0) throw std::domain_error("zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const __int128 g = gcd128(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        constexpr __int128 lim = INT64_MAX;
        if (num > lim || num < -lim || den > lim) throw std::overflow_error("rational overflow");
        Rational r;
        r.num_ = static_cast<std::int64_t>(num);
        r.den_ = static_cast<std::int64_t>(den);
        return r;
    }

    void assign(std::int64_t num, std::int64_t den) { *this = make(num, den); }

    static std::int64_t parse_int(std::string_view s) {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        if (!s.empty() && s.front() == '+') s.remove_prefix(1);
        std::int64_t v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
            throw std::invalid_argument("bad integer literal '" + std::string(s) + "'");
        return v;
    }

    static Rational parse_decimal(std::string_view s) {
        bool negative = false;
        if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
            negative = s.front() == '-';
            s.remove_prefix(1);
        }
        std::int64_t exponent = 0;
        if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
            exponent = parse_int(s.substr(e + 1));
            s = s.substr(0, e);
        }
        __int128 mant = 0;
        int frac_digits = 0;
        bool seen_dot = false;
        bool any_digit = false;
        for (char c : s) {
            if (c == '.') {
                if (seen_dot) throw std::invalid_argument("bad decimal literal");
                seen_dot = true;
                continue;
            }
            if (c < '0' || c > '9') throw std::invalid_argument("bad decimal literal '" + std::string(s) + "'");
            any_digit = true;
            mant = mant * 10 + (c - '0');
            if (mant > static_cast<__int128>(INT64_MAX)) throw std::overflow_error("decimal literal too long");
            if (seen_dot) ++frac_digits;
        }
        if (!any_digit) throw std::invalid_argument("bad decimal literal");
        exponent -= frac_digits;
        __int128 num = negative ? -mant : mant;
        __int128 den = 1;
        for (; exponent > 0; --exponent) {
            num *= 10;
            if (num > static_cast<__int128>(INT64_MAX) || num < -static_cast<__int128>(INT64_MAX))
                throw std::overflow_error("decimal literal too large");
        }
        for (; exponent < 0; ++exponent) {
            den *= 10;
            if (den > static_cast<__int128>(INT64_MAX) * 1000) throw std::overflow_error("decimal literal too small");
        }
        return make(num, den);
    }
};

/// Scalar conversions shared by code templated on Rational or double.
template <class T>
inline double to_real(const T& v) {
    if constexpr (std::is_same_v<T, Rational>) {
        return v.to_double();
    } else {
        return static_cast<double>(v);
    }
}

template <class T>
inline T from_int(std::int64_t v) {
    return T(v);
}

template <class T>
inline T ratio(std::int64_t num, std::int64_t den) {
    if constexpr (std::is_same_v<T, Rational>) {
        return Rational(num, den);
    } else {
        return static_cast<T>(num) / static_cast<T>(den);
    }
}

}  // namespace qplab
