#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <utility>

#include "closeout/bigint.hpp"
#include "closeout/errors.hpp"

namespace closeout {

// Exact rational number.  Always normalized: denominator > 0, gcd(num, den) = 1,
// zero is 0/1.  No operation rounds; decimal rendering is the only lossy step
// and is explicit.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long v) : num_(v), den_(1) {}  // NOLINT: implicit like BigInt
    Rational(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) { normalize(); }

    // Parses "123", "-4.5", "0.005" exactly.  Any number of decimals.
    static Rational from_decimal_string(std::string_view s) {
        if (s.empty()) throw validation_error("Rational: empty string");
        std::size_t dot = s.find('.');
        if (dot == std::string_view::npos) return {BigInt::from_string(s), 1};
        std::string_view head = s.substr(0, dot);
        std::string_view frac = s.substr(dot + 1);
        if (frac.empty()) throw validation_error("Rational: trailing dot in '" + std::string(s) + "'");
        std::string joined;
        joined.reserve(head.size() + frac.size());
        joined.append(head);
        joined.append(frac);
        BigInt num = BigInt::from_string(joined);
        BigInt den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den = den * 10;
        return {std::move(num), std::move(den)};
    }

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    int signum() const { return num_.signum(); }

    Rational operator-() const { return Rational(raw{}, -num_, den_); }
    Rational abs() const { return num_.signum() < 0 ? -*this : *this; }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return {a.num_ * b.num_, a.den_ * b.den_};
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.is_zero()) throw arithmetic_error("Rational: division by zero");
        return {a.num_ * b.den_, a.den_ * b.num_};
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        return a.num_ * b.den_ <=> b.num_ * a.den_;
    }

    // round(x * scale), half away from zero.  scale > 0.
    BigInt round_scaled(long long scale = 100) const {
        BigInt n = num_ * BigInt(scale);
        BigInt q, r;
        BigInt::divmod(n.abs(), den_, q, r);
        BigInt twice_r = r * 2;
        if (twice_r >= den_) q = q + BigInt(1);
        return num_.signum() < 0 ? -q : q;
    }

    // Fixed-point rendering, half away from zero, exactly `places` decimals.
    std::string to_decimal_string(int places = 2) const {
        long long scale = 1;
        for (int i = 0; i < places; ++i) scale *= 10;
        BigInt scaled = round_scaled(scale);
        std::string digits = scaled.abs().to_string();
        if (static_cast<int>(digits.size()) <= places)
            digits.insert(0, static_cast<std::size_t>(places + 1) - digits.size(), '0');
        std::string out;
        if (scaled.signum() < 0) out.push_back('-');
        out.append(digits, 0, digits.size() - static_cast<std::size_t>(places));
        if (places > 0) {
            out.push_back('.');
            out.append(digits, digits.size() - static_cast<std::size_t>(places), std::string::npos);
        }
        return out;
    }

    double to_double() const { return num_.to_double() / den_.to_double(); }

private:
    struct raw {};
    Rational(raw, BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) {}

    void normalize() {
        if (den_.is_zero()) throw arithmetic_error("Rational: zero denominator");
        if (den_.signum() < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        if (num_.is_zero()) {
            den_ = 1;
            return;
        }
        BigInt g = BigInt::gcd(num_, den_);
        if (g != BigInt(1)) {
            num_ = num_ / g;
            den_ = den_ / g;
        }
    }

    BigInt num_;
    BigInt den_;
};

}  // namespace closeout
