#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <utility>

#include "closeout/errors.hpp"
#include "closeout/rational.hpp"

namespace closeout {

// An exact monetary amount in a single currency.  All arithmetic is exact
// rational; rendering to text (2 decimals, half away from zero) is the only
// rounding boundary.  Mixing currencies throws.
class Money {
public:
    Money() = default;  // zero with unset currency; assign before use
    Money(Rational amount, std::string currency)
        : amount_(std::move(amount)), currency_(std::move(currency)) {}

    static Money zero(std::string currency) { return {Rational{}, std::move(currency)}; }

    static Money parse(std::string_view text, std::string currency) {
        return {Rational::from_decimal_string(text), std::move(currency)};
    }

    static Money from_cents(long long cents, std::string currency) {
        return {Rational(BigInt(cents), BigInt(100)), std::move(currency)};
    }

    const Rational& amount() const { return amount_; }
    const std::string& currency() const { return currency_; }
    bool is_zero() const { return amount_.is_zero(); }
    int signum() const { return amount_.signum(); }

    Money operator-() const { return {-amount_, currency_}; }
    Money abs() const { return {amount_.abs(), currency_}; }

    friend Money operator+(const Money& a, const Money& b) {
        require_same_currency(a, b, "add");
        return {a.amount_ + b.amount_, a.currency_};
    }
    friend Money operator-(const Money& a, const Money& b) {
        require_same_currency(a, b, "subtract");
        return {a.amount_ - b.amount_, a.currency_};
    }
    Money& operator+=(const Money& o) { return *this = *this + o; }
    Money& operator-=(const Money& o) { return *this = *this - o; }

    friend Money operator*(const Money& a, const Rational& k) { return {a.amount_ * k, a.currency_}; }
    friend Money operator*(const Rational& k, const Money& a) { return a * k; }

    Money divided_by(long long divisor) const {
        if (divisor == 0) throw arithmetic_error("Money: division by zero");
        return {amount_ / Rational(divisor), currency_};
    }

    friend bool operator==(const Money& a, const Money& b) {
        require_same_currency(a, b, "compare");
        return a.amount_ == b.amount_;
    }
    friend std::strong_ordering operator<=>(const Money& a, const Money& b) {
        require_same_currency(a, b, "compare");
        return a.amount_ <=> b.amount_;
    }

    // "123.45"; the sole rounding boundary.
    std::string to_string() const { return amount_.to_decimal_string(2); }

private:
    static void require_same_currency(const Money& a, const Money& b, const char* op) {
        if (a.currency_ != b.currency_)
            throw arithmetic_error(std::string("Money: cannot ") + op + " " + a.currency_ +
                                   " and " + b.currency_);
    }

    Rational amount_;
    std::string currency_;
};

}  // namespace closeout
