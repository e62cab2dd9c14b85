#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "closeout/errors.hpp"

namespace closeout {

// Arbitrary-precision signed integer, sign-magnitude over base-2^32 limbs.
// Magnitude is little-endian with no trailing zero limbs; zero has sign 0 and
// an empty magnitude.  Division truncates toward zero, remainder takes the
// sign of the dividend.
class BigInt {
public:
    BigInt() = default;

    BigInt(long long v) {  // NOLINT: implicit by design, mirrors integer literals
        if (v == 0) return;
        sign_ = v < 0 ? -1 : 1;
        // Avoid UB negating LLONG_MIN.
        std::uint64_t m = v < 0 ? ~static_cast<std::uint64_t>(v) + 1 : static_cast<std::uint64_t>(v);
        while (m != 0) {
            mag_.push_back(static_cast<std::uint32_t>(m & 0xffffffffu));
            m >>= 32;
        }
    }

    static BigInt from_string(std::string_view s) {
        if (s.empty()) throw validation_error("BigInt: empty string");
        int sign = 1;
        std::size_t i = 0;
        if (s[0] == '+' || s[0] == '-') {
            sign = s[0] == '-' ? -1 : 1;
            i = 1;
        }
        if (i == s.size()) throw validation_error("BigInt: no digits in '" + std::string(s) + "'");
        BigInt out;
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9')
                throw validation_error("BigInt: bad digit in '" + std::string(s) + "'");
            out.mul_small_inplace(10);
            out.add_small_inplace(static_cast<std::uint32_t>(s[i] - '0'));
        }
        if (!out.mag_.empty()) out.sign_ = sign;
        return out;
    }

    bool is_zero() const { return sign_ == 0; }
    int signum() const { return sign_; }

    BigInt operator-() const {
        BigInt r = *this;
        r.sign_ = -r.sign_;
        return r;
    }

    BigInt abs() const {
        BigInt r = *this;
        if (r.sign_ < 0) r.sign_ = 1;
        return r;
    }

    friend BigInt operator+(const BigInt& a, const BigInt& b) {
        if (a.sign_ == 0) return b;
        if (b.sign_ == 0) return a;
        BigInt r;
        if (a.sign_ == b.sign_) {
            r.mag_ = add_mag(a.mag_, b.mag_);
            r.sign_ = a.sign_;
        } else {
            int c = cmp_mag(a.mag_, b.mag_);
            if (c == 0) return BigInt{};
            if (c > 0) {
                r.mag_ = sub_mag(a.mag_, b.mag_);
                r.sign_ = a.sign_;
            } else {
                r.mag_ = sub_mag(b.mag_, a.mag_);
                r.sign_ = b.sign_;
            }
        }
        return r;
    }

    friend BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

    friend BigInt operator*(const BigInt& a, const BigInt& b) {
        if (a.sign_ == 0 || b.sign_ == 0) return BigInt{};
        BigInt r;
        r.mag_.assign(a.mag_.size() + b.mag_.size(), 0);
        for (std::size_t i = 0; i < a.mag_.size(); ++i) {
            std::uint64_t carry = 0;
            for (std::size_t j = 0; j < b.mag_.size(); ++j) {
                std::uint64_t cur = static_cast<std::uint64_t>(a.mag_[i]) * b.mag_[j] +
                                    r.mag_[i + j] + carry;
                r.mag_[i + j] = static_cast<std::uint32_t>(cur & 0xffffffffu);
                carry = cur >> 32;
            }
            r.mag_[i + b.mag_.size()] += static_cast<std::uint32_t>(carry);
        }
        r.trim();
        r.sign_ = a.sign_ * b.sign_;
        return r;
    }

    // Truncated division: a = q*b + r with |r| < |b| and sign(r) = sign(a).
    static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
        if (b.sign_ == 0) throw arithmetic_error("BigInt: division by zero");
        if (a.sign_ == 0) {
            q = BigInt{};
            r = BigInt{};
            return;
        }
        int c = cmp_mag(a.mag_, b.mag_);
        if (c < 0) {
            q = BigInt{};
            r = a;
            return;
        }
        if (b.mag_.size() == 1) {
            BigInt quot = a.abs();
            std::uint32_t rem = quot.divmod_small_inplace(b.mag_[0]);
            q = quot;
            r = BigInt(static_cast<long long>(rem));
        } else {
            // Shift-subtract long division over the magnitude bits.
            BigInt quot, rem;
            quot.mag_.assign(a.mag_.size(), 0);
            for (std::size_t bit = a.bit_length(); bit-- > 0;) {
                rem.shl1_inplace();
                if (a.test_bit(bit)) rem.set_bit0();
                if (cmp_mag(rem.mag_, b.mag_) >= 0) {
                    rem.mag_ = sub_mag(rem.mag_, b.mag_);
                    rem.trim();
                    quot.mag_[bit / 32] |= (1u << (bit % 32));
                }
            }
            quot.trim();
            quot.sign_ = quot.mag_.empty() ? 0 : 1;
            rem.sign_ = rem.mag_.empty() ? 0 : 1;
            q = quot;
            r = rem;
        }
        if (a.sign_ * b.sign_ < 0) q.sign_ = -q.sign_;
        if (a.sign_ < 0) r.sign_ = -r.sign_;
    }

    BigInt operator/(const BigInt& b) const {
        BigInt q, r;
        divmod(*this, b, q, r);
        return q;
    }

    BigInt operator%(const BigInt& b) const {
        BigInt q, r;
        divmod(*this, b, q, r);
        return r;
    }

    static BigInt gcd(BigInt a, BigInt b) {
        a = a.abs();
        b = b.abs();
        while (!b.is_zero()) {
            BigInt q, r;
            divmod(a, b, q, r);
            a = b;
            b = r;
        }
        return a;
    }

    friend bool operator==(const BigInt& a, const BigInt& b) {
        return a.sign_ == b.sign_ && a.mag_ == b.mag_;
    }

    friend std::strong_ordering operator<=>(const BigInt& a, const BigInt& b) {
        if (a.sign_ != b.sign_) return a.sign_ <=> b.sign_;
        int c = cmp_mag(a.mag_, b.mag_) * (a.sign_ < 0 ? -1 : 1);
        return c <=> 0;
    }

    std::string to_string() const {
        if (sign_ == 0) return "0";
        BigInt t = abs();
        std::string digits;
        while (!t.mag_.empty()) {
            std::uint32_t rem = t.divmod_small_inplace(1000000000u);
            bool last = t.mag_.empty();
            for (int k = 0; k < 9; ++k) {
                digits.push_back(static_cast<char>('0' + rem % 10));
                rem /= 10;
                if (last && rem == 0) break;
            }
        }
        if (sign_ < 0) digits.push_back('-');
        std::reverse(digits.begin(), digits.end());
        return digits;
    }

    long long to_int64() const {
        if (sign_ == 0) return 0;
        if (mag_.size() > 2) throw arithmetic_error("BigInt: out of int64 range");
        std::uint64_t m = mag_[0];
        if (mag_.size() == 2) m |= static_cast<std::uint64_t>(mag_[1]) << 32;
        if (sign_ > 0) {
            if (m > static_cast<std::uint64_t>(std::numeric_limits<long long>::max()))
                throw arithmetic_error("BigInt: out of int64 range");
            return static_cast<long long>(m);
        }
        if (m > static_cast<std::uint64_t>(std::numeric_limits<long long>::max()) + 1)
            throw arithmetic_error("BigInt: out of int64 range");
        return static_cast<long long>(~m + 1);
    }

    double to_double() const {
        double v = 0.0;
        for (std::size_t i = mag_.size(); i-- > 0;) v = v * 4294967296.0 + mag_[i];
        return sign_ < 0 ? -v : v;
    }

    // Magnitude as big-endian bytes without leading zeros; empty for zero.
    std::vector<std::uint8_t> magnitude_bytes_be() const {
        std::vector<std::uint8_t> out;
        for (std::size_t i = mag_.size(); i-- > 0;) {
            out.push_back(static_cast<std::uint8_t>(mag_[i] >> 24));
            out.push_back(static_cast<std::uint8_t>(mag_[i] >> 16));
            out.push_back(static_cast<std::uint8_t>(mag_[i] >> 8));
            out.push_back(static_cast<std::uint8_t>(mag_[i]));
        }
        std::size_t lead = 0;
        while (lead < out.size() && out[lead] == 0) ++lead;
        out.erase(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(lead));
        return out;
    }

private:
    int sign_ = 0;
    std::vector<std::uint32_t> mag_;

    void trim() {
        while (!mag_.empty() && mag_.back() == 0) mag_.pop_back();
        if (mag_.empty()) sign_ = 0;
    }

    static int cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
        if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
        for (std::size_t i = a.size(); i-- > 0;)
            if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
        return 0;
    }

    static std::vector<std::uint32_t> add_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b) {
        const auto& big = a.size() >= b.size() ? a : b;
        const auto& small = a.size() >= b.size() ? b : a;
        std::vector<std::uint32_t> r = big;
        std::uint64_t carry = 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            std::uint64_t cur = static_cast<std::uint64_t>(r[i]) + carry +
                                (i < small.size() ? small[i] : 0u);
            r[i] = static_cast<std::uint32_t>(cur & 0xffffffffu);
            carry = cur >> 32;
            if (carry == 0 && i >= small.size()) break;
        }
        if (carry) r.push_back(static_cast<std::uint32_t>(carry));
        return r;
    }

    // Requires |a| >= |b|.
    static std::vector<std::uint32_t> sub_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b) {
        std::vector<std::uint32_t> r = a;
        std::int64_t borrow = 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            std::int64_t cur = static_cast<std::int64_t>(r[i]) - borrow -
                               (i < b.size() ? static_cast<std::int64_t>(b[i]) : 0);
            borrow = cur < 0 ? 1 : 0;
            if (cur < 0) cur += 0x100000000ll;
            r[i] = static_cast<std::uint32_t>(cur);
            if (borrow == 0 && i >= b.size()) break;
        }
        while (!r.empty() && r.back() == 0) r.pop_back();
        return r;
    }

    void mul_small_inplace(std::uint32_t m) {
        std::uint64_t carry = 0;
        for (auto& limb : mag_) {
            std::uint64_t cur = static_cast<std::uint64_t>(limb) * m + carry;
            limb = static_cast<std::uint32_t>(cur & 0xffffffffu);
            carry = cur >> 32;
        }
        if (carry) mag_.push_back(static_cast<std::uint32_t>(carry));
        trim();
    }

    void add_small_inplace(std::uint32_t v) {
        std::uint64_t carry = v;
        for (std::size_t i = 0; i < mag_.size() && carry; ++i) {
            std::uint64_t cur = static_cast<std::uint64_t>(mag_[i]) + carry;
            mag_[i] = static_cast<std::uint32_t>(cur & 0xffffffffu);
            carry = cur >> 32;
        }
        if (carry) mag_.push_back(static_cast<std::uint32_t>(carry));
        if (!mag_.empty() && sign_ == 0) sign_ = 1;
    }

    // Divides |this| by d, returns the remainder.  Sign is left to the caller.
    std::uint32_t divmod_small_inplace(std::uint32_t d) {
        std::uint64_t rem = 0;
        for (std::size_t i = mag_.size(); i-- > 0;) {
            std::uint64_t cur = (rem << 32) | mag_[i];
            mag_[i] = static_cast<std::uint32_t>(cur / d);
            rem = cur % d;
        }
        trim();
        return static_cast<std::uint32_t>(rem);
    }

    std::size_t bit_length() const {
        if (mag_.empty()) return 0;
        std::uint32_t top = mag_.back();
        std::size_t bits = (mag_.size() - 1) * 32;
        while (top) {
            ++bits;
            top >>= 1;
        }
        return bits;
    }

    bool test_bit(std::size_t bit) const {
        std::size_t limb = bit / 32;
        if (limb >= mag_.size()) return false;
        return (mag_[limb] >> (bit % 32)) & 1u;
    }

    void shl1_inplace() {
        std::uint32_t carry = 0;
        for (auto& limb : mag_) {
            std::uint32_t next = limb >> 31;
            limb = (limb << 1) | carry;
            carry = next;
        }
        if (carry) mag_.push_back(carry);
    }

    void set_bit0() {
        if (mag_.empty()) mag_.push_back(1);
        else mag_[0] |= 1u;
        sign_ = 1;
    }
};

}  // namespace closeout
