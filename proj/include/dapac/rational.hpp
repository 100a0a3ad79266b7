#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "dapac/errors.hpp"

namespace dapac {

/// Exact signed rational on 64-bit words with overflow checks. All rates,
/// load ratios and audit probabilities stay tiny, so 64 bits is plenty; the
/// checks turn a silent wrap into a loud failure if that ever stops holding.
class Rational {
  public:
    Rational() : num_(0), den_(1) {}
    Rational(int64_t n) : num_(n), den_(1) {}
    Rational(int64_t n, int64_t d) : num_(n), den_(d) { normalize(); }

    int64_t num() const { return num_; }
    int64_t den() const { return den_; }

    bool is_zero() const { return num_ == 0; }

    Rational operator+(const Rational& r) const {
        return Rational(checked_add(checked_mul(num_, r.den_), checked_mul(r.num_, den_)),
                        checked_mul(den_, r.den_));
    }
    Rational operator-(const Rational& r) const {
        return Rational(checked_sub(checked_mul(num_, r.den_), checked_mul(r.num_, den_)),
                        checked_mul(den_, r.den_));
    }
    Rational operator*(const Rational& r) const {
        return Rational(checked_mul(num_, r.num_), checked_mul(den_, r.den_));
    }
    Rational operator/(const Rational& r) const {
        if (r.num_ == 0) throw DivisionByZero("rational division by zero");
        return Rational(checked_mul(num_, r.den_), checked_mul(den_, r.num_));
    }
    Rational operator-() const { return Rational(-num_, den_); }

    Rational& operator+=(const Rational& r) { return *this = *this + r; }
    Rational& operator-=(const Rational& r) { return *this = *this - r; }
    Rational& operator*=(const Rational& r) { return *this = *this * r; }
    Rational& operator/=(const Rational& r) { return *this = *this / r; }

    bool operator==(const Rational&) const = default;
    bool operator<(const Rational& r) const {
        return checked_mul(num_, r.den_) < checked_mul(r.num_, den_);
    }
    bool operator<=(const Rational& r) const { return *this < r || *this == r; }
    bool operator>(const Rational& r) const { return r < *this; }
    bool operator>=(const Rational& r) const { return r <= *this; }

    Rational abs() const { return num_ < 0 ? -*this : *this; }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

  private:
    void normalize() {
        if (den_ == 0) throw DivisionByZero("rational with zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    static int64_t checked_mul(int64_t a, int64_t b) {
        int64_t r;
        if (__builtin_mul_overflow(a, b, &r)) throw Error("rational overflow (mul)");
        return r;
    }
    static int64_t checked_add(int64_t a, int64_t b) {
        int64_t r;
        if (__builtin_add_overflow(a, b, &r)) throw Error("rational overflow (add)");
        return r;
    }
    static int64_t checked_sub(int64_t a, int64_t b) {
        int64_t r;
        if (__builtin_sub_overflow(a, b, &r)) throw Error("rational overflow (sub)");
        return r;
    }

    int64_t num_;
    int64_t den_;
};

} // namespace dapac
