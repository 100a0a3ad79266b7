#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dapac/errors.hpp"

namespace dapac {

/// Prime modulus for the symbol field. 2 <= q < 2^16, primality checked at
/// construction so every element fits a 16-bit wire slot.
struct FieldPrime {
    uint16_t q;

    explicit FieldPrime(uint32_t modulus) {
        if (modulus < 2 || modulus >= (1u << 16) || !is_prime(modulus))
            throw ConfigError("field modulus must be a prime in [2, 2^16): " +
                              std::to_string(modulus));
        q = static_cast<uint16_t>(modulus);
    }

    static bool is_prime(uint32_t n) {
        if (n < 2) return false;
        for (uint32_t d = 2; d * d <= n; ++d)
            if (n % d == 0) return false;
        return true;
    }

    bool operator==(const FieldPrime&) const = default;
};

/// Element of F_q. Stores its modulus so mixed-field operations are caught
/// instead of silently producing garbage. Value is always reduced.
class Fe {
  public:
    Fe() : v_(0), q_(2) {}
    Fe(uint32_t value, FieldPrime f) : q_(f.q) {
        if (value >= q_)
            throw FieldMismatch("element " + std::to_string(value) +
                                " out of range for q=" + std::to_string(q_));
        v_ = static_cast<uint16_t>(value);
    }

    static Fe reduced(uint64_t value, FieldPrime f) {
        return Fe(static_cast<uint32_t>(value % f.q), f);
    }

    uint16_t value() const { return v_; }
    uint16_t modulus() const { return q_; }
    FieldPrime field() const { return FieldPrime(q_); }

    Fe operator+(Fe rhs) const {
        check(rhs);
        uint32_t s = uint32_t(v_) + rhs.v_;
        if (s >= q_) s -= q_;
        return from_raw(uint16_t(s), q_);
    }
    Fe operator-(Fe rhs) const {
        check(rhs);
        uint32_t s = uint32_t(v_) + q_ - rhs.v_;
        if (s >= q_) s -= q_;
        return from_raw(uint16_t(s), q_);
    }
    Fe operator*(Fe rhs) const {
        check(rhs);
        return from_raw(uint16_t((uint32_t(v_) * rhs.v_) % q_), q_);
    }
    Fe operator-() const { return from_raw(v_ == 0 ? 0 : uint16_t(q_ - v_), q_); }

    Fe& operator+=(Fe rhs) { return *this = *this + rhs; }
    Fe& operator-=(Fe rhs) { return *this = *this - rhs; }
    Fe& operator*=(Fe rhs) { return *this = *this * rhs; }

    /// Multiplicative inverse via Fermat; q is prime so a^(q-2) works.
    Fe inv() const {
        if (v_ == 0) throw DivisionByZero("inverse of zero");
        uint32_t base = v_, acc = 1;
        uint32_t e = uint32_t(q_) - 2;
        while (e) {
            if (e & 1) acc = (acc * base) % q_;
            base = (base * base) % q_;
            e >>= 1;
        }
        return from_raw(uint16_t(acc), q_);
    }

    bool operator==(const Fe&) const = default;

  private:
    static Fe from_raw(uint16_t v, uint16_t q) {
        Fe e;
        e.v_ = v;
        e.q_ = q;
        return e;
    }
    void check(Fe rhs) const {
        if (q_ != rhs.q_)
            throw FieldMismatch("mixed moduli " + std::to_string(q_) + " and " +
                                std::to_string(rhs.q_));
    }

    uint16_t v_;
    uint16_t q_;
};

inline Fe fe_zero(FieldPrime f) { return Fe(0, f); }
inline Fe fe_one(FieldPrime f) { return Fe(1 % f.q, f); }

/// coeffs^T * rows: column-wise inner product of a coefficient vector with a
/// stack of equal-width symbol rows. Output width = row width.
inline std::vector<Fe> dot(std::span<const Fe> coeffs,
                           std::span<const std::span<const Fe>> rows) {
    if (coeffs.size() != rows.size())
        throw DimensionError("coefficient count " + std::to_string(coeffs.size()) +
                             " != row count " + std::to_string(rows.size()));
    if (rows.empty()) return {};
    size_t width = rows[0].size();
    FieldPrime f = coeffs.empty() ? FieldPrime(2) : coeffs[0].field();
    std::vector<Fe> out(width, fe_zero(f));
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != width)
            throw DimensionError("ragged rows in dot");
        for (size_t c = 0; c < width; ++c) out[c] += coeffs[r] * rows[r][c];
    }
    return out;
}

inline std::vector<Fe> dot(const std::vector<Fe>& coeffs,
                           const std::vector<std::vector<Fe>>& rows) {
    std::vector<std::span<const Fe>> views;
    views.reserve(rows.size());
    for (const auto& r : rows) views.emplace_back(r.data(), r.size());
    return dot(std::span<const Fe>(coeffs.data(), coeffs.size()),
               std::span<const std::span<const Fe>>(views.data(), views.size()));
}

} // namespace dapac
