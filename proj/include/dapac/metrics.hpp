#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dapac/protocol.hpp"
#include "dapac/rational.hpp"

namespace dapac {

/// Load ratio is dedicated/central download cost; the baseline downloads
/// nothing from a central server, so it carries den == 0 (infinity).
struct LoadRatio {
    int64_t num = 0;
    int64_t den = 0;

    static LoadRatio infinite() { return {1, 0}; }
    static LoadRatio of(Rational r) { return {r.num(), r.den()}; }

    bool is_infinite() const { return den == 0; }
    Rational value() const {
        if (is_infinite()) throw DivisionByZero("infinite load ratio");
        return Rational(num, den);
    }
    std::string str() const { return is_infinite() ? "inf" : Rational(num, den).str(); }

    bool operator==(const LoadRatio&) const = default;
};

struct SchemeMetrics {
    std::string scheme;
    Rational rate;
    LoadRatio load_ratio;
    int64_t cr_symbols = 0;               // common randomness consumed, in symbols
    std::vector<int64_t> downloads;       // per server, symbols (central last if present)
    std::optional<Rational> lambda;
    /// The baseline closed form quotes the nominal pad budget K^2 L, which
    /// exceeds what the construction measurably consumes ((2K-1)L).
    bool cr_is_nominal = false;
};

/// Closed-form figures. lambda selects the time-shared composition of the
/// baseline and hybrid schemes. L is needed for symbol counts.
SchemeMetrics closed_form(const std::string& scheme, int K, int D, int L,
                          std::optional<Rational> lambda = std::nullopt);

/// R(lambda) = 1 / (K(1+lambda) + (1-lambda)).
Rational timeshare_rate(int K, Rational lambda);
/// l(lambda) = 1/(KD) + 2*lambda / (D(1-lambda)).
Rational timeshare_load_ratio(int K, int D, Rational lambda);
/// The rate/load trade-off R(l) for cross-checks against R(lambda).
Rational rate_from_load_ratio(int K, int D, Rational load_ratio);

/// Exact counts from a transcript: download symbols per server, rate,
/// dedicated/central load ratio, and pad symbols (distinct chunk keys times
/// their chunk width).
SchemeMetrics measure(const Transcript& t);

std::string metrics_csv_header();
std::string metrics_csv_row(const SchemeMetrics& m, const SystemConfig& cfg);

} // namespace dapac
