#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "dapac/field.hpp"

namespace dapac {

/// Deterministic 64-bit stream (splitmix64). Reproducible across platforms;
/// transcripts and audits depend on bit-identical replay, so std:: engines
/// (unspecified distributions) are not used anywhere.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Unbiased uniform draw in [0, n) by rejection.
    uint64_t below(uint64_t n) {
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }

    Fe element(FieldPrime f) { return Fe(uint32_t(below(f.q)), f); }

    /// Uniform draw from the q-1 nonzero elements.
    Fe nonzero_element(FieldPrime f) {
        if (f.q < 2) throw ConfigError("no nonzero elements");
        return Fe(uint32_t(1 + below(uint64_t(f.q) - 1)), f);
    }

    std::vector<Fe> elements(FieldPrime f, size_t n) {
        std::vector<Fe> out;
        out.reserve(n);
        for (size_t i = 0; i < n; ++i) out.push_back(element(f));
        return out;
    }

    /// Fisher-Yates permutation of 0..n-1.
    std::vector<uint32_t> permutation(uint32_t n) {
        std::vector<uint32_t> p(n);
        std::iota(p.begin(), p.end(), 0u);
        for (uint32_t i = n; i > 1; --i) std::swap(p[i - 1], p[below(i)]);
        return p;
    }

  private:
    uint64_t state_;
};

/// FNV-1a over the label, folded into the seed. Used to give every message,
/// pool chunk and user-randomness stream its own independent substream.
inline uint64_t derive_seed(uint64_t seed, std::string_view domain) {
    uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (unsigned char c : domain) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    // one splitmix scramble so nearby seeds do not share low-bit structure
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
}

inline Rng domain_rng(uint64_t seed, std::string_view domain) {
    return Rng(derive_seed(seed, domain));
}

} // namespace dapac
