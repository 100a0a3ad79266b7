#pragma once

#include <functional>
#include <optional>

#include "dapac/protocol.hpp"

namespace dapac {

/// Test hook: add delta to one answer symbol before it reaches the decoder.
struct CorruptAnswer {
    int server = 0;  // 1-based
    int group = 0;
    int symbol = 0;
    uint32_t delta = 1;
};

struct RunOptions {
    bool identity_perms = false;
    std::optional<CorruptAnswer> corrupt;
    std::string user = "user";
    /// Default: honest user (registry entry equals vstar). Override to model
    /// a user asserting attributes the registry contradicts.
    std::optional<AttributeVector> registry_truth;
};

struct RunResult {
    Transcript transcript;
    VerificationOutcome outcome;
    std::vector<Fe> decoded;
    bool decode_matches_store = false;
};

/// Composition weight for time-sharing: the baseline handles the first
/// lambda*L symbols of every message, the hybrid the rest.
struct TimeShare {
    Rational lambda;
};

/// Runs a full protocol session in process: verification, query build,
/// per-server answers, decode, all frames synthesized through the wire codec
/// so the transcript is byte-comparable with a socket session.
/// scheme: dapac | hetdapac | d3 | timeshare (timeshare requires `share`).
RunResult run_scheme(const SystemConfig& cfg, const std::string& scheme,
                     const AttributeVector& vstar, uint64_t seed,
                     const RunOptions& opts = {},
                     std::optional<TimeShare> share = std::nullopt);

/// Query construction entry point used by the query/message-independence
/// audit: returns the per-server QUERY frames a run with this seed would
/// send. The store parameter exists so an auditor can prove the bytes do not
/// depend on it; the real builders never read it.
std::vector<std::vector<uint8_t>> build_query_frames(const SystemConfig& cfg,
                                                     const std::string& scheme,
                                                     const AttributeVector& vstar, uint64_t seed,
                                                     const MessageStore& store,
                                                     std::optional<TimeShare> share = std::nullopt);

/// Scheme-appropriate sub-packet count; ConfigError for unknown names.
uint32_t packet_count_for(const SystemConfig& cfg, const std::string& scheme);

BuiltQueries build_for(const SystemConfig& cfg, const std::string& scheme,
                       const AttributeVector& vstar, SubPacketPlan& plan, Rng& rng,
                       uint32_t base_offset = 0, uint32_t span_len = 0);

} // namespace dapac
