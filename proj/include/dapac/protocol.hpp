#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dapac/model.hpp"
#include "dapac/rational.hpp"

namespace dapac {

enum class SchemeTag : uint8_t {
    dapac = 1,
    hetdapac = 2,
    d3 = 3,
};

std::string scheme_name(SchemeTag t);
SchemeTag scheme_from_name(const std::string& name); // throws ConfigError

/// One requested sub-packet: message key plus raw (permuted) 0-based index.
struct GroupMember {
    AttributeVector key;
    uint32_t subpacket = 0;

    bool operator==(const GroupMember&) const = default;
};

/// Ordered sub-packet stack with the coefficient vector that combines it.
struct QueryGroup {
    std::vector<GroupMember> members;
    std::vector<Fe> coeffs;

    bool operator==(const QueryGroup&) const = default;
};

/// Everything one server receives in the retrieval phase. base_offset and
/// packet_len address the symbol span (time-sharing runs two spans).
struct ServerQuery {
    SchemeTag scheme = SchemeTag::dapac;
    uint32_t base_offset = 0;
    uint32_t packet_len = 0;
    std::vector<QueryGroup> groups;

    bool operator==(const ServerQuery&) const = default;
};

using Answer = std::vector<Fe>;       // packet_len symbols
using ServerAnswer = std::vector<Answer>;

/// Canonical pad chunk key for one member block: the coordinates constant
/// across the block plus the span offset. Identical blocks requested at two
/// servers therefore map to the same one-time pad.
std::string chunk_key(uint32_t base_offset, const std::vector<GroupMember>& block_members);

/// Pad block width for a group: the d3 central server pads each K-member
/// subset separately and sums; everyone else pads the whole group once.
size_t pad_block_size(const SystemConfig& cfg, const ServerQuery& q, int server_id,
                      const QueryGroup& g);

/// Chunk keys a server combines into the pad of one group's answer.
std::vector<std::string> group_chunk_keys(const SystemConfig& cfg, const ServerQuery& q,
                                          int server_id, const QueryGroup& g);

/// Server side of the retrieval phase: inner products over accessible
/// sub-packets plus pads. Throws AccessViolation if the query touches a key
/// outside the view.
struct AnswerResult {
    ServerAnswer answers;
    std::vector<std::vector<std::string>> chunk_keys; // per group
};
AnswerResult answer_query(const SystemConfig& cfg, const DatabaseView& view,
                          const MessageStore& store, const ServerQuery& query,
                          const PadSource& pool, int server_id);

/// One decoding move. OffsetDiff: minuend answer minus the subtrahend answers
/// equals a unit-vector pick of the designated sub-packet `raw`. SharedDiff:
/// the difference exposes coeff * (W[raw] - W[base_raw]) and base_raw is
/// already known, so divide and add.
struct RecoveryStep {
    enum class Kind { OffsetDiff, SharedDiff };
    Kind kind = Kind::OffsetDiff;
    std::pair<int, int> minuend;                  // (server id, group index)
    std::vector<std::pair<int, int>> subtrahends; // (server id, group index)
    uint32_t raw = 0;                             // recovered raw sub-packet
    uint32_t base_raw = 0;                        // SharedDiff only
    std::optional<Fe> coeff;                      // SharedDiff only
};

struct DecodeRecipe {
    uint32_t base_offset = 0;
    uint32_t packet_len = 0;
    uint32_t packet_count = 0;
    std::vector<RecoveryStep> steps;
};

/// Executes a recipe against per-server answers (index = server id - 1).
/// Returns the packet_count * packet_len symbols of the span, raw order.
/// Throws DecodeError on structural inconsistency or a zero shared
/// coefficient.
std::vector<Fe> decode_span(const SystemConfig& cfg, const std::vector<ServerAnswer>& answers,
                            const DecodeRecipe& recipe);

/// Audit-facing description of how one group's coefficient vector was drawn:
/// a fresh uniform vector of h_len symbols, optionally conditioned nonzero at
/// one coordinate, optionally shifted by a unit vector.
struct GroupAudit {
    int h_len = 0;
    int offset_pos = -1;
    int nonzero_pos = -1;
};

struct BuildInfo {
    std::vector<std::vector<GroupAudit>> per_server; // [server-1][group]
};

struct BuiltQueries {
    std::vector<ServerQuery> queries; // [server-1], size = participating servers
    DecodeRecipe recipe;
    BuildInfo info;
};

/// Per-server slice of a protocol run, frames included so that service-mode
/// and in-process transcripts can be compared byte for byte.
struct PhaseRecord {
    std::vector<uint8_t> query_frame;
    std::vector<uint8_t> answer_frame;
    std::vector<std::vector<std::string>> chunk_keys;
    uint32_t packet_len = 0;
    uint64_t downloaded_symbols = 0;

    bool operator==(const PhaseRecord&) const = default;
};

struct ServerRecord {
    int server_id = 0;
    std::vector<uint8_t> verify_req;
    std::vector<uint8_t> verify_resp;
    std::vector<std::vector<uint8_t>> relays_sent; // central only
    std::vector<uint8_t> relay_received;           // dedicated only
    std::vector<PhaseRecord> phases;

    uint64_t downloaded_symbols() const;

    bool operator==(const ServerRecord&) const = default;
};

struct Transcript {
    std::string scheme; // dapac | hetdapac | d3 | timeshare
    std::string config_json;
    uint64_t seed = 0;
    AttributeVector vstar;
    std::optional<Rational> lambda;
    std::vector<ServerRecord> servers;
    std::vector<Fe> decoded;
    bool decode_ok = false;

    bool operator==(const Transcript&) const = default;

    /// Documented structured-text dump (config, seeds, per-frame hex).
    std::string dump() const;
};

} // namespace dapac
