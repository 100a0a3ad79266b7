#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dapac/field.hpp"
#include "dapac/rng.hpp"

namespace dapac {

/// User identity: one 0-based index into each attribute alphabet.
struct AttributeVector {
    std::vector<uint16_t> coords;

    auto operator<=>(const AttributeVector&) const = default;

    /// Compact canonical form, e.g. "0.1.0" — used in seed domains and keys.
    std::string index_key() const;
};

struct SystemConfig {
    int attr_count = 0;       // N
    int dedicated_count = 0;  // D, 1 <= D <= N
    int alphabet_size = 0;    // K
    FieldPrime modulus;       // q
    int msg_len = 0;          // L
    std::vector<std::vector<std::string>> alphabets; // N lists of K labels
    uint64_t seed = 0;

    SystemConfig() : modulus(2) {}

    void validate() const;

    int central_server() const { return dedicated_count + 1; }
    int tail_count() const { return attr_count - dedicated_count; }

    bool valid_vector(const AttributeVector& v) const;
    std::string label_of(const AttributeVector& v) const;          // "a,2,y"
    AttributeVector parse_labels(const std::string& csv) const;    // inverse

    uint64_t msg_seed() const { return derive_seed(seed, "msg"); }
    uint64_t pool_seed() const { return derive_seed(seed, "pool"); }
    uint64_t user_seed() const { return derive_seed(seed, "user"); }

    std::string to_json() const;
    static SystemConfig from_json(const std::string& text);
};

/// All K^N attribute vectors in canonical (lexicographic index) order.
std::vector<AttributeVector> all_vectors(const SystemConfig& cfg);

/// Lexicographic order on attribute index tuples. The same order is derived
/// independently at user and servers; coefficient offsets index into it.
std::vector<AttributeVector> canonical_order(std::vector<AttributeVector> keys);

using Message = std::vector<Fe>;

struct MessageStore {
    std::map<AttributeVector, Message> msgs;

    static MessageStore generate(const SystemConfig& cfg);

    const Message& at(const AttributeVector& v) const;
};

struct DatabaseView {
    int server_id = 0;                    // 1..D+1
    std::vector<AttributeVector> keys;    // canonical order

    bool contains(const AttributeVector& v) const;
};

/// D dedicated views (fix v_n = v*_n plus the verified tail) and the central
/// view (fix the tail only).
std::vector<DatabaseView> build_views(const SystemConfig& cfg, const AttributeVector& vstar);

/// Answer pads. Chunks are derived on demand from the shared pool seed and a
/// canonical chunk key, so every server instance regenerates identical pads.
struct PadSource {
    virtual std::vector<Fe> chunk(const std::string& key, size_t len) const = 0;
    virtual ~PadSource() = default;
};

struct RandomnessPool : PadSource {
    uint64_t seed = 0;
    FieldPrime q;

    RandomnessPool(uint64_t pool_seed, FieldPrime field) : seed(pool_seed), q(field) {}

    std::vector<Fe> chunk(const std::string& key, size_t len) const override;
};

/// Per-message private permutations plus the next-unused-index cursors that
/// drive sub-packet assignment during query construction.
class SubPacketPlan {
  public:
    SubPacketPlan(const std::vector<AttributeVector>& universe, uint32_t packet_count,
                  uint64_t user_seed, bool identity_perms = false);

    uint32_t packet_count() const { return packet_count_; }

    /// Next unused permuted index for message v (0-based raw sub-packet).
    uint32_t fresh_raw(const AttributeVector& v);

    uint32_t used(const AttributeVector& v) const;

  private:
    struct Entry {
        std::vector<uint32_t> perm;
        uint32_t cursor = 0;
    };
    std::map<AttributeVector, Entry> entries_;
    uint32_t packet_count_;
};

using Registry = std::map<std::string, AttributeVector>;

struct VerificationOutcome {
    std::vector<int> accepted;                                  // server ids, 1..D+1
    std::vector<std::pair<uint16_t, uint16_t>> relayed;         // tail (position, value)
    std::vector<std::vector<std::pair<uint16_t, uint16_t>>> knowledge; // per server 1..D+1
};

/// Registry-backed stand-in for credential verification. Dedicated server n
/// sees position n only; the central server sees and relays the tail.
/// Throws VerificationFailed naming the first server whose check fails.
VerificationOutcome verify_attributes(const SystemConfig& cfg, const AttributeVector& asserted,
                                      const Registry& registry, const std::string& user);

} // namespace dapac
