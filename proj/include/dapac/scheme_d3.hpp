#pragma once

#include "dapac/protocol.hpp"

namespace dapac {

/// K-message subset fixing two head coordinates; the retrieval unit of the
/// (N,3,K) scheme. 3K^2 subsets exist, one pad chunk each.
struct D3SubsetId {
    int pos_a = 0, pos_b = 0;   // 1-based head positions, pos_a < pos_b
    int val_a = 0, val_b = 0;   // fixed value indices

    auto operator<=>(const D3SubsetId&) const = default;
};

/// One of the 2K subset groups queried at a dedicated server.
struct D3DedicatedEntry {
    D3SubsetId id;
    std::vector<GroupMember> members; // snapshot as queried at this server
    int vstar_pos = -1;               // position of the designated key, -1 if absent
    bool reused = false;              // subset already appeared at an earlier server
};

/// One of the 3K groups queried at the central server, built from K blocks
/// of one subset each (pair {n, (n mod 3)+1}).
struct D3CentralEntry {
    int fix_pos = 0;  // n
    int fix_val = 0;  // k
    bool designated = false;
    std::vector<GroupMember> members;
    std::vector<D3SubsetId> block_ids;
    int vstar_block = -1;
    int vstar_pos_in_block = -1;
};

/// Sub-packet assignment tables: servers 1..3 processed in order, a subset
/// reappearing from an earlier server keeps every index except the designated
/// message's, which is drawn fresh; after server 3 the designated message has
/// consumed all 6 indices. Central groups replicate the designated snapshots
/// and draw fresh indices for everything else.
struct D3Assignment {
    std::vector<std::vector<D3DedicatedEntry>> dedicated; // [db-1], size 2K each
    std::vector<D3CentralEntry> central;                  // (n,k) ascending, 3K
};

D3Assignment d3_assign_subpackets(const SystemConfig& cfg, const AttributeVector& vstar,
                                  SubPacketPlan& plan);

/// Overlap-exploiting scheme for D=3: rate 2/(3K), load ratio 2/3, pad
/// budget K^2 L / 2. Every pair of dedicated servers shares one subset with
/// the central server, yielding two sub-packets per pair. Coefficients are reused verbatim for reappearing subsets; the
/// coordinate multiplying the designated sub-packet of a shared subset is
/// drawn nonzero so the decoding division is always defined.
BuiltQueries d3_build_queries(const SystemConfig& cfg, const AttributeVector& vstar,
                              SubPacketPlan& plan, Rng& coeff_rng,
                              uint32_t base_offset = 0, uint32_t span_len = 0);

/// Cyclic disjointness choice: position n partitions by pair {n, (n mod 3)+1}.
inline int d3_cycle_partner(int n) {
    return (n % 3) + 1;
}

constexpr uint32_t d3_packet_count = 6;

} // namespace dapac
