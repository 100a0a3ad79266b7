#pragma once

#include "dapac/protocol.hpp"

namespace dapac {

/// Baseline (N,K) scheme: every attribute has its own dedicated server, no
/// central retrieval participant. Messages split into D(D-1)/2 sub-packets;
/// server n answers K(D-1) pair groups; each unordered server pair shares one
/// group whose higher-indexed copy carries a unit-vector offset, and the
/// difference of the pair's answers yields one designated sub-packet.
///
/// The same construction runs over the D dedicated servers of a larger
/// system during time-sharing, with the tail attributes pinned by central
/// verification; a standalone run requires D == N.
BuiltQueries dapac_build_queries(const SystemConfig& cfg, const AttributeVector& vstar,
                                 SubPacketPlan& plan, Rng& coeff_rng,
                                 uint32_t base_offset = 0, uint32_t span_len = 0);

/// Sub-packet count for the baseline over D dedicated positions.
inline uint32_t dapac_packet_count(int dedicated) {
    return uint32_t(dedicated) * (dedicated - 1) / 2;
}

} // namespace dapac
