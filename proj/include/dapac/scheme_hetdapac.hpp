#pragma once

#include "dapac/protocol.hpp"

namespace dapac {

/// Hybrid (N,D,K) scheme: messages split into D sub-packets; the central
/// server answers all KD value groups, each dedicated server answers the one
/// group matching its verified attribute with an offset coefficient vector.
/// Subtracting the matching central answer from each dedicated answer yields
/// the D designated sub-packets. Rate 1/(K+1), load ratio 1/(KD).
BuiltQueries het_build_queries(const SystemConfig& cfg, const AttributeVector& vstar,
                               SubPacketPlan& plan, Rng& coeff_rng,
                               uint32_t base_offset = 0, uint32_t span_len = 0);

} // namespace dapac
