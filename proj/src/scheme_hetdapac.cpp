#include "dapac/scheme_hetdapac.hpp"

namespace dapac {

BuiltQueries het_build_queries(const SystemConfig& cfg, const AttributeVector& vstar,
                               SubPacketPlan& plan, Rng& coeff_rng, uint32_t base_offset,
                               uint32_t span_len) {
    const int D = cfg.dedicated_count;
    const int K = cfg.alphabet_size;
    const int central = cfg.central_server();
    if (span_len == 0) span_len = uint32_t(cfg.msg_len);
    if (span_len % uint32_t(D) != 0)
        throw ConfigError("message span not divisible by D sub-packets");
    if (plan.packet_count() != uint32_t(D)) throw ConfigError("plan packet count mismatch");
    const uint32_t plen = span_len / uint32_t(D);

    auto views = build_views(cfg, vstar);
    const DatabaseView& central_view = views[central - 1];

    BuiltQueries out;
    out.queries.resize(central);
    out.info.per_server.resize(central);
    for (auto& q : out.queries) {
        q.scheme = SchemeTag::hetdapac;
        q.base_offset = base_offset;
        q.packet_len = plen;
    }

    // Central query: all value groups, position-major. Every accessible
    // message collects one fresh sub-packet index per position, so the
    // designated message's index in group (n, k*_n) is its n-th draw.
    ServerQuery& central_q = out.queries[central - 1];
    for (int n = 1; n <= D; ++n) {
        for (int k = 0; k < K; ++k) {
            QueryGroup g;
            for (const auto& v : central_view.keys)
                if (int(v.coords[n - 1]) == k) g.members.push_back({v, plan.fresh_raw(v)});
            g.coeffs = coeff_rng.elements(cfg.modulus, g.members.size());
            out.info.per_server[central - 1].push_back({int(g.members.size()), -1, -1});
            central_q.groups.push_back(std::move(g));
        }
    }

    // Dedicated server n: the (n, k*_n) descriptor verbatim with a unit
    // offset at the designated key's canonical position.
    for (int n = 1; n <= D; ++n) {
        int central_idx = (n - 1) * K + int(vstar.coords[n - 1]);
        QueryGroup g = central_q.groups[central_idx];
        size_t pos = 0;
        while (g.members[pos].key != vstar) ++pos;
        g.coeffs[pos] += fe_one(cfg.modulus);
        out.info.per_server[n - 1].push_back({int(g.members.size()), int(pos), -1});
        out.recipe.steps.push_back({RecoveryStep::Kind::OffsetDiff,
                                    {n, 0},
                                    {{central, central_idx}},
                                    g.members[pos].subpacket,
                                    0,
                                    std::nullopt});
        out.queries[n - 1].groups.push_back(std::move(g));
    }

    out.recipe.base_offset = base_offset;
    out.recipe.packet_len = plen;
    out.recipe.packet_count = uint32_t(D);
    return out;
}

} // namespace dapac
