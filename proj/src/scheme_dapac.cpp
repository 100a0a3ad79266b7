#include "dapac/scheme_dapac.hpp"

#include <map>

namespace dapac {

namespace {

struct SharedDescriptor {
    QueryGroup group;        // members with raw indices, coeffs = fresh h
    int server = 0;          // lower-indexed owner
    int group_index = 0;
    size_t vstar_pos = 0;    // canonical position of the designated key
};

} // namespace

BuiltQueries dapac_build_queries(const SystemConfig& cfg, const AttributeVector& vstar,
                                 SubPacketPlan& plan, Rng& coeff_rng, uint32_t base_offset,
                                 uint32_t span_len) {
    const int D = cfg.dedicated_count;
    const int K = cfg.alphabet_size;
    if (D < 2) throw ConfigError("baseline scheme needs at least 2 dedicated servers");
    if (span_len == 0) span_len = uint32_t(cfg.msg_len);
    const uint32_t packets = dapac_packet_count(D);
    if (span_len % packets != 0)
        throw ConfigError("message span " + std::to_string(span_len) +
                          " not divisible by " + std::to_string(packets) + " sub-packets");
    if (plan.packet_count() != packets) throw ConfigError("plan packet count mismatch");
    const uint32_t plen = span_len / packets;

    auto views = build_views(cfg, vstar);

    BuiltQueries out;
    out.queries.resize(D);
    out.info.per_server.resize(D);
    for (auto& q : out.queries) {
        q.scheme = SchemeTag::dapac;
        q.base_offset = base_offset;
        q.packet_len = plen;
    }

    // Shared group of pair {n,m}: the one fixing both coordinates to v*.
    // Created when the lower server is processed, reused at the higher one.
    std::map<std::pair<int, int>, SharedDescriptor> shared;

    for (int n = 1; n <= D; ++n) {
        ServerQuery& query = out.queries[n - 1];
        for (int m = 1; m <= D; ++m) {
            if (m == n) continue;
            for (int k = 0; k < K; ++k) {
                bool is_shared = (k == vstar.coords[m - 1]);
                auto pair_id = std::minmax(n, m);
                if (is_shared && n > m) {
                    // higher side: identical descriptor, offset coefficients
                    const SharedDescriptor& d = shared.at(pair_id);
                    QueryGroup g = d.group;
                    g.coeffs[d.vstar_pos] += fe_one(cfg.modulus);
                    out.info.per_server[n - 1].push_back(
                        {int(g.members.size()), int(d.vstar_pos), -1});
                    out.recipe.steps.push_back(
                        {RecoveryStep::Kind::OffsetDiff,
                         {n, int(query.groups.size())},
                         {{d.server, d.group_index}},
                         d.group.members[d.vstar_pos].subpacket,
                         0,
                         std::nullopt});
                    query.groups.push_back(std::move(g));
                    continue;
                }
                QueryGroup g;
                for (const auto& v : views[n - 1].keys)
                    if (v.coords[m - 1] == k)
                        g.members.push_back({v, plan.fresh_raw(v)});
                g.coeffs = coeff_rng.elements(cfg.modulus, g.members.size());
                out.info.per_server[n - 1].push_back({int(g.members.size()), -1, -1});
                if (is_shared) {
                    size_t pos = 0;
                    while (g.members[pos].key != vstar) ++pos;
                    shared[pair_id] = {g, n, int(query.groups.size()), pos};
                }
                query.groups.push_back(std::move(g));
            }
        }
    }

    out.recipe.base_offset = base_offset;
    out.recipe.packet_len = plen;
    out.recipe.packet_count = packets;
    return out;
}

} // namespace dapac
