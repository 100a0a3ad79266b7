#include "dapac/scheme_d3.hpp"

#include <algorithm>
#include <map>

namespace dapac {

namespace {

D3SubsetId make_id(int pos_x, int val_x, int pos_y, int val_y) {
    if (pos_x > pos_y) {
        std::swap(pos_x, pos_y);
        std::swap(val_x, val_y);
    }
    return {pos_x, pos_y, val_x, val_y};
}

int free_position(const D3SubsetId& id) {
    for (int p = 1; p <= 3; ++p)
        if (p != id.pos_a && p != id.pos_b) return p;
    throw Error("bad subset id");
}

/// The K subset members in canonical order (free head coordinate ascending,
/// tail pinned to v*).
std::vector<AttributeVector> subset_keys(const SystemConfig& cfg, const AttributeVector& vstar,
                                         const D3SubsetId& id) {
    int f = free_position(id);
    std::vector<AttributeVector> keys;
    for (int j = 0; j < cfg.alphabet_size; ++j) {
        AttributeVector v = vstar;
        v.coords[id.pos_a - 1] = uint16_t(id.val_a);
        v.coords[id.pos_b - 1] = uint16_t(id.val_b);
        v.coords[f - 1] = uint16_t(j);
        keys.push_back(std::move(v));
    }
    return keys;
}

} // namespace

D3Assignment d3_assign_subpackets(const SystemConfig& cfg, const AttributeVector& vstar,
                                  SubPacketPlan& plan) {
    const int K = cfg.alphabet_size;
    if (cfg.dedicated_count != 3) throw ConfigError("this scheme is defined for D = 3 only");
    if (plan.packet_count() != d3_packet_count) throw ConfigError("plan packet count mismatch");

    D3Assignment out;
    out.dedicated.resize(3);

    // current descriptor per subset; updated when the designated index is
    // refreshed on reappearance
    std::map<D3SubsetId, std::vector<GroupMember>> current;

    for (int n = 1; n <= 3; ++n) {
        std::vector<int> others;
        for (int p = 1; p <= 3; ++p)
            if (p != n) others.push_back(p);
        for (int partner : others) {
            for (int k = 0; k < K; ++k) {
                D3SubsetId id = make_id(n, vstar.coords[n - 1], partner, k);
                D3DedicatedEntry entry;
                entry.id = id;
                auto it = current.find(id);
                if (it != current.end()) {
                    entry.members = it->second;
                    entry.reused = true;
                    for (size_t i = 0; i < entry.members.size(); ++i)
                        if (entry.members[i].key == vstar) {
                            entry.members[i].subpacket = plan.fresh_raw(vstar);
                            entry.vstar_pos = int(i);
                        }
                    it->second = entry.members;
                } else {
                    for (auto& key : subset_keys(cfg, vstar, id)) {
                        if (key == vstar) entry.vstar_pos = int(entry.members.size());
                        entry.members.push_back({key, plan.fresh_raw(key)});
                    }
                    current.emplace(id, entry.members);
                }
                out.dedicated[n - 1].push_back(std::move(entry));
            }
        }
    }

    // central server: groups (n,k) ascending, partitioned by the cycle pair
    for (int n = 1; n <= 3; ++n) {
        int partner = d3_cycle_partner(n);
        for (int k = 0; k < K; ++k) {
            D3CentralEntry entry;
            entry.fix_pos = n;
            entry.fix_val = k;
            entry.designated = (k == int(vstar.coords[n - 1]));
            for (int j = 0; j < K; ++j) {
                D3SubsetId id = make_id(n, k, partner, j);
                entry.block_ids.push_back(id);
                if (entry.designated) {
                    // replicate the snapshot queried at server n
                    const D3DedicatedEntry* snap = nullptr;
                    for (const auto& e : out.dedicated[n - 1])
                        if (e.id == id) snap = &e;
                    if (!snap) throw Error("designated block not found at its server");
                    if (snap->vstar_pos >= 0) {
                        entry.vstar_block = j;
                        entry.vstar_pos_in_block = snap->vstar_pos;
                    }
                    entry.members.insert(entry.members.end(), snap->members.begin(),
                                         snap->members.end());
                } else {
                    for (auto& key : subset_keys(cfg, vstar, id))
                        entry.members.push_back({key, plan.fresh_raw(key)});
                }
            }
            out.central.push_back(std::move(entry));
        }
    }
    return out;
}

BuiltQueries d3_build_queries(const SystemConfig& cfg, const AttributeVector& vstar,
                              SubPacketPlan& plan, Rng& coeff_rng, uint32_t base_offset,
                              uint32_t span_len) {
    const int K = cfg.alphabet_size;
    const int central = cfg.central_server();
    if (cfg.dedicated_count != 3) throw ConfigError("this scheme is defined for D = 3 only");
    if (span_len == 0) span_len = uint32_t(cfg.msg_len);
    if (span_len % d3_packet_count != 0)
        throw ConfigError("message span not divisible by 6 sub-packets");
    const uint32_t plen = span_len / d3_packet_count;

    D3Assignment asg = d3_assign_subpackets(cfg, vstar, plan);

    BuiltQueries out;
    out.queries.resize(central);
    out.info.per_server.resize(central);
    for (auto& q : out.queries) {
        q.scheme = SchemeTag::d3;
        q.base_offset = base_offset;
        q.packet_len = plen;
    }

    // one coefficient vector per subset, drawn at first appearance; the
    // coordinate at the designated position is conditioned nonzero so the
    // shared-difference decode can divide by it
    std::map<D3SubsetId, std::vector<Fe>> subset_coeffs;
    for (int n = 1; n <= 3; ++n) {
        ServerQuery& q = out.queries[n - 1];
        for (const auto& entry : asg.dedicated[n - 1]) {
            auto it = subset_coeffs.find(entry.id);
            if (it == subset_coeffs.end()) {
                std::vector<Fe> h;
                for (size_t i = 0; i < entry.members.size(); ++i)
                    h.push_back(int(i) == entry.vstar_pos
                                    ? coeff_rng.nonzero_element(cfg.modulus)
                                    : coeff_rng.element(cfg.modulus));
                it = subset_coeffs.emplace(entry.id, std::move(h)).first;
            }
            out.info.per_server[n - 1].push_back(
                {int(entry.members.size()), -1, entry.vstar_pos});
            q.groups.push_back({entry.members, it->second});
        }
    }

    ServerQuery& central_q = out.queries[central - 1];
    for (const auto& entry : asg.central) {
        QueryGroup g;
        g.members = entry.members;
        if (entry.designated) {
            for (const auto& id : entry.block_ids) {
                const auto& h = subset_coeffs.at(id);
                g.coeffs.insert(g.coeffs.end(), h.begin(), h.end());
            }
            int off = entry.vstar_block * K + entry.vstar_pos_in_block;
            g.coeffs[off] += fe_one(cfg.modulus);
            out.info.per_server[central - 1].push_back({int(g.members.size()), off, off});
        } else {
            g.coeffs = coeff_rng.elements(cfg.modulus, g.members.size());
            out.info.per_server[central - 1].push_back({int(g.members.size()), -1, -1});
        }
        central_q.groups.push_back(std::move(g));
    }

    // group index of a subset at a dedicated server
    auto group_index_at = [&](int db, const D3SubsetId& id) {
        for (size_t i = 0; i < asg.dedicated[db - 1].size(); ++i)
            if (asg.dedicated[db - 1][i].id == id) return int(i);
        throw Error("subset not queried at server " + std::to_string(db));
    };

    // first family: central designated group minus the sum of the matching
    // server-n groups isolates one designated sub-packet
    for (size_t ci = 0; ci < asg.central.size(); ++ci) {
        const auto& entry = asg.central[ci];
        if (!entry.designated) continue;
        int n = entry.fix_pos;
        RecoveryStep step;
        step.kind = RecoveryStep::Kind::OffsetDiff;
        step.minuend = {central, int(ci)};
        for (const auto& id : entry.block_ids)
            step.subtrahends.push_back({n, group_index_at(n, id)});
        step.raw = entry.members[entry.vstar_block * K + entry.vstar_pos_in_block].subpacket;
        out.recipe.steps.push_back(std::move(step));
    }

    // second family: the two copies of each shared subset differ only in the
    // designated index; their answers' difference divided by the shared
    // coefficient converts the known sub-packet into the unknown one
    for (int a = 1; a <= 3; ++a) {
        for (int b = a + 1; b <= 3; ++b) {
            D3SubsetId id = make_id(a, vstar.coords[a - 1], b, vstar.coords[b - 1]);
            int r = 0; // server whose snapshot family one recovered
            for (int n = 1; n <= 3; ++n)
                if (std::minmax(n, d3_cycle_partner(n)) == std::minmax(a, b)) r = n;
            int o = (r == a) ? b : a;
            int gr = group_index_at(r, id);
            int go = group_index_at(o, id);
            const auto& entry_r = asg.dedicated[r - 1][gr];
            const auto& entry_o = asg.dedicated[o - 1][go];
            RecoveryStep step;
            step.kind = RecoveryStep::Kind::SharedDiff;
            step.minuend = {o, go};
            step.subtrahends = {{r, gr}};
            step.raw = entry_o.members[entry_o.vstar_pos].subpacket;
            step.base_raw = entry_r.members[entry_r.vstar_pos].subpacket;
            step.coeff = subset_coeffs.at(id)[entry_o.vstar_pos];
            out.recipe.steps.push_back(std::move(step));
        }
    }

    out.recipe.base_offset = base_offset;
    out.recipe.packet_len = plen;
    out.recipe.packet_count = d3_packet_count;
    return out;
}

} // namespace dapac
