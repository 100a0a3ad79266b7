#include "dapac/protocol.hpp"

#include <algorithm>
#include <sstream>

namespace dapac {

std::string scheme_name(SchemeTag t) {
    switch (t) {
        case SchemeTag::dapac: return "dapac";
        case SchemeTag::hetdapac: return "hetdapac";
        case SchemeTag::d3: return "d3";
    }
    throw ConfigError("bad scheme tag");
}

SchemeTag scheme_from_name(const std::string& name) {
    if (name == "dapac") return SchemeTag::dapac;
    if (name == "hetdapac") return SchemeTag::hetdapac;
    if (name == "d3") return SchemeTag::d3;
    throw ConfigError("unknown scheme: " + name);
}

std::string chunk_key(uint32_t base_offset, const std::vector<GroupMember>& block) {
    if (block.empty()) throw Error("empty pad block");
    size_t n = block[0].key.coords.size();
    std::string key = "o" + std::to_string(base_offset);
    for (size_t pos = 0; pos < n; ++pos) {
        uint16_t v = block[0].key.coords[pos];
        bool constant = true;
        for (const auto& m : block)
            if (m.key.coords[pos] != v) {
                constant = false;
                break;
            }
        if (constant) key += "|" + std::to_string(pos + 1) + "=" + std::to_string(v);
    }
    return key;
}

size_t pad_block_size(const SystemConfig& cfg, const ServerQuery& q, int server_id,
                      const QueryGroup& g) {
    if (q.scheme == SchemeTag::d3 && server_id == cfg.central_server())
        return size_t(cfg.alphabet_size);
    return g.members.size();
}

std::vector<std::string> group_chunk_keys(const SystemConfig& cfg, const ServerQuery& q,
                                          int server_id, const QueryGroup& g) {
    size_t block = pad_block_size(cfg, q, server_id, g);
    if (block == 0 || g.members.size() % block != 0)
        throw DecodeError("group size not a multiple of its pad block size");
    std::vector<std::string> keys;
    for (size_t at = 0; at < g.members.size(); at += block)
        keys.push_back(chunk_key(
            q.base_offset, std::vector<GroupMember>(g.members.begin() + at,
                                                    g.members.begin() + at + block)));
    return keys;
}

AnswerResult answer_query(const SystemConfig& cfg, const DatabaseView& view,
                          const MessageStore& store, const ServerQuery& query,
                          const PadSource& pool, int server_id) {
    AnswerResult res;
    uint32_t plen = query.packet_len;
    if (plen == 0) throw DecodeError("zero packet length");
    for (const auto& g : query.groups) {
        if (g.coeffs.size() != g.members.size())
            throw DimensionError("coefficient count does not match member count");
        std::vector<std::span<const Fe>> rows;
        rows.reserve(g.members.size());
        for (const auto& m : g.members) {
            if (!view.contains(m.key))
                throw AccessViolation("server " + std::to_string(server_id) +
                                      " refuses key " + m.key.index_key());
            const Message& msg = store.at(m.key);
            uint64_t start = uint64_t(query.base_offset) + uint64_t(m.subpacket) * plen;
            if (start + plen > msg.size())
                throw DecodeError("sub-packet out of range for " + m.key.index_key());
            rows.emplace_back(msg.data() + start, plen);
        }
        Answer ans = dot(std::span<const Fe>(g.coeffs.data(), g.coeffs.size()),
                         std::span<const std::span<const Fe>>(rows.data(), rows.size()));
        auto keys = group_chunk_keys(cfg, query, server_id, g);
        for (const auto& ck : keys) {
            auto pad = pool.chunk(ck, plen);
            for (uint32_t i = 0; i < plen; ++i) ans[i] += pad[i];
        }
        res.answers.push_back(std::move(ans));
        res.chunk_keys.push_back(std::move(keys));
    }
    return res;
}

std::vector<Fe> decode_span(const SystemConfig& cfg, const std::vector<ServerAnswer>& answers,
                            const DecodeRecipe& recipe) {
    uint32_t plen = recipe.packet_len;
    std::vector<Fe> span(size_t(recipe.packet_count) * plen, fe_zero(cfg.modulus));
    std::vector<bool> have(recipe.packet_count, false);

    auto answer_at = [&](std::pair<int, int> ref) -> const Answer& {
        auto [server, group] = ref;
        if (server < 1 || server > int(answers.size()))
            throw DecodeError("recipe references missing server " + std::to_string(server));
        const ServerAnswer& sa = answers[server - 1];
        if (group < 0 || group >= int(sa.size()))
            throw DecodeError("recipe references missing group");
        if (sa[group].size() != plen) throw DecodeError("answer width mismatch");
        return sa[group];
    };

    for (const auto& step : recipe.steps) {
        if (step.raw >= recipe.packet_count) throw DecodeError("raw index out of range");
        std::vector<Fe> value = answer_at(step.minuend);
        for (const auto& ref : step.subtrahends) {
            const Answer& sub = answer_at(ref);
            for (uint32_t i = 0; i < plen; ++i) value[i] -= sub[i];
        }
        if (step.kind == RecoveryStep::Kind::SharedDiff) {
            if (!step.coeff || step.coeff->value() == 0)
                throw DecodeError("shared coefficient is zero; cannot divide");
            if (step.base_raw >= recipe.packet_count || !have[step.base_raw])
                throw DecodeError("shared difference references unrecovered base packet");
            Fe inv = step.coeff->inv();
            for (uint32_t i = 0; i < plen; ++i)
                value[i] = span[size_t(step.base_raw) * plen + i] + value[i] * inv;
        }
        if (have[step.raw]) throw DecodeError("sub-packet recovered twice");
        have[step.raw] = true;
        std::copy(value.begin(), value.end(), span.begin() + size_t(step.raw) * plen);
    }
    for (uint32_t p = 0; p < recipe.packet_count; ++p)
        if (!have[p]) throw DecodeError("sub-packet " + std::to_string(p) + " not recovered");
    return span;
}

uint64_t ServerRecord::downloaded_symbols() const {
    uint64_t total = 0;
    for (const auto& ph : phases) total += ph.downloaded_symbols;
    return total;
}

static void hex_line(std::ostream& os, const char* label, const std::vector<uint8_t>& bytes) {
    static const char* digits = "0123456789abcdef";
    os << label;
    for (uint8_t b : bytes) {
        os << digits[b >> 4] << digits[b & 0xf];
    }
    os << "\n";
}

std::string Transcript::dump() const {
    std::ostringstream os;
    os << "# dapac transcript v1\n";
    os << "scheme: " << scheme << "\n";
    os << "config: " << config_json << "\n";
    os << "seed: " << seed << "\n";
    os << "vstar: " << vstar.index_key() << "\n";
    if (lambda) os << "lambda: " << lambda->str() << "\n";
    for (const auto& sr : servers) {
        os << "server: " << sr.server_id << "\n";
        hex_line(os, "  verify_req: ", sr.verify_req);
        hex_line(os, "  verify_resp: ", sr.verify_resp);
        for (const auto& r : sr.relays_sent) hex_line(os, "  relay_sent: ", r);
        if (!sr.relay_received.empty()) hex_line(os, "  relay_received: ", sr.relay_received);
        for (const auto& ph : sr.phases) {
            hex_line(os, "  query: ", ph.query_frame);
            hex_line(os, "  answer: ", ph.answer_frame);
            os << "  downloads: " << ph.downloaded_symbols << "\n";
            for (size_t g = 0; g < ph.chunk_keys.size(); ++g) {
                os << "  pads[" << g << "]:";
                for (const auto& ck : ph.chunk_keys[g]) os << " " << ck;
                os << "\n";
            }
        }
    }
    os << "decoded:";
    for (const auto& e : decoded) os << " " << e.value();
    os << "\n";
    os << "decode_ok: " << (decode_ok ? "true" : "false") << "\n";
    return os.str();
}

} // namespace dapac
