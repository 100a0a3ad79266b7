#include "dapac/wire.hpp"

namespace dapac::wire {

namespace {

struct Writer {
    std::vector<uint8_t> out;

    void u8(uint8_t v) { out.push_back(v); }
    void u16(uint16_t v) {
        out.push_back(uint8_t(v >> 8));
        out.push_back(uint8_t(v));
    }
    void u32(uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) out.push_back(uint8_t(v >> s));
    }
    void u64(uint64_t v) {
        for (int s = 56; s >= 0; s -= 8) out.push_back(uint8_t(v >> s));
    }
    void str(const std::string& s) {
        u32(uint32_t(s.size()));
        out.insert(out.end(), s.begin(), s.end());
    }
    void bytes(const std::vector<uint8_t>& b) {
        u32(uint32_t(b.size()));
        out.insert(out.end(), b.begin(), b.end());
    }
};

struct Reader {
    std::span<const uint8_t> in;
    size_t at = 0;

    void need(size_t n) const {
        if (at + n > in.size()) throw FrameError("truncated payload");
    }
    uint8_t u8() {
        need(1);
        return in[at++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = uint16_t(in[at]) << 8 | in[at + 1];
        at += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | in[at + i];
        at += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | in[at + i];
        at += 8;
        return v;
    }
    std::string str() {
        uint32_t n = u32();
        need(n);
        std::string s(in.begin() + at, in.begin() + at + n);
        at += n;
        return s;
    }
    std::vector<uint8_t> bytes() {
        uint32_t n = u32();
        need(n);
        std::vector<uint8_t> b(in.begin() + at, in.begin() + at + n);
        at += n;
        return b;
    }
    void done() const {
        if (at != in.size()) throw FrameError("trailing bytes in payload");
    }
};

void put_vector(Writer& w, const AttributeVector& v) {
    w.u32(uint32_t(v.coords.size()));
    for (auto c : v.coords) w.u16(c);
}

AttributeVector get_vector(Reader& r) {
    AttributeVector v;
    uint32_t n = r.u32();
    if (n > 1024) throw FrameError("absurd attribute count");
    for (uint32_t i = 0; i < n; ++i) v.coords.push_back(r.u16());
    return v;
}

AttributeVector get_vector_checked(Reader& r, const SystemConfig& cfg) {
    AttributeVector v = get_vector(r);
    if (!cfg.valid_vector(v)) throw FrameError("attribute vector out of range");
    return v;
}

void put_elements(Writer& w, const std::vector<Fe>& es) {
    w.u32(uint32_t(es.size()));
    for (const auto& e : es) w.u16(e.value());
}

std::vector<Fe> get_elements(Reader& r, FieldPrime q) {
    uint32_t n = r.u32();
    std::vector<Fe> es;
    es.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
        uint16_t v = r.u16();
        if (v >= q.q) throw FrameError("field element out of range");
        es.emplace_back(v, q);
    }
    return es;
}

} // namespace

std::vector<uint8_t> encode_frame(const Frame& f) {
    Writer w;
    w.u32(uint32_t(f.payload.size() + 1));
    w.u8(f.tag);
    w.out.insert(w.out.end(), f.payload.begin(), f.payload.end());
    return w.out;
}

Frame decode_frame(std::span<const uint8_t> bytes) {
    Reader r{bytes};
    uint32_t len = r.u32();
    if (len < 1) throw FrameError("frame length below tag size");
    if (bytes.size() != size_t(len) + 4) throw FrameError("frame length mismatch");
    Frame f;
    f.tag = r.u8();
    f.payload.assign(bytes.begin() + 5, bytes.end());
    return f;
}

std::vector<uint8_t> encode_verify_request(const VerifyRequest& req) {
    Writer w;
    w.u8(req.version);
    w.str(req.user);
    w.u32(uint32_t(req.asserted.size()));
    for (auto [pos, val] : req.asserted) {
        w.u16(pos);
        w.u16(val);
    }
    return w.out;
}

VerifyRequest decode_verify_request(std::span<const uint8_t> payload) {
    Reader r{payload};
    VerifyRequest req;
    req.version = r.u8();
    if (req.version != PROTOCOL_VERSION)
        throw VersionError("protocol version " + std::to_string(req.version) +
                           " != " + std::to_string(PROTOCOL_VERSION));
    req.user = r.str();
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        uint16_t pos = r.u16();
        uint16_t val = r.u16();
        req.asserted.emplace_back(pos, val);
    }
    r.done();
    return req;
}

std::vector<uint8_t> encode_relay(const std::vector<std::pair<uint16_t, uint16_t>>& tail) {
    Writer w;
    w.u32(uint32_t(tail.size()));
    for (auto [pos, val] : tail) {
        w.u16(pos);
        w.u16(val);
    }
    return w.out;
}

std::vector<std::pair<uint16_t, uint16_t>> decode_relay(std::span<const uint8_t> payload) {
    Reader r{payload};
    std::vector<std::pair<uint16_t, uint16_t>> tail;
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        uint16_t pos = r.u16();
        uint16_t val = r.u16();
        tail.emplace_back(pos, val);
    }
    r.done();
    return tail;
}

std::vector<uint8_t> encode_query(const ServerQuery& q) {
    Writer w;
    w.u8(uint8_t(q.scheme));
    w.u32(q.base_offset);
    w.u32(q.packet_len);
    w.u32(uint32_t(q.groups.size()));
    for (const auto& g : q.groups) {
        w.u32(uint32_t(g.members.size()));
        for (const auto& m : g.members) {
            put_vector(w, m.key);
            w.u32(m.subpacket);
        }
        put_elements(w, g.coeffs);
    }
    return w.out;
}

ServerQuery decode_query(std::span<const uint8_t> payload, const SystemConfig& cfg) {
    Reader r{payload};
    ServerQuery q;
    uint8_t tag = r.u8();
    if (tag < 1 || tag > 3) throw FrameError("unknown scheme tag");
    q.scheme = SchemeTag(tag);
    q.base_offset = r.u32();
    q.packet_len = r.u32();
    uint32_t ngroups = r.u32();
    for (uint32_t i = 0; i < ngroups; ++i) {
        QueryGroup g;
        uint32_t nmembers = r.u32();
        for (uint32_t j = 0; j < nmembers; ++j) {
            GroupMember m;
            m.key = get_vector_checked(r, cfg);
            m.subpacket = r.u32();
            g.members.push_back(std::move(m));
        }
        g.coeffs = get_elements(r, cfg.modulus);
        q.groups.push_back(std::move(g));
    }
    r.done();
    return q;
}

std::vector<uint8_t> encode_answer(const ServerAnswer& a) {
    Writer w;
    w.u32(uint32_t(a.size()));
    for (const auto& ans : a) put_elements(w, ans);
    return w.out;
}

ServerAnswer decode_answer(std::span<const uint8_t> payload, FieldPrime q) {
    Reader r{payload};
    ServerAnswer a;
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) a.push_back(get_elements(r, q));
    r.done();
    return a;
}

std::vector<uint8_t> encode_error(uint32_t code, const std::string& message) {
    Writer w;
    w.u32(code);
    w.str(message);
    return w.out;
}

std::pair<uint32_t, std::string> decode_error(std::span<const uint8_t> payload) {
    Reader r{payload};
    uint32_t code = r.u32();
    std::string msg = r.str();
    r.done();
    return {code, msg};
}

std::vector<uint8_t> encode_outcome(const VerificationOutcome& o) {
    Writer w;
    w.u32(uint32_t(o.accepted.size()));
    for (int s : o.accepted) w.u32(uint32_t(s));
    w.u32(uint32_t(o.relayed.size()));
    for (auto [pos, val] : o.relayed) {
        w.u16(pos);
        w.u16(val);
    }
    w.u32(uint32_t(o.knowledge.size()));
    for (const auto& ks : o.knowledge) {
        w.u32(uint32_t(ks.size()));
        for (auto [pos, val] : ks) {
            w.u16(pos);
            w.u16(val);
        }
    }
    return w.out;
}

VerificationOutcome decode_outcome(std::span<const uint8_t> payload) {
    Reader r{payload};
    VerificationOutcome o;
    uint32_t na = r.u32();
    for (uint32_t i = 0; i < na; ++i) o.accepted.push_back(int(r.u32()));
    uint32_t nr = r.u32();
    for (uint32_t i = 0; i < nr; ++i) {
        uint16_t pos = r.u16();
        uint16_t val = r.u16();
        o.relayed.emplace_back(pos, val);
    }
    uint32_t nk = r.u32();
    for (uint32_t i = 0; i < nk; ++i) {
        std::vector<std::pair<uint16_t, uint16_t>> ks;
        uint32_t n = r.u32();
        for (uint32_t j = 0; j < n; ++j) {
            uint16_t pos = r.u16();
            uint16_t val = r.u16();
            ks.emplace_back(pos, val);
        }
        o.knowledge.push_back(std::move(ks));
    }
    r.done();
    return o;
}

std::vector<uint8_t> encode_transcript(const Transcript& t) {
    Writer w;
    w.str("DPTR1");
    w.str(t.scheme);
    w.str(t.config_json);
    w.u64(t.seed);
    put_vector(w, t.vstar);
    w.u8(t.lambda ? 1 : 0);
    if (t.lambda) {
        w.u64(uint64_t(t.lambda->num()));
        w.u64(uint64_t(t.lambda->den()));
    }
    w.u32(uint32_t(t.servers.size()));
    for (const auto& sr : t.servers) {
        w.u32(uint32_t(sr.server_id));
        w.bytes(sr.verify_req);
        w.bytes(sr.verify_resp);
        w.u32(uint32_t(sr.relays_sent.size()));
        for (const auto& rl : sr.relays_sent) w.bytes(rl);
        w.bytes(sr.relay_received);
        w.u32(uint32_t(sr.phases.size()));
        for (const auto& ph : sr.phases) {
            w.bytes(ph.query_frame);
            w.bytes(ph.answer_frame);
            w.u32(ph.packet_len);
            w.u64(ph.downloaded_symbols);
            w.u32(uint32_t(ph.chunk_keys.size()));
            for (const auto& ks : ph.chunk_keys) {
                w.u32(uint32_t(ks.size()));
                for (const auto& k : ks) w.str(k);
            }
        }
    }
    put_elements(w, t.decoded);
    w.u8(t.decode_ok ? 1 : 0);
    return w.out;
}

Transcript decode_transcript(std::span<const uint8_t> bytes, const SystemConfig& cfg) {
    Reader r{bytes};
    if (r.str() != "DPTR1") throw FrameError("bad transcript magic");
    Transcript t;
    t.scheme = r.str();
    t.config_json = r.str();
    t.seed = r.u64();
    t.vstar = get_vector_checked(r, cfg);
    if (r.u8()) {
        int64_t num = int64_t(r.u64());
        int64_t den = int64_t(r.u64());
        t.lambda = Rational(num, den);
    }
    uint32_t ns = r.u32();
    for (uint32_t i = 0; i < ns; ++i) {
        ServerRecord sr;
        sr.server_id = int(r.u32());
        sr.verify_req = r.bytes();
        sr.verify_resp = r.bytes();
        uint32_t nrelay = r.u32();
        for (uint32_t j = 0; j < nrelay; ++j) sr.relays_sent.push_back(r.bytes());
        sr.relay_received = r.bytes();
        uint32_t nph = r.u32();
        for (uint32_t j = 0; j < nph; ++j) {
            PhaseRecord ph;
            ph.query_frame = r.bytes();
            ph.answer_frame = r.bytes();
            ph.packet_len = r.u32();
            ph.downloaded_symbols = r.u64();
            uint32_t ng = r.u32();
            for (uint32_t g = 0; g < ng; ++g) {
                std::vector<std::string> ks;
                uint32_t nk = r.u32();
                for (uint32_t k = 0; k < nk; ++k) ks.push_back(r.str());
                ph.chunk_keys.push_back(std::move(ks));
            }
            sr.phases.push_back(std::move(ph));
        }
        t.servers.push_back(std::move(sr));
    }
    t.decoded = get_elements(r, cfg.modulus);
    t.decode_ok = r.u8() != 0;
    r.done();
    return t;
}

std::vector<uint8_t> query_frame(const ServerQuery& q) {
    return encode_frame({QUERY, encode_query(q)});
}

std::vector<uint8_t> answer_frame(const ServerAnswer& a) {
    return encode_frame({ANSWER, encode_answer(a)});
}

} // namespace dapac::wire
