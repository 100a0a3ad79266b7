#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dapac/sim.hpp"
#include "dapac/wire.hpp"
#include "test_helpers.hpp"

using namespace dapac;
using namespace dapac::testing;

namespace {

ServerQuery random_query(const SystemConfig& cfg, Rng& rng) {
    ServerQuery q;
    q.scheme = SchemeTag(1 + rng.below(3));
    q.base_offset = uint32_t(rng.below(4));
    q.packet_len = uint32_t(1 + rng.below(4));
    size_t groups = rng.below(4);
    for (size_t g = 0; g < groups; ++g) {
        QueryGroup grp;
        size_t members = 1 + rng.below(4);
        for (size_t m = 0; m < members; ++m) {
            AttributeVector v;
            for (int n = 0; n < cfg.attr_count; ++n)
                v.coords.push_back(uint16_t(rng.below(cfg.alphabet_size)));
            grp.members.push_back({v, uint32_t(rng.below(6))});
        }
        grp.coeffs = rng.elements(cfg.modulus, members);
        q.groups.push_back(std::move(grp));
    }
    return q;
}

ServerAnswer random_answer(const SystemConfig& cfg, Rng& rng) {
    ServerAnswer a;
    size_t n = rng.below(5);
    for (size_t i = 0; i < n; ++i) a.push_back(rng.elements(cfg.modulus, 1 + rng.below(4)));
    return a;
}

} // namespace

TEST_CASE("frame layout: length covers tag plus payload") {
    wire::Frame f{wire::ANSWER, wire::encode_answer({})};
    auto bytes = wire::encode_frame(f);
    // empty answer list: 4-byte length + tag + 4-byte zero count
    CHECK(bytes.size() == 9);
    CHECK(bytes[3] == 5); // length field = 5
    auto back = wire::decode_frame(bytes);
    CHECK(back == f);
}

TEST_CASE("truncation and length mismatch raise FrameError") {
    wire::Frame f{wire::QUERY, {1, 2, 3}};
    auto bytes = wire::encode_frame(f);
    bytes.pop_back();
    CHECK_THROWS_AS(wire::decode_frame(bytes), FrameError);
    std::vector<uint8_t> junk = {0, 0, 0, 0};
    CHECK_THROWS_AS(wire::decode_frame(junk), FrameError);
}

TEST_CASE("out-of-range elements are rejected before encode") {
    FieldPrime q257(257);
    CHECK_THROWS_AS(Fe(300, q257), FieldMismatch);
}

TEST_CASE("decode rejects out-of-range symbols and unknown tags") {
    SystemConfig cfg = cfg322(2);
    ServerQuery q;
    q.scheme = SchemeTag::hetdapac;
    q.packet_len = 1;
    QueryGroup g;
    g.members.push_back({cfg.parse_labels("a,2,y"), 0});
    g.coeffs = {Fe(1, cfg.modulus)};
    q.groups.push_back(g);
    auto payload = wire::encode_query(q);

    // corrupt the coefficient value to 9 (>= q=2)
    payload[payload.size() - 1] = 9;
    CHECK_THROWS_AS(wire::decode_query(payload, cfg), FrameError);

    auto good = wire::encode_query(q);
    good[0] = 77; // unknown scheme tag
    CHECK_THROWS_AS(wire::decode_query(good, cfg), FrameError);
}

TEST_CASE("verify request round-trip and version gate") {
    wire::VerifyRequest vr;
    vr.user = "alice";
    vr.asserted = {{2, 1}, {3, 0}};
    auto payload = wire::encode_verify_request(vr);
    CHECK(wire::decode_verify_request(payload) == vr);
    payload[0] = 9;
    CHECK_THROWS_AS(wire::decode_verify_request(payload), VersionError);
}

TEST_CASE("(3,2,2) central query round-trips bit-exactly") {
    SystemConfig cfg = cfg322();
    auto vstar = cfg.parse_labels("a,2,y");
    auto res = run_scheme(cfg, "hetdapac", vstar, 5);
    const auto& frame_bytes = res.transcript.servers[2].phases[0].query_frame;
    auto frame = wire::decode_frame(frame_bytes);
    auto q = wire::decode_query(frame.payload, cfg);
    CHECK(wire::encode_query(q) == frame.payload);
}

TEST_CASE("property: query and answer encodings round-trip under random seeds") {
    SystemConfig cfg = cfg322(257);
    for (uint64_t seed = 0; seed < 300; ++seed) {
        Rng rng(seed);
        ServerQuery q = random_query(cfg, rng);
        CHECK(wire::decode_query(wire::encode_query(q), cfg) == q);
        ServerAnswer a = random_answer(cfg, rng);
        auto payload = wire::encode_answer(a);
        CHECK(wire::decode_answer(payload, cfg.modulus) == a);
    }
}

TEST_CASE("verification outcome round-trip") {
    SystemConfig cfg = cfg322();
    Registry reg{{"u", cfg.parse_labels("b,1,x")}};
    auto out = verify_attributes(cfg, cfg.parse_labels("b,1,x"), reg, "u");
    auto payload = wire::encode_outcome(out);
    auto back = wire::decode_outcome(payload);
    CHECK(back.accepted == out.accepted);
    CHECK(back.relayed == out.relayed);
    CHECK(back.knowledge == out.knowledge);
}

TEST_CASE("transcript blob round-trips through the binary format") {
    SystemConfig cfg = cfg322();
    auto res = run_scheme(cfg, "hetdapac", cfg.parse_labels("a,2,y"), 9);
    auto bytes = wire::encode_transcript(res.transcript);
    auto back = wire::decode_transcript(bytes, cfg);
    CHECK(back == res.transcript);

    auto ts = run_scheme(cfg322(257, 8), "timeshare", cfg.parse_labels("a,2,y"), 9, {},
                         TimeShare{Rational(1, 4)});
    auto bytes2 = wire::encode_transcript(ts.transcript);
    CHECK(wire::decode_transcript(bytes2, cfg322(257, 8)) == ts.transcript);

    bytes[10] ^= 0xff;
    CHECK_THROWS(wire::decode_transcript(bytes, cfg));
}

TEST_CASE("fuzz: mutated query payloads never crash the decoder") {
    SystemConfig cfg = cfg322(257);
    Rng rng(424242);
    ServerQuery q = random_query(cfg, rng);
    auto payload = wire::encode_query(q);
    int exceptions = 0;
    for (int round = 0; round < 2000; ++round) {
        auto mutated = payload;
        size_t flips = 1 + rng.below(4);
        for (size_t f = 0; f < flips; ++f)
            mutated[rng.below(mutated.size())] ^= uint8_t(1 + rng.below(255));
        if (rng.below(4) == 0) mutated.resize(rng.below(mutated.size() + 1));
        try {
            (void)wire::decode_query(mutated, cfg);
        } catch (const Error&) {
            ++exceptions;
        }
    }
    CHECK(exceptions > 0); // most mutations must be rejected, none may crash
}

TEST_CASE("transcript text dump is stable and embeds frames") {
    SystemConfig cfg = cfg322();
    auto res = run_scheme(cfg, "hetdapac", cfg.parse_labels("a,2,y"), 9);
    auto d1 = res.transcript.dump();
    auto d2 = run_scheme(cfg, "hetdapac", cfg.parse_labels("a,2,y"), 9).transcript.dump();
    CHECK(d1 == d2);
    CHECK(d1.find("scheme: hetdapac") != std::string::npos);
    CHECK(d1.find("decode_ok: true") != std::string::npos);
    CHECK(d1.find("query: ") != std::string::npos);
}
