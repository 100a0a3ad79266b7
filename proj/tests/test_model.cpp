#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "dapac/model.hpp"

using namespace dapac;

namespace {

SystemConfig make_cfg(int N, int D, int K, uint32_t q, int L, uint64_t seed = 7) {
    SystemConfig cfg;
    cfg.attr_count = N;
    cfg.dedicated_count = D;
    cfg.alphabet_size = K;
    cfg.modulus = FieldPrime(q);
    cfg.msg_len = L;
    cfg.seed = seed;
    static const std::vector<std::vector<std::string>> names = {
        {"a", "b", "c", "d", "e", "f", "g", "h"},
        {"1", "2", "3", "4", "5", "6", "7", "8"},
        {"u", "v", "w", "s", "t", "p", "r", "o"},
        {"x", "y", "z", "k", "l", "m", "n", "q"},
        {"A", "B", "C", "D", "E", "F", "G", "H"},
    };
    for (int n = 0; n < N; ++n) {
        std::vector<std::string> alpha(names[n % 5].begin(), names[n % 5].begin() + K);
        if (n >= 5)
            for (auto& s : alpha) s += std::to_string(n);
        cfg.alphabets.push_back(alpha);
    }
    cfg.validate();
    return cfg;
}

// (3,2,2) reference layout: alphabets {a,b},{1,2},{x,y}
SystemConfig cfg322() {
    SystemConfig cfg = make_cfg(3, 2, 2, 2, 2);
    cfg.alphabets = {{"a", "b"}, {"1", "2"}, {"x", "y"}};
    return cfg;
}

} // namespace

TEST_CASE("build_views reproduces the (3,2,2) database layout") {
    SystemConfig cfg = cfg322();
    AttributeVector vstar = cfg.parse_labels("a,2,y");
    auto views = build_views(cfg, vstar);
    REQUIRE(views.size() == 3);

    auto labels = [&](const DatabaseView& v) {
        std::vector<std::string> out;
        for (const auto& k : v.keys) out.push_back(cfg.label_of(k));
        return out;
    };
    CHECK(labels(views[0]) == std::vector<std::string>{"a,1,y", "a,2,y"});
    CHECK(labels(views[1]) == std::vector<std::string>{"a,2,y", "b,2,y"});
    CHECK(labels(views[2]) == std::vector<std::string>{"a,1,y", "a,2,y", "b,1,y", "b,2,y"});
}

TEST_CASE("D=N central view is the whole universe") {
    SystemConfig cfg = make_cfg(3, 3, 2, 2, 3);
    AttributeVector vstar = cfg.parse_labels("a,2,u");
    auto views = build_views(cfg, vstar);
    CHECK(views.back().keys.size() == 8);
}

TEST_CASE("(4,3,2) view sizes and pairwise dedicated overlap") {
    SystemConfig cfg = make_cfg(4, 3, 2, 2, 6);
    AttributeVector vstar = cfg.parse_labels("a,2,u,y");
    auto views = build_views(cfg, vstar);
    REQUIRE(views.size() == 4);
    for (int n = 0; n < 3; ++n) CHECK(views[n].keys.size() == 4); // K^{D-1}
    CHECK(views[3].keys.size() == 8);                             // K^D

    // oracle: enumerate keys and intersect
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
            std::set<AttributeVector> sa(views[a].keys.begin(), views[a].keys.end());
            int common = 0;
            for (const auto& k : views[b].keys) common += int(sa.count(k));
            CHECK(common == 2); // K^{D-2}
        }
}

TEST_CASE("view invariants hold for every designated vector") {
    for (SystemConfig cfg : {make_cfg(4, 3, 2, 2, 6), make_cfg(3, 3, 4, 2, 3)}) {
        int D = cfg.dedicated_count;
        for (const auto& vstar : all_vectors(cfg)) {
            auto views = build_views(cfg, vstar);
            for (int n = 0; n < D; ++n) {
                CHECK(views[n].contains(vstar));
                for (const auto& k : views[n].keys) CHECK(views[D].contains(k));
            }
            CHECK(views[D].contains(vstar));
        }
    }
}

TEST_CASE("(4,3,2) every dedicated view subset of central, designated everywhere") {
    SystemConfig cfg = make_cfg(4, 3, 2, 2, 6);
    for (const auto& vstar : all_vectors(cfg)) {
        auto views = build_views(cfg, vstar);
        for (int n = 0; n < 3; ++n) {
            CHECK(views[n].contains(vstar));
            // every dedicated view is a subset of the central one
            for (const auto& k : views[n].keys) CHECK(views[3].contains(k));
        }
        CHECK(views[3].contains(vstar));
    }
}

TEST_CASE("canonical order sorts by attribute index tuple") {
    SystemConfig cfg = cfg322();
    auto a2y = cfg.parse_labels("a,2,y");
    auto a1y = cfg.parse_labels("a,1,y");
    auto a2x = cfg.parse_labels("a,2,x");
    auto sorted = canonical_order({a2y, a1y});
    CHECK(sorted == std::vector<AttributeVector>{a1y, a2y});
    // a2y follows a2x, matching the offset position used by server 2
    auto sorted2 = canonical_order({a2y, a2x});
    CHECK(sorted2 == std::vector<AttributeVector>{a2x, a2y});
}

TEST_CASE("message store: K^N messages, seed-stable, length L") {
    SystemConfig cfg = cfg322();
    MessageStore s1 = MessageStore::generate(cfg);
    MessageStore s2 = MessageStore::generate(cfg);
    CHECK(s1.msgs.size() == 8);
    CHECK(s1.msgs == s2.msgs);
    for (const auto& [k, m] : s1.msgs) CHECK(m.size() == 2);

    SystemConfig other = cfg;
    other.seed = 8;
    CHECK(MessageStore::generate(other).msgs != s1.msgs);
}

TEST_CASE("randomness pool regenerates identical chunks across instances") {
    SystemConfig cfg = cfg322();
    RandomnessPool p1(cfg.pool_seed(), cfg.modulus);
    RandomnessPool p2(cfg.pool_seed(), cfg.modulus);
    for (const char* key : {"o0|1=0|3=1", "o0|2=1|3=1", "o3|1=0"}) {
        CHECK(p1.chunk(key, 4) == p2.chunk(key, 4));
    }
    CHECK(p1.chunk("o0|1=0|3=1", 4) != p1.chunk("o0|1=1|3=1", 4));
}

TEST_CASE("sub-packet plan: fresh indices, overflow guarded") {
    SystemConfig cfg = cfg322();
    auto universe = all_vectors(cfg);
    SubPacketPlan plan(universe, 3, 99);
    auto v = cfg.parse_labels("a,2,y");
    std::set<uint32_t> seen;
    for (int i = 0; i < 3; ++i) {
        uint32_t raw = plan.fresh_raw(v);
        CHECK(raw < 3);
        CHECK(!seen.count(raw));
        seen.insert(raw);
    }
    CHECK_THROWS(plan.fresh_raw(v));

    SubPacketPlan ident(universe, 3, 99, /*identity*/ true);
    CHECK(ident.fresh_raw(v) == 0);
    CHECK(ident.fresh_raw(v) == 1);
}

TEST_CASE("verification: honest user accepted, knowledge sets correct") {
    SystemConfig cfg = cfg322();
    auto vstar = cfg.parse_labels("a,2,y");
    Registry reg{{"alice", vstar}};
    auto out = verify_attributes(cfg, vstar, reg, "alice");
    CHECK(out.accepted == std::vector<int>{1, 2, 3});
    REQUIRE(out.relayed.size() == 1);
    CHECK(out.relayed[0] == std::pair<uint16_t, uint16_t>{3, 1});
    // dedicated server n knows its own attribute plus the relayed tail
    CHECK(out.knowledge[0] ==
          std::vector<std::pair<uint16_t, uint16_t>>{{1, 0}, {3, 1}});
    CHECK(out.knowledge[1] ==
          std::vector<std::pair<uint16_t, uint16_t>>{{2, 1}, {3, 1}});
    CHECK(out.knowledge[2] == out.relayed);
}

TEST_CASE("verification: wrong attribute names the rejecting server") {
    SystemConfig cfg = cfg322();
    Registry reg{{"alice", cfg.parse_labels("a,2,y")}};
    auto lie = cfg.parse_labels("a,1,y"); // wrong v_2
    try {
        verify_attributes(cfg, lie, reg, "alice");
        FAIL("expected VerificationFailed");
    } catch (const VerificationFailed& e) {
        CHECK(e.server == 2);
    }
    CHECK_THROWS_AS(verify_attributes(cfg, lie, reg, "bob"), ConfigError);
}

TEST_CASE("verification: D == N has an empty relay set") {
    SystemConfig cfg = make_cfg(3, 3, 2, 2, 3);
    auto vstar = cfg.parse_labels("a,2,u");
    Registry reg{{"u", vstar}};
    auto out = verify_attributes(cfg, vstar, reg, "u");
    CHECK(out.relayed.empty());
}

TEST_CASE("config round-trips through json and rejects bad shapes") {
    SystemConfig cfg = cfg322();
    SystemConfig back = SystemConfig::from_json(cfg.to_json());
    CHECK(back.attr_count == cfg.attr_count);
    CHECK(back.alphabets == cfg.alphabets);
    CHECK(back.seed == cfg.seed);

    SystemConfig bad = cfg;
    bad.alphabets[0] = {"a", "a"};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(build_views(cfg, AttributeVector{{9, 9, 9}}), ConfigError);
}

TEST_CASE("label parsing round-trip") {
    SystemConfig cfg = cfg322();
    auto v = cfg.parse_labels("b,1,x");
    CHECK(v.coords == std::vector<uint16_t>{1, 0, 0});
    CHECK(cfg.label_of(v) == "b,1,x");
    CHECK_THROWS_AS(cfg.parse_labels("z,1,x"), ConfigError);
    CHECK_THROWS_AS(cfg.parse_labels("a,1"), ConfigError);
}
