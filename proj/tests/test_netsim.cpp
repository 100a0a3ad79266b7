#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "dapac/metrics.hpp"
#include "dapac/netsim.hpp"
#include "test_helpers.hpp"

using namespace dapac;
using namespace dapac::testing;

namespace {

SystemConfig so_cfg(SystemConfig cfg, uint64_t seed) {
    cfg.seed = seed;
    return cfg;
}

struct Cluster {
    std::vector<std::unique_ptr<net::Server>> servers;
    std::vector<net::Endpoint> endpoints;
};

Cluster start_cluster(const SystemConfig& cfg, const std::string& scheme, const Registry& reg,
                      uint64_t seed, int sessions = 1) {
    SystemConfig run_cfg = cfg;
    run_cfg.seed = seed;
    int count = scheme == "dapac" ? cfg.dedicated_count : cfg.central_server();
    Cluster c;
    c.endpoints.resize(count);
    // dedicated servers first so the central one can be given their ports
    for (int id = 1; id <= count; ++id) {
        if (id == cfg.central_server() && scheme != "dapac") continue;
        net::ServeOptions so;
        so.cfg = run_cfg;
        so.scheme = scheme;
        so.registry = reg;
        so.server_id = id;
        so.pool_seed = run_cfg.pool_seed();
        so.sessions = sessions;
        auto srv = std::make_unique<net::Server>(std::move(so));
        c.endpoints[id - 1] = {"127.0.0.1", srv->start()};
        c.servers.push_back(std::move(srv));
    }
    if (scheme != "dapac") {
        net::ServeOptions so;
        so.cfg = run_cfg;
        so.scheme = scheme;
        so.registry = reg;
        so.server_id = cfg.central_server();
        so.pool_seed = run_cfg.pool_seed();
        so.sessions = sessions;
        for (int id = 1; id <= cfg.dedicated_count; ++id) so.peers.push_back(c.endpoints[id - 1]);
        auto srv = std::make_unique<net::Server>(std::move(so));
        c.endpoints[count - 1] = {"127.0.0.1", srv->start()};
        c.servers.push_back(std::move(srv));
    }
    return c;
}

} // namespace

TEST_CASE("transport equivalence: socket transcripts equal in-process ones") {
    struct Case {
        const char* scheme;
        SystemConfig cfg;
        const char* vstar;
    };
    std::vector<Case> cases = {
        {"hetdapac", cfg322(257, 2), "a,2,y"},
        {"dapac", cfg32(257, 3), "a,2,y"},
        {"d3", cfg432(257, 6), "a,2,u,y"},
    };
    for (auto& c : cases) {
        CAPTURE(c.scheme);
        auto vstar = c.cfg.parse_labels(c.vstar);
        Registry reg{{"user", vstar}};
        uint64_t seed = 42;

        auto cluster = start_cluster(c.cfg, c.scheme, reg, seed);
        MessageStore store = [&] {
            SystemConfig sc = c.cfg;
            sc.seed = seed;
            return MessageStore::generate(sc);
        }();
        net::ClientOptions co;
        co.servers = cluster.endpoints;
        co.expect_store = &store;
        auto live = net::run_client(c.cfg, c.scheme, vstar, seed, co);
        REQUIRE(live.status == net::ClientResult::Status::ok);
        CHECK(live.decode_matches_store);

        auto local = run_scheme(c.cfg, c.scheme, vstar, seed);
        CHECK(wire::encode_transcript(live.transcript) ==
              wire::encode_transcript(local.transcript));
        CHECK(live.transcript.dump() == local.transcript.dump());
        for (auto& s : cluster.servers) s->join();
    }
}

TEST_CASE("transport equivalence holds for the time-share composite") {
    SystemConfig cfg = cfg322(257, 8);
    auto vstar = cfg.parse_labels("b,1,y");
    Registry reg{{"user", vstar}};
    auto cluster = start_cluster(cfg, "timeshare", reg, 7);
    net::ClientOptions co;
    co.servers = cluster.endpoints;
    co.share = TimeShare{Rational(1, 4)};
    auto live = net::run_client(cfg, "timeshare", vstar, 7, co);
    REQUIRE(live.status == net::ClientResult::Status::ok);
    auto local = run_scheme(cfg, "timeshare", vstar, 7, {}, TimeShare{Rational(1, 4)});
    CHECK(wire::encode_transcript(live.transcript) == wire::encode_transcript(local.transcript));
    for (auto& s : cluster.servers) s->join();
}

TEST_CASE("wrong asserted attribute: VERIFY_FAIL observed, no query sent") {
    SystemConfig cfg = cfg322(257, 2);
    Registry reg{{"user", cfg.parse_labels("a,2,y")}};
    auto cluster = start_cluster(cfg, "hetdapac", reg, 5);
    net::ClientOptions co;
    co.servers = cluster.endpoints;
    auto live = net::run_client(cfg, "hetdapac", cfg.parse_labels("a,1,y"), 5, co);
    CHECK(live.status == net::ClientResult::Status::verify_fail);
    CHECK(live.detail.find("server 2") != std::string::npos);
    // the failing server's reply is a VERIFY_FAIL frame; no phase records exist
    auto frame = wire::decode_frame(live.transcript.servers[1].verify_resp);
    CHECK(frame.tag == wire::VERIFY_FAIL);
    for (const auto& sr : live.transcript.servers) CHECK(sr.phases.empty());
    for (auto& s : cluster.servers) s->stop();
}

TEST_CASE("connection loss yields a session error with a partial transcript") {
    SystemConfig cfg = cfg322(257, 2);
    auto vstar = cfg.parse_labels("a,2,y");
    Registry reg{{"user", vstar}};
    // only the dedicated servers are up; the central endpoint refuses
    net::ServeOptions so1{cfg, "hetdapac", reg, 1, cfg.pool_seed(), {}, 1};
    net::Server s1(std::move(so1));
    net::ServeOptions so2{cfg, "hetdapac", reg, 2, cfg.pool_seed(), {}, 1};
    net::Server s2(std::move(so2));
    net::ClientOptions co;
    co.servers = {{"127.0.0.1", s1.start()}, {"127.0.0.1", s2.start()}, {"127.0.0.1", 1}};
    auto res = net::run_client(cfg, "hetdapac", vstar, 5, co);
    CHECK(res.status == net::ClientResult::Status::session_error);
    // the dedicated verifications already happened and are recorded
    CHECK(!res.transcript.servers[0].verify_resp.empty());
    CHECK(res.transcript.servers[2].verify_req.empty());
    s1.stop();
    s2.stop();
}

TEST_CASE("dedicated server answers a query only after the relay arrives") {
    SystemConfig cfg = cfg322(257, 2);
    auto vstar = cfg.parse_labels("a,2,y");
    Registry reg{{"user", vstar}};

    net::ServeOptions so;
    so.cfg = cfg;
    so.cfg.seed = 5;
    so.scheme = "hetdapac";
    so.registry = reg;
    so.server_id = 1;
    so.pool_seed = so.cfg.pool_seed();
    net::Server server(std::move(so));
    auto port = server.start();

    // skip the relay: connect directly, verify, then send a query; the
    // server is still in RELAY-wait and must not answer on our connection
    int fd = socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    REQUIRE(connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    wire::VerifyRequest vr;
    vr.user = "user";
    vr.asserted = {{1, vstar.coords[0]}};
    auto reqf = wire::encode_frame({wire::VERIFY_REQ, wire::encode_verify_request(vr)});
    REQUIRE(write(fd, reqf.data(), reqf.size()) == ssize_t(reqf.size()));
    uint8_t buf[64];
    ssize_t got = read(fd, buf, sizeof(buf));
    REQUIRE(got > 4);
    CHECK(buf[4] == wire::VERIFY_OK);

    // send the retrieval query now, before any relay: the server must not
    // answer yet
    auto universe = build_views(so_cfg(cfg, 5), vstar).back().keys;
    SubPacketPlan plan(universe, 2, derive_seed(so_cfg(cfg, 5).user_seed(), "main"));
    Rng rng = domain_rng(so_cfg(cfg, 5).user_seed(), "user-coeff|main");
    auto built = build_for(so_cfg(cfg, 5), "hetdapac", vstar, plan, rng);
    auto qf = wire::query_frame(built.queries[0]);
    REQUIRE(write(fd, qf.data(), qf.size()) == ssize_t(qf.size()));

    // no answer may arrive while the relay is missing
    timeval tv{0, 200000};
    setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    got = read(fd, buf, sizeof(buf));
    CHECK(got < 0); // timed out: phase ordering enforced

    // complete the relay; only now the pending query gets served
    int rfd = socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(connect(rfd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    auto relay = wire::encode_frame(
        {wire::ATTR_RELAY, wire::encode_relay({{3, vstar.coords[2]}})});
    REQUIRE(write(rfd, relay.data(), relay.size()) == ssize_t(relay.size()));
    uint8_t ack[16];
    REQUIRE(read(rfd, ack, sizeof(ack)) > 4);
    close(rfd);

    timeval tv2{2, 0};
    setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv2, sizeof(tv2));
    got = read(fd, buf, sizeof(buf));
    REQUIRE(got > 4);
    CHECK(buf[4] == wire::ANSWER);

    close(fd);
    server.stop();
    server.join();
}

TEST_CASE("client to dedicated server: wire inspector accepts honest streams") {
    for (const char* scheme : {"hetdapac", "dapac", "d3"}) {
        SystemConfig c = std::string(scheme) == "dapac"
                             ? cfg32(257, 3)
                             : (std::string(scheme) == "d3" ? cfg432(257, 6) : cfg322(257, 2));
        for (const auto& vstar : all_vectors(c)) {
            auto res = run_scheme(c, scheme, vstar, 3);
            for (int n = 1; n <= c.dedicated_count; ++n) {
                const auto& sr = res.transcript.servers[n - 1];
                std::vector<uint8_t> stream = sr.verify_req;
                for (const auto& ph : sr.phases)
                    stream.insert(stream.end(), ph.query_frame.begin(), ph.query_frame.end());
                std::string why;
                bool ok = net::inspect_dedicated_stream(c, n, stream, &why);
                CAPTURE(why);
                CHECK(ok);
            }
        }
    }
}

TEST_CASE("wire inspector flags foreign assertions and singled-out values") {
    SystemConfig cfg = cfg322(257, 2);
    // verify request asserting a foreign position
    wire::VerifyRequest vr;
    vr.user = "user";
    vr.asserted = {{1, 0}, {2, 1}};
    auto bad = wire::encode_frame({wire::VERIFY_REQ, wire::encode_verify_request(vr)});
    CHECK(!net::inspect_dedicated_stream(cfg, 1, bad));

    // query whose single group pins attribute 2 to one value only
    ServerQuery q;
    q.scheme = SchemeTag::hetdapac;
    q.packet_len = 1;
    QueryGroup g;
    g.members.push_back({cfg.parse_labels("a,2,y"), 0});
    g.members.push_back({cfg.parse_labels("a,2,x"), 0});
    g.coeffs = {Fe(1, cfg.modulus), Fe(1, cfg.modulus)};
    q.groups.push_back(g);
    auto leaky = wire::query_frame(q);
    std::string why;
    CHECK(!net::inspect_dedicated_stream(cfg, 1, leaky, &why));
    CHECK(why.find("attribute 2") != std::string::npos);
}

TEST_CASE("view_for_server matches build_views given the verified facts") {
    SystemConfig cfg = cfg432(257, 6);
    auto vstar = cfg.parse_labels("b,1,v,x");
    auto views = build_views(cfg, vstar);
    std::vector<std::pair<uint16_t, uint16_t>> tail = {{4, vstar.coords[3]}};
    for (int n = 1; n <= 3; ++n) {
        auto v = net::view_for_server(cfg, n, vstar.coords[n - 1], tail);
        CHECK(v.keys == views[n - 1].keys);
    }
    auto central = net::view_for_server(cfg, 4, std::nullopt, tail);
    CHECK(central.keys == views[3].keys);
}
