#include "dapac/netsim.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <map>
#include <set>

namespace dapac::net {

namespace {

int read_full(int fd, uint8_t* buf, size_t n) {
    while (n > 0) {
        ssize_t rv = ::read(fd, buf, n);
        if (rv <= 0) return -1;
        n -= size_t(rv);
        buf += rv;
    }
    return 0;
}

int write_all(int fd, const uint8_t* buf, size_t n) {
    while (n > 0) {
        ssize_t rv = ::write(fd, buf, n);
        if (rv <= 0) return -1;
        n -= size_t(rv);
        buf += rv;
    }
    return 0;
}

constexpr uint32_t k_max_frame = 1u << 26;

/// Reads one complete frame; returns the raw bytes (length prefix included).
std::vector<uint8_t> read_frame_bytes(int fd) {
    uint8_t head[4];
    if (read_full(fd, head, 4) != 0) throw SessionError("connection closed");
    uint32_t len = (uint32_t(head[0]) << 24) | (uint32_t(head[1]) << 16) |
                   (uint32_t(head[2]) << 8) | head[3];
    if (len < 1 || len > k_max_frame) throw FrameError("bad frame length");
    std::vector<uint8_t> bytes(4 + len);
    std::memcpy(bytes.data(), head, 4);
    if (read_full(fd, bytes.data() + 4, len) != 0) throw SessionError("connection closed");
    return bytes;
}

void send_bytes(int fd, const std::vector<uint8_t>& bytes) {
    if (write_all(fd, bytes.data(), bytes.size()) != 0) throw SessionError("write failed");
}

void send_frame(int fd, uint8_t tag, std::vector<uint8_t> payload) {
    send_bytes(fd, wire::encode_frame({tag, std::move(payload)}));
}

int connect_to(const Endpoint& ep) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw SessionError("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(ep.port);
    if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw SessionError("bad address " + ep.host);
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        throw SessionError("connect to " + ep.host + ":" + std::to_string(ep.port) + " failed");
    }
    return fd;
}

struct FdCloser {
    int fd;
    ~FdCloser() {
        if (fd >= 0) ::close(fd);
    }
};

} // namespace

DatabaseView view_for_server(const SystemConfig& cfg, int server_id,
                             std::optional<uint16_t> own_value,
                             const std::vector<std::pair<uint16_t, uint16_t>>& tail) {
    DatabaseView view;
    view.server_id = server_id;
    bool central = server_id == cfg.central_server();
    if (!central && !own_value) throw ConfigError("dedicated view needs the verified value");
    for (const auto& v : all_vectors(cfg)) {
        bool ok = true;
        if (!central && v.coords[server_id - 1] != *own_value) ok = false;
        for (auto [pos, val] : tail)
            if (v.coords[pos - 1] != val) ok = false;
        if (ok) view.keys.push_back(v);
    }
    return view;
}

Server::Server(ServeOptions opts) : opts_(std::move(opts)) {}

Server::~Server() {
    stop();
    join();
}

uint16_t Server::start(uint16_t port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw SessionError("socket() failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
        throw SessionError("bind failed");
    if (::listen(listen_fd_, 8) != 0) throw SessionError("listen failed");
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this] { serve_loop(); });
    return port_;
}

void Server::stop() {
    stopping_ = true;
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
}

void Server::join() {
    if (thread_.joinable()) thread_.join();
}

void Server::serve_loop() {
    int handled = 0;
    while (!stopping_ && (opts_.sessions == 0 || handled < opts_.sessions)) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) break;
        try {
            handle_session(fd);
        } catch (const std::exception& e) {
            error_ = e.what();
        }
        ::close(fd);
        ++handled;
    }
}

void Server::handle_session(int client_fd) {
    const SystemConfig& cfg = opts_.cfg;
    const int id = opts_.server_id;
    const bool central = id == cfg.central_server();
    const bool baseline = opts_.scheme == "dapac";

    // verification
    auto req_bytes = read_frame_bytes(client_fd);
    wire::Frame req = wire::decode_frame(req_bytes);
    if (req.tag != wire::VERIFY_REQ) {
        send_frame(client_fd, wire::ERROR, wire::encode_error(1, "expected VERIFY_REQ"));
        return;
    }
    wire::VerifyRequest vr = wire::decode_verify_request(req.payload);
    auto reg_it = opts_.registry.find(vr.user);
    std::optional<uint16_t> own_value;
    std::vector<std::pair<uint16_t, uint16_t>> tail;

    auto reject = [&] { send_frame(client_fd, wire::VERIFY_FAIL, {}); };
    if (reg_it == opts_.registry.end()) {
        reject();
        return;
    }
    if (central) {
        std::set<uint16_t> want;
        for (int p = cfg.dedicated_count + 1; p <= cfg.attr_count; ++p) want.insert(uint16_t(p));
        std::set<uint16_t> got;
        for (auto [pos, val] : vr.asserted) got.insert(pos);
        if (got != want) {
            reject();
            return;
        }
        for (auto [pos, val] : vr.asserted) {
            if (reg_it->second.coords[pos - 1] != val) {
                reject();
                return;
            }
            tail.emplace_back(pos, val);
        }
        // relay before acknowledging, so dedicated servers are ready
        for (const auto& peer : opts_.peers) {
            int pfd = connect_to(peer);
            FdCloser closer{pfd};
            send_frame(pfd, wire::ATTR_RELAY, wire::encode_relay(tail));
            wire::Frame ack = wire::decode_frame(read_frame_bytes(pfd));
            if (ack.tag != wire::VERIFY_OK) throw SessionError("relay not acknowledged");
        }
    } else {
        if (vr.asserted.size() != 1 || vr.asserted[0].first != uint16_t(id)) {
            reject();
            return;
        }
        if (reg_it->second.coords[id - 1] != vr.asserted[0].second) {
            reject();
            return;
        }
        own_value = vr.asserted[0].second;
    }
    send_frame(client_fd, wire::VERIFY_OK, {});

    // dedicated servers of a hybrid system wait for the central relay before
    // answering any query
    if (!central && !baseline) {
        int rfd = ::accept(listen_fd_, nullptr, nullptr);
        if (rfd < 0) throw SessionError("relay accept failed");
        FdCloser closer{rfd};
        wire::Frame relay = wire::decode_frame(read_frame_bytes(rfd));
        if (relay.tag != wire::ATTR_RELAY) throw SessionError("expected ATTR_RELAY");
        tail = wire::decode_relay(relay.payload);
        send_frame(rfd, wire::VERIFY_OK, {});
    }

    DatabaseView view = view_for_server(cfg, id, own_value, tail);
    MessageStore store = MessageStore::generate(cfg);
    RandomnessPool pool(opts_.pool_seed, cfg.modulus);

    // retrieval: answer queries until the client closes the connection
    while (true) {
        std::vector<uint8_t> qbytes;
        try {
            qbytes = read_frame_bytes(client_fd);
        } catch (const SessionError&) {
            break; // client done
        }
        wire::Frame f = wire::decode_frame(qbytes);
        if (f.tag != wire::QUERY) {
            send_frame(client_fd, wire::ERROR, wire::encode_error(2, "expected QUERY"));
            return;
        }
        try {
            ServerQuery q = wire::decode_query(f.payload, cfg);
            auto result = answer_query(cfg, view, store, q, pool, id);
            send_bytes(client_fd, wire::answer_frame(result.answers));
        } catch (const AccessViolation& e) {
            send_frame(client_fd, wire::ERROR, wire::encode_error(3, e.what()));
            return;
        }
    }
}

ClientResult run_client(const SystemConfig& cfg, const std::string& scheme,
                        const AttributeVector& vstar, uint64_t seed, const ClientOptions& opts) {
    ClientResult res;
    SystemConfig run_cfg = cfg;
    run_cfg.seed = seed;

    int server_count = (scheme == "dapac") ? run_cfg.dedicated_count : run_cfg.central_server();
    if (int(opts.servers.size()) != server_count)
        throw ConfigError("need " + std::to_string(server_count) + " server endpoints");

    Transcript& t = res.transcript;
    t.scheme = scheme;
    t.config_json = run_cfg.to_json();
    t.seed = seed;
    t.vstar = vstar;
    if (opts.share) t.lambda = opts.share->lambda;
    t.servers.resize(server_count);
    for (int s = 1; s <= server_count; ++s) t.servers[s - 1].server_id = s;

    std::vector<int> fds(server_count, -1);
    auto close_all = [&] {
        for (int& fd : fds)
            if (fd >= 0) {
                ::close(fd);
                fd = -1;
            }
    };

    std::vector<std::pair<uint16_t, uint16_t>> tail;
    for (int p = run_cfg.dedicated_count + 1; p <= run_cfg.attr_count; ++p)
        tail.emplace_back(uint16_t(p), vstar.coords[p - 1]);
    std::vector<uint8_t> relay_frame =
        wire::encode_frame({wire::ATTR_RELAY, wire::encode_relay(tail)});

    try {
        // verification phase: dedicated servers first, then the central one,
        // whose VERIFY_OK implies the relays were delivered
        for (int s = 1; s <= server_count; ++s) {
            ServerRecord& sr = t.servers[s - 1];
            fds[s - 1] = connect_to(opts.servers[s - 1]);
            wire::VerifyRequest vr;
            vr.user = opts.user;
            if (s <= run_cfg.dedicated_count)
                vr.asserted = {{uint16_t(s), vstar.coords[s - 1]}};
            else
                vr.asserted = tail;
            sr.verify_req =
                wire::encode_frame({wire::VERIFY_REQ, wire::encode_verify_request(vr)});
            send_bytes(fds[s - 1], sr.verify_req);
            sr.verify_resp = read_frame_bytes(fds[s - 1]);
            wire::Frame resp = wire::decode_frame(sr.verify_resp);
            if (resp.tag == wire::VERIFY_FAIL) {
                res.status = ClientResult::Status::verify_fail;
                res.detail = "server " + std::to_string(s) + " rejected verification";
                close_all();
                return res;
            }
            if (resp.tag != wire::VERIFY_OK) throw SessionError("unexpected verification reply");
        }
        // mirror the relay frames the central server sent (deterministic
        // encoding) so transcripts line up with the in-process run
        if (scheme != "dapac") {
            t.servers[server_count - 1].relays_sent.assign(run_cfg.dedicated_count, relay_frame);
            for (int s = 1; s <= run_cfg.dedicated_count; ++s)
                t.servers[s - 1].relay_received = relay_frame;
        }

        // retrieval phases
        auto universe = build_views(run_cfg, vstar).back().keys;
        struct PhasePlan {
            std::string scheme;
            uint32_t base, len;
            std::string domain;
        };
        std::vector<PhasePlan> phases;
        if (scheme == "timeshare") {
            if (!opts.share) throw ConfigError("timeshare needs lambda");
            Rational lamL = opts.share->lambda * Rational(run_cfg.msg_len);
            if (lamL.den() != 1) throw ConfigError("lambda*L not integral");
            uint32_t la = uint32_t(lamL.num());
            uint32_t L = uint32_t(run_cfg.msg_len);
            if (la == 0)
                phases.push_back({"hetdapac", 0, L, "main"});
            else if (la == L)
                phases.push_back({"dapac", 0, L, "main"});
            else {
                phases.push_back({"dapac", 0, la, "ts-a"});
                phases.push_back({"hetdapac", la, L - la, "ts-b"});
            }
        } else {
            phases.push_back({scheme, 0, uint32_t(run_cfg.msg_len), "main"});
        }

        std::vector<std::vector<Fe>> spans;
        std::vector<std::pair<uint32_t, uint32_t>> ranges;
        for (const auto& ph : phases) {
            uint32_t packets = packet_count_for(run_cfg, ph.scheme);
            SubPacketPlan plan(universe, packets, derive_seed(run_cfg.user_seed(), ph.domain));
            Rng rng = domain_rng(run_cfg.user_seed(), "user-coeff|" + ph.domain);
            auto built =
                build_for(run_cfg, ph.scheme, vstar, plan, rng, ph.base, ph.len);

            // send all queries, then collect all answers
            std::vector<std::vector<uint8_t>> qframes(built.queries.size());
            for (size_t s = 0; s < built.queries.size(); ++s) {
                qframes[s] = wire::query_frame(built.queries[s]);
                send_bytes(fds[s], qframes[s]);
            }
            std::vector<ServerAnswer> answers(built.queries.size());
            for (size_t s = 0; s < built.queries.size(); ++s) {
                auto abytes = read_frame_bytes(fds[s]);
                wire::Frame f = wire::decode_frame(abytes);
                if (f.tag == wire::ERROR) {
                    auto [code, msg] = wire::decode_error(f.payload);
                    throw SessionError("server error " + std::to_string(code) + ": " + msg);
                }
                if (f.tag != wire::ANSWER) throw SessionError("expected ANSWER");
                answers[s] = wire::decode_answer(f.payload, run_cfg.modulus);

                PhaseRecord rec;
                rec.query_frame = qframes[s];
                rec.answer_frame = abytes;
                rec.packet_len = built.queries[s].packet_len;
                for (const auto& g : built.queries[s].groups)
                    rec.chunk_keys.push_back(
                        group_chunk_keys(run_cfg, built.queries[s], int(s + 1), g));
                for (const auto& a : answers[s]) rec.downloaded_symbols += a.size();
                t.servers[s].phases.push_back(std::move(rec));
            }
            spans.push_back(decode_span(run_cfg, answers, built.recipe));
            ranges.emplace_back(ph.base, ph.len);
        }
        close_all();

        t.decoded.assign(size_t(run_cfg.msg_len), fe_zero(run_cfg.modulus));
        for (size_t i = 0; i < spans.size(); ++i)
            std::copy(spans[i].begin(), spans[i].end(), t.decoded.begin() + ranges[i].first);
        if (opts.expect_store) {
            res.decode_matches_store = (t.decoded == opts.expect_store->at(vstar));
            t.decode_ok = res.decode_matches_store;
        } else {
            t.decode_ok = true;
        }
    } catch (const std::exception& e) {
        close_all();
        res.status = ClientResult::Status::session_error;
        res.detail = e.what();
    }
    return res;
}

bool inspect_dedicated_stream(const SystemConfig& cfg, int server_id,
                              const std::vector<uint8_t>& stream, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    size_t at = 0;
    while (at < stream.size()) {
        if (at + 4 > stream.size()) return fail("truncated stream");
        uint32_t len = (uint32_t(stream[at]) << 24) | (uint32_t(stream[at + 1]) << 16) |
                       (uint32_t(stream[at + 2]) << 8) | stream[at + 3];
        if (at + 4 + len > stream.size()) return fail("truncated frame");
        std::span<const uint8_t> fb(stream.data() + at, 4 + len);
        wire::Frame f = wire::decode_frame(fb);
        at += 4 + len;

        if (f.tag == wire::VERIFY_REQ) {
            auto vr = wire::decode_verify_request(f.payload);
            for (auto [pos, val] : vr.asserted)
                if (pos != uint16_t(server_id))
                    return fail("verify request asserts foreign position " + std::to_string(pos));
        } else if (f.tag == wire::QUERY) {
            ServerQuery q = wire::decode_query(f.payload, cfg);
            for (int m = 1; m <= cfg.dedicated_count; ++m) {
                if (m == server_id) continue;
                // every group either spans coordinate m fully and evenly or
                // fixes it; fixed values must cover the alphabet evenly
                std::map<uint16_t, int> fixed_counts;
                for (const auto& g : q.groups) {
                    std::map<uint16_t, int> vals;
                    for (const auto& mem : g.members) vals[mem.key.coords[m - 1]]++;
                    if (vals.size() == 1) {
                        fixed_counts[vals.begin()->first]++;
                    } else {
                        if (int(vals.size()) != cfg.alphabet_size)
                            return fail("group exposes a partial value set of attribute " +
                                        std::to_string(m));
                        int c = vals.begin()->second;
                        for (auto& [v, n] : vals)
                            if (n != c)
                                return fail("group weights values of attribute " +
                                            std::to_string(m) + " unevenly");
                    }
                }
                if (!fixed_counts.empty()) {
                    if (int(fixed_counts.size()) != cfg.alphabet_size)
                        return fail("groups single out values of attribute " + std::to_string(m));
                    int c = fixed_counts.begin()->second;
                    for (auto& [v, n] : fixed_counts)
                        if (n != c)
                            return fail("groups cover attribute " + std::to_string(m) +
                                        " unevenly");
                }
            }
        }
    }
    return true;
}

} // namespace dapac::net
