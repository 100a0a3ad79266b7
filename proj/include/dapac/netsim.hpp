#pragma once

#include <atomic>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dapac/sim.hpp"
#include "dapac/wire.hpp"

namespace dapac::net {

struct Endpoint {
    std::string host = "127.0.0.1";
    uint16_t port = 0;
};

/// View a server can build from what verification legitimately taught it:
/// its own attribute value (dedicated) plus the relayed tail.
DatabaseView view_for_server(const SystemConfig& cfg, int server_id,
                             std::optional<uint16_t> own_value,
                             const std::vector<std::pair<uint16_t, uint16_t>>& tail);

struct ServeOptions {
    SystemConfig cfg;
    std::string scheme; // dapac | hetdapac | d3 | timeshare
    Registry registry;
    int server_id = 1;
    uint64_t pool_seed = 0;
    /// Dedicated endpoints the central server relays to (central only).
    std::vector<Endpoint> peers;
    /// Handle this many client sessions, then stop. 0 = until stop().
    int sessions = 1;
};

/// One authority process: VERIFY -> (relay wait) -> ANSWER state machine on a
/// listening socket. start() binds (port 0 picks an ephemeral port) and
/// serves on a background thread.
class Server {
  public:
    explicit Server(ServeOptions opts);
    ~Server();

    uint16_t start(uint16_t port = 0); // returns bound port
    void stop();
    void join();

    const std::string& last_error() const { return error_; }

  private:
    void serve_loop();
    void handle_session(int client_fd);

    ServeOptions opts_;
    int listen_fd_ = -1;
    uint16_t port_ = 0;
    std::thread thread_;
    std::atomic<bool> stopping_{false};
    std::string error_;
};

struct ClientResult {
    enum class Status { ok, verify_fail, session_error };
    Status status = Status::ok;
    std::string detail;
    Transcript transcript; // partial on failure
    bool decode_matches_store = false; // only meaningful when a store is supplied
};

struct ClientOptions {
    std::string user = "user";
    /// Endpoints for servers 1..S (S = D for the baseline, D+1 otherwise).
    std::vector<Endpoint> servers;
    std::optional<TimeShare> share;
    /// When set, the client compares its decode against this store (test use).
    const MessageStore* expect_store = nullptr;
};

/// Full live session: verification phase (central relays before answering
/// VERIFY_OK), then retrieval. The resulting transcript is bit-identical to
/// run_scheme() under the same cfg/seed.
ClientResult run_client(const SystemConfig& cfg, const std::string& scheme,
                        const AttributeVector& vstar, uint64_t seed, const ClientOptions& opts);

/// Wire-level inspector for the client->dedicated-server byte stream: the
/// VERIFY_REQ may assert only the server's own position, and no query group
/// may single out a value of any other head attribute (each group either
/// spans a hidden coordinate completely or fixes it, and the fixed values
/// cover the alphabet evenly across groups).
bool inspect_dedicated_stream(const SystemConfig& cfg, int server_id,
                              const std::vector<uint8_t>& stream, std::string* why = nullptr);

} // namespace dapac::net
