#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "dapac/auditor.hpp"
#include "dapac/config.hpp"
#include "dapac/metrics.hpp"
#include "dapac/netsim.hpp"
#include "dapac/sim.hpp"

using namespace dapac;

namespace {

Rational parse_lambda(const std::string& text) {
    auto slash = text.find('/');
    if (slash == std::string::npos) return Rational(std::stoll(text));
    return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
}

std::optional<TimeShare> share_for(const std::string& scheme, const std::string& lambda_text) {
    if (scheme != "timeshare") return std::nullopt;
    if (lambda_text.empty()) throw ConfigError("timeshare needs --lambda a/b");
    return TimeShare{parse_lambda(lambda_text)};
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << content;
}

net::Endpoint parse_endpoint(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos) throw ConfigError("endpoint must be host:port, got " + text);
    return {text.substr(0, colon), uint16_t(std::stoul(text.substr(colon + 1)))};
}

AttributeVector registry_vstar(const ExperimentConfig& exp, const std::string& user) {
    auto it = exp.registry.find(user);
    if (it == exp.registry.end()) {
        if (exp.registry.empty()) throw ConfigError("registry is empty; pass --vstar");
        return exp.registry.begin()->second;
    }
    return it->second;
}

int cmd_run(const ExperimentConfig& exp, const std::string& scheme, const std::string& vstar_text,
            uint64_t seed, const std::string& lambda_text, const std::string& out_dir,
            bool audit, const std::string& user) {
    SystemConfig cfg = exp.sys;
    cfg.seed = seed;
    AttributeVector vstar = vstar_text.empty()
                                ? registry_vstar(exp, user)
                                : cfg.parse_labels(vstar_text);
    auto share = share_for(scheme, lambda_text);

    auto res = run_scheme(cfg, scheme, vstar, seed, {}, share);
    auto m = measure(res.transcript);

    std::cout << "scheme " << scheme << " vstar " << cfg.label_of(vstar) << "\n";
    std::cout << "decode " << (res.decode_matches_store ? "ok" : "MISMATCH") << "\n";
    std::cout << "rate " << m.rate.str() << "  load-ratio " << m.load_ratio.str()
              << "  cr-symbols " << m.cr_symbols << "\n";
    std::cout << "downloads:";
    for (auto d : m.downloads) std::cout << " " << d;
    std::cout << "\n";

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file(std::filesystem::path(out_dir) / "transcript.txt", res.transcript.dump());
        write_file(std::filesystem::path(out_dir) / "metrics.csv",
                   metrics_csv_header() + "\n" + metrics_csv_row(m, cfg) + "\n");
    }

    bool ok = res.decode_matches_store;
    if (audit) {
        std::string report;
        auto corr = audit_correctness(cfg, scheme, 3, 1, std::nullopt, share);
        report += corr.to_string();
        ok = ok && corr.failures == 0;
        if (scheme != "timeshare") {
            int server_count = scheme == "dapac" ? cfg.dedicated_count : cfg.central_server();
            for (int s = 1; s <= server_count; ++s) {
                try {
                    auto pr = audit_attribute_privacy(cfg, scheme, s);
                    report += pr.to_string();
                    if (scheme != "d3") ok = ok && pr.max_tv.is_zero();
                } catch (const DomainTooLarge& e) {
                    report += "attribute-privacy server " + std::to_string(s) +
                              " skipped: " + e.what() + "\n";
                }
            }
            if (uint32_t(cfg.msg_len) == packet_count_for(cfg, scheme)) {
                try {
                    auto sr = audit_database_secrecy(cfg, scheme, seed);
                    report += sr.to_string();
                    if (scheme != "d3") ok = ok && sr.max_tv.is_zero();
                } catch (const DomainTooLarge& e) {
                    report += std::string("database-secrecy skipped: ") + e.what() + "\n";
                }
            }
        }
        bool indep = audit_query_message_independence(cfg, scheme, share);
        report += std::string("query-message independence: ") + (indep ? "true" : "false") + "\n";
        ok = ok && indep;
        std::cout << report;
        if (!out_dir.empty())
            write_file(std::filesystem::path(out_dir) / "audit.txt", report);
    }
    return ok ? 0 : 1;
}

int cmd_audit(const ExperimentConfig& exp, const std::string& scheme, uint64_t seed,
              const std::string& lambda_text, const std::string& out_dir) {
    SystemConfig cfg = exp.sys;
    cfg.seed = seed;
    auto share = share_for(scheme, lambda_text);
    std::string report;

    auto corr = audit_correctness(cfg, scheme, 10, 1, std::nullopt, share);
    report += corr.to_string();
    bool ok = corr.failures == 0;

    if (scheme != "timeshare") {
        int server_count = scheme == "dapac" ? cfg.dedicated_count : cfg.central_server();
        for (int s = 1; s <= server_count; ++s) {
            try {
                auto pr = audit_attribute_privacy(cfg, scheme, s);
                report += pr.to_string();
                if (scheme != "d3") ok = ok && pr.max_tv.is_zero();
            } catch (const DomainTooLarge& e) {
                report += "attribute-privacy server " + std::to_string(s) +
                          " skipped: " + e.what() + "\n";
            }
        }
        if (uint32_t(cfg.msg_len) == packet_count_for(cfg, scheme)) {
            try {
                auto sr = audit_database_secrecy(cfg, scheme, seed);
                report += sr.to_string();
                if (scheme != "d3") ok = ok && sr.max_tv.is_zero();
            } catch (const DomainTooLarge& e) {
                report += std::string("database-secrecy skipped: ") + e.what() + "\n";
            }
        } else {
            report += "database-secrecy skipped: needs L == sub-packet count\n";
        }
    }
    bool indep = audit_query_message_independence(cfg, scheme, share);
    report += std::string("query-message independence: ") + (indep ? "true" : "false") + "\n";
    ok = ok && indep;

    std::cout << report;
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file(std::filesystem::path(out_dir) / "audit.txt", report);
    }
    return ok ? 0 : 1;
}

int cmd_metrics_table(int kmin, int kmax, int dmin, int dmax, int lambda_steps) {
    std::cout << metrics_csv_header() << "\n";
    for (int K = kmin; K <= kmax; ++K) {
        for (int D = dmin; D <= dmax; ++D) {
            int packets = D * (D - 1) / 2;
            int L = std::max(1, packets) * D * 4;
            SystemConfig cfg;
            cfg.attr_count = D + 1;
            cfg.dedicated_count = D;
            cfg.alphabet_size = K;
            cfg.modulus = FieldPrime(257);
            cfg.msg_len = L;
            cfg.alphabets.assign(D + 1, {});
            for (auto& a : cfg.alphabets)
                for (int k = 0; k < K; ++k) a.push_back("v" + std::to_string(k));
            for (const char* scheme : {"dapac", "hetdapac", "d3"}) {
                if (std::string(scheme) == "d3" && D != 3) continue;
                auto m = closed_form(scheme, K, D, L);
                std::cout << metrics_csv_row(m, cfg) << "\n";
            }
            for (int i = 0; i <= lambda_steps; ++i) {
                Rational lam(i, lambda_steps);
                Rational lamL = lam * Rational(L);
                if (lamL.den() != 1 || (lam * Rational(L)).num() % std::max(1, packets) != 0)
                    continue;
                auto m = closed_form("timeshare", K, D, L, lam);
                std::cout << metrics_csv_row(m, cfg) << "\n";
            }
        }
    }
    return 0;
}

uint64_t pool_seed_from_env(const SystemConfig& cfg) {
    if (const char* env = std::getenv("DAPAC_POOL_SEED")) return std::stoull(env);
    return cfg.pool_seed();
}

int cmd_serve(const ExperimentConfig& exp, const std::string& scheme, int server_id,
              uint16_t port, const std::vector<std::string>& peer_texts, int sessions,
              uint64_t seed) {
    SystemConfig cfg = exp.sys;
    cfg.seed = seed;
    net::ServeOptions opts;
    opts.cfg = cfg;
    opts.scheme = scheme;
    opts.registry = exp.registry;
    opts.server_id = server_id;
    opts.pool_seed = pool_seed_from_env(cfg);
    opts.sessions = sessions;
    for (const auto& p : peer_texts) opts.peers.push_back(parse_endpoint(p));
    net::Server server(std::move(opts));
    uint16_t bound = server.start(port);
    std::cout << "server " << server_id << " listening on 127.0.0.1:" << bound << "\n";
    server.join();
    if (!server.last_error().empty()) {
        std::cerr << "session error: " << server.last_error() << "\n";
        return 1;
    }
    return 0;
}

int cmd_client(const ExperimentConfig& exp, const std::string& scheme,
               const std::string& vstar_text, uint64_t seed, const std::string& lambda_text,
               const std::vector<std::string>& server_texts, const std::string& user,
               const std::string& out_dir) {
    SystemConfig cfg = exp.sys;
    cfg.seed = seed;
    AttributeVector vstar =
        vstar_text.empty() ? registry_vstar(exp, user) : cfg.parse_labels(vstar_text);
    net::ClientOptions opts;
    opts.user = user;
    opts.share = share_for(scheme, lambda_text);
    for (const auto& s : server_texts) opts.servers.push_back(parse_endpoint(s));
    MessageStore store = MessageStore::generate(cfg);
    opts.expect_store = &store;

    auto res = net::run_client(cfg, scheme, vstar, seed, opts);
    if (res.status == net::ClientResult::Status::verify_fail) {
        std::cerr << "verification failed: " << res.detail << "\n";
        return 2;
    }
    if (res.status == net::ClientResult::Status::session_error) {
        std::cerr << "session error: " << res.detail << "\n";
        return 3;
    }
    auto m = measure(res.transcript);
    std::cout << "decode " << (res.decode_matches_store ? "ok" : "MISMATCH") << "\n";
    std::cout << "rate " << m.rate.str() << "  load-ratio " << m.load_ratio.str() << "\n";
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file(std::filesystem::path(out_dir) / "transcript.txt", res.transcript.dump());
        write_file(std::filesystem::path(out_dir) / "metrics.csv",
                   metrics_csv_header() + "\n" + metrics_csv_row(m, cfg) + "\n");
    }
    return res.decode_matches_store ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"attribute-based private access control protocol simulator"};
    app.require_subcommand(1);

    std::string config_path, scheme, vstar_text, lambda_text, out_dir, user = "user";
    uint64_t seed = 1;
    bool audit = false;

    auto add_common = [&](CLI::App* cmd, bool need_config = true) {
        if (need_config)
            cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
        cmd->add_option("--scheme", scheme, "dapac | hetdapac | d3 | timeshare (default: config)");
        cmd->add_option("--seed", seed, "master seed");
        cmd->add_option("--lambda", lambda_text, "time-share fraction a/b");
    };

    auto* run = app.add_subcommand("run", "run one in-process protocol session");
    add_common(run);
    run->add_option("--vstar", vstar_text, "attribute labels, e.g. a,2,y");
    run->add_option("--user", user, "registry user whose attributes to retrieve");
    run->add_option("--out", out_dir, "output directory");
    run->add_flag("--audit", audit, "also run the auditors");

    auto* aud = app.add_subcommand("audit", "exhaustive correctness/privacy/secrecy audits");
    add_common(aud);
    aud->add_option("--out", out_dir, "output directory");

    int kmin = 2, kmax = 8, dmin = 2, dmax = 4, lambda_steps = 8;
    auto* mt = app.add_subcommand("metrics-table", "closed-form figures as CSV");
    mt->add_option("--kmin", kmin);
    mt->add_option("--kmax", kmax);
    mt->add_option("--dmin", dmin);
    mt->add_option("--dmax", dmax);
    mt->add_option("--lambda-steps", lambda_steps);

    int server_id = 1, sessions = 1;
    uint16_t port = 0;
    std::vector<std::string> peers, servers;
    auto* srv = app.add_subcommand("serve", "run one authority on a TCP port");
    add_common(srv);
    srv->add_option("--server-id", server_id, "1..D+1 (D+1 = central)")->required();
    srv->add_option("--port", port, "listen port (0 = ephemeral)");
    srv->add_option("--peer", peers, "dedicated endpoints for relaying (central only)");
    srv->add_option("--sessions", sessions, "sessions to serve before exiting (0 = forever)");

    auto* cli = app.add_subcommand("client", "run a live retrieval against servers");
    add_common(cli);
    cli->add_option("--vstar", vstar_text, "attribute labels");
    cli->add_option("--server", servers, "server endpoints host:port, in id order")->required();
    cli->add_option("--user", user, "user id in the registry");
    cli->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (mt->parsed()) return cmd_metrics_table(kmin, kmax, dmin, dmax, lambda_steps);
        ExperimentConfig exp = load_config(config_path);
        if (scheme.empty()) scheme = exp.scheme;
        if (run->parsed())
            return cmd_run(exp, scheme, vstar_text, seed, lambda_text, out_dir, audit, user);
        if (aud->parsed()) return cmd_audit(exp, scheme, seed, lambda_text, out_dir);
        if (srv->parsed())
            return cmd_serve(exp, scheme, server_id, port, peers, sessions, seed);
        if (cli->parsed())
            return cmd_client(exp, scheme, vstar_text, seed, lambda_text, servers, user, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
