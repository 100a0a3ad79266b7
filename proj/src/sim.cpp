#include "dapac/sim.hpp"

#include "dapac/scheme_d3.hpp"
#include "dapac/scheme_dapac.hpp"
#include "dapac/scheme_hetdapac.hpp"
#include "dapac/wire.hpp"

namespace dapac {

uint32_t packet_count_for(const SystemConfig& cfg, const std::string& scheme) {
    if (scheme == "dapac") return dapac_packet_count(cfg.dedicated_count);
    if (scheme == "hetdapac") return uint32_t(cfg.dedicated_count);
    if (scheme == "d3") return d3_packet_count;
    throw ConfigError("unknown scheme: " + scheme);
}

BuiltQueries build_for(const SystemConfig& cfg, const std::string& scheme,
                       const AttributeVector& vstar, SubPacketPlan& plan, Rng& rng,
                       uint32_t base_offset, uint32_t span_len) {
    if (scheme == "dapac") return dapac_build_queries(cfg, vstar, plan, rng, base_offset, span_len);
    if (scheme == "hetdapac")
        return het_build_queries(cfg, vstar, plan, rng, base_offset, span_len);
    if (scheme == "d3") return d3_build_queries(cfg, vstar, plan, rng, base_offset, span_len);
    throw ConfigError("unknown scheme: " + scheme);
}

namespace {

struct Phase {
    std::string scheme;
    uint32_t base_offset;
    uint32_t span_len;
    std::string domain; // seed domain separator
};

std::vector<Phase> plan_phases(const SystemConfig& cfg, const std::string& scheme,
                               std::optional<TimeShare> share) {
    uint32_t L = uint32_t(cfg.msg_len);
    if (scheme == "timeshare") {
        if (!share) throw ConfigError("timeshare needs a lambda");
        Rational lam = share->lambda;
        if (lam < Rational(0) || lam > Rational(1))
            throw ConfigError("lambda must lie in [0, 1]");
        Rational first = lam * Rational(cfg.msg_len);
        if (first.den() != 1) throw ConfigError("lambda*L is not an integer");
        uint32_t la = uint32_t(first.num());
        // degenerate endpoints collapse to the pure schemes, transcript
        // included, so lambda=0 is byte-identical to a hybrid run
        if (la == 0) return {{"hetdapac", 0, L, "main"}};
        if (la == L) return {{"dapac", 0, L, "main"}};
        return {{"dapac", 0, la, "ts-a"}, {"hetdapac", la, L - la, "ts-b"}};
    }
    if (scheme == "dapac" && cfg.dedicated_count != cfg.attr_count)
        throw ConfigError("standalone baseline requires D == N");
    return {{scheme, 0, L, "main"}};
}

} // namespace

std::vector<std::vector<uint8_t>> build_query_frames(const SystemConfig& cfg,
                                                     const std::string& scheme,
                                                     const AttributeVector& vstar, uint64_t seed,
                                                     const MessageStore& store,
                                                     std::optional<TimeShare> share) {
    (void)store; // queries are a function of (cfg, vstar, user randomness) only
    SystemConfig run_cfg = cfg;
    run_cfg.seed = seed;
    auto phases = plan_phases(run_cfg, scheme, share);
    auto universe = build_views(run_cfg, vstar).back().keys;

    std::vector<std::vector<uint8_t>> frames;
    for (const auto& ph : phases) {
        uint32_t packets = packet_count_for(run_cfg, ph.scheme);
        SubPacketPlan plan(universe, packets, derive_seed(run_cfg.user_seed(), ph.domain));
        Rng rng = domain_rng(run_cfg.user_seed(), "user-coeff|" + ph.domain);
        auto built = build_for(run_cfg, ph.scheme, vstar, plan, rng, ph.base_offset, ph.span_len);
        for (size_t s = 0; s < built.queries.size(); ++s) {
            if (frames.size() <= s) frames.resize(s + 1);
            auto f = wire::query_frame(built.queries[s]);
            frames[s].insert(frames[s].end(), f.begin(), f.end());
        }
    }
    return frames;
}

RunResult run_scheme(const SystemConfig& cfg, const std::string& scheme,
                     const AttributeVector& vstar, uint64_t seed, const RunOptions& opts,
                     std::optional<TimeShare> share) {
    SystemConfig run_cfg = cfg;
    run_cfg.seed = seed;
    auto phases = plan_phases(run_cfg, scheme, share);

    Registry registry;
    registry[opts.user] = opts.registry_truth.value_or(vstar);

    RunResult res;
    res.outcome = verify_attributes(run_cfg, vstar, registry, opts.user);

    MessageStore store = MessageStore::generate(run_cfg);
    RandomnessPool pool(run_cfg.pool_seed(), run_cfg.modulus);
    auto views = build_views(run_cfg, vstar);
    auto universe = views.back().keys;

    int server_count = (scheme == "dapac") ? run_cfg.dedicated_count : run_cfg.central_server();

    Transcript& t = res.transcript;
    t.scheme = scheme;
    t.config_json = run_cfg.to_json();
    t.seed = seed;
    t.vstar = vstar;
    if (share) t.lambda = share->lambda;
    t.servers.resize(server_count);

    // verification frames
    std::vector<uint8_t> relay_frame =
        wire::encode_frame({wire::ATTR_RELAY, wire::encode_relay(res.outcome.relayed)});
    for (int s = 1; s <= server_count; ++s) {
        ServerRecord& sr = t.servers[s - 1];
        sr.server_id = s;
        wire::VerifyRequest req;
        req.user = opts.user;
        if (s <= run_cfg.dedicated_count) {
            req.asserted = {{uint16_t(s), vstar.coords[s - 1]}};
            if (scheme != "dapac") sr.relay_received = relay_frame;
        } else {
            for (int p = run_cfg.dedicated_count + 1; p <= run_cfg.attr_count; ++p)
                req.asserted.emplace_back(uint16_t(p), vstar.coords[p - 1]);
            sr.relays_sent.assign(run_cfg.dedicated_count, relay_frame);
        }
        sr.verify_req = wire::encode_frame({wire::VERIFY_REQ, wire::encode_verify_request(req)});
        sr.verify_resp = wire::encode_frame({wire::VERIFY_OK, {}});
    }

    // retrieval phases
    std::vector<std::vector<Fe>> decoded_spans;
    std::vector<std::pair<uint32_t, uint32_t>> span_ranges;
    for (const auto& ph : phases) {
        uint32_t packets = packet_count_for(run_cfg, ph.scheme);
        SubPacketPlan plan(universe, packets, derive_seed(run_cfg.user_seed(), ph.domain),
                           opts.identity_perms);
        Rng rng = domain_rng(run_cfg.user_seed(), "user-coeff|" + ph.domain);
        auto built = build_for(run_cfg, ph.scheme, vstar, plan, rng, ph.base_offset, ph.span_len);

        std::vector<ServerAnswer> answers(built.queries.size());
        for (size_t s = 0; s < built.queries.size(); ++s) {
            const ServerQuery& q = built.queries[s];
            auto result = answer_query(run_cfg, views[s], store, q, pool, int(s + 1));
            if (opts.corrupt && opts.corrupt->server == int(s + 1) &&
                opts.corrupt->group < int(result.answers.size())) {
                Answer& a = result.answers[opts.corrupt->group];
                if (opts.corrupt->symbol < int(a.size()))
                    a[opts.corrupt->symbol] +=
                        Fe::reduced(opts.corrupt->delta, run_cfg.modulus);
            }
            answers[s] = result.answers;

            PhaseRecord ph_rec;
            ph_rec.query_frame = wire::query_frame(q);
            ph_rec.answer_frame = wire::answer_frame(result.answers);
            ph_rec.chunk_keys = result.chunk_keys;
            ph_rec.packet_len = q.packet_len;
            for (const auto& a : result.answers) ph_rec.downloaded_symbols += a.size();
            t.servers[s].phases.push_back(std::move(ph_rec));
        }
        decoded_spans.push_back(decode_span(run_cfg, answers, built.recipe));
        span_ranges.emplace_back(ph.base_offset, ph.span_len);
    }

    res.decoded.assign(size_t(run_cfg.msg_len), fe_zero(run_cfg.modulus));
    for (size_t i = 0; i < decoded_spans.size(); ++i) {
        auto [base, len] = span_ranges[i];
        if (decoded_spans[i].size() != len) throw DecodeError("span length mismatch");
        std::copy(decoded_spans[i].begin(), decoded_spans[i].end(), res.decoded.begin() + base);
    }

    t.decoded = res.decoded;
    res.decode_matches_store = (res.decoded == store.at(vstar));
    t.decode_ok = res.decode_matches_store;
    return res;
}

} // namespace dapac
