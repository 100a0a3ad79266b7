#include "dapac/model.hpp"

#include <algorithm>
#include <sstream>

#include "nlohmann/json.hpp"

namespace dapac {

using json = nlohmann::json;

std::string AttributeVector::index_key() const {
    std::string s;
    for (size_t i = 0; i < coords.size(); ++i) {
        if (i) s += '.';
        s += std::to_string(coords[i]);
    }
    return s;
}

void SystemConfig::validate() const {
    if (attr_count < 1) throw ConfigError("attr_count must be >= 1");
    if (dedicated_count < 1 || dedicated_count > attr_count)
        throw ConfigError("dedicated_count must be in [1, attr_count]");
    if (alphabet_size < 2) throw ConfigError("alphabet_size must be >= 2");
    if (msg_len < 1) throw ConfigError("msg_len must be >= 1");
    if (int(alphabets.size()) != attr_count)
        throw ConfigError("need one alphabet per attribute");
    for (const auto& a : alphabets) {
        if (int(a.size()) != alphabet_size)
            throw ConfigError("every alphabet must list alphabet_size labels");
        for (size_t i = 0; i < a.size(); ++i)
            for (size_t j = i + 1; j < a.size(); ++j)
                if (a[i] == a[j]) throw ConfigError("duplicate label '" + a[i] + "'");
    }
}

bool SystemConfig::valid_vector(const AttributeVector& v) const {
    if (int(v.coords.size()) != attr_count) return false;
    for (auto c : v.coords)
        if (c >= alphabet_size) return false;
    return true;
}

std::string SystemConfig::label_of(const AttributeVector& v) const {
    std::string s;
    for (size_t i = 0; i < v.coords.size(); ++i) {
        if (i) s += ',';
        s += alphabets[i][v.coords[i]];
    }
    return s;
}

AttributeVector SystemConfig::parse_labels(const std::string& csv) const {
    AttributeVector v;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t pos = v.coords.size();
        if (int(pos) >= attr_count) throw ConfigError("too many attribute labels: " + csv);
        auto& alpha = alphabets[pos];
        auto it = std::find(alpha.begin(), alpha.end(), item);
        if (it == alpha.end())
            throw ConfigError("unknown label '" + item + "' for attribute " +
                              std::to_string(pos + 1));
        v.coords.push_back(uint16_t(it - alpha.begin()));
    }
    if (int(v.coords.size()) != attr_count)
        throw ConfigError("expected " + std::to_string(attr_count) + " labels: " + csv);
    return v;
}

std::string SystemConfig::to_json() const {
    json j;
    j["N"] = attr_count;
    j["D"] = dedicated_count;
    j["K"] = alphabet_size;
    j["q"] = modulus.q;
    j["L"] = msg_len;
    j["alphabets"] = alphabets;
    j["seed"] = seed;
    return j.dump();
}

SystemConfig SystemConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    SystemConfig cfg;
    cfg.attr_count = j.at("N").get<int>();
    cfg.dedicated_count = j.at("D").get<int>();
    cfg.alphabet_size = j.at("K").get<int>();
    cfg.modulus = FieldPrime(j.at("q").get<uint32_t>());
    cfg.msg_len = j.at("L").get<int>();
    cfg.alphabets = j.at("alphabets").get<std::vector<std::vector<std::string>>>();
    cfg.seed = j.value("seed", uint64_t(0));
    cfg.validate();
    return cfg;
}

std::vector<AttributeVector> all_vectors(const SystemConfig& cfg) {
    std::vector<AttributeVector> out;
    AttributeVector cur;
    cur.coords.assign(cfg.attr_count, 0);
    while (true) {
        out.push_back(cur);
        int pos = cfg.attr_count - 1;
        while (pos >= 0 && cur.coords[pos] == cfg.alphabet_size - 1) {
            cur.coords[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++cur.coords[pos];
    }
    return out;
}

std::vector<AttributeVector> canonical_order(std::vector<AttributeVector> keys) {
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
}

MessageStore MessageStore::generate(const SystemConfig& cfg) {
    MessageStore store;
    for (const auto& v : all_vectors(cfg)) {
        Rng rng = domain_rng(cfg.msg_seed(), "msg|" + v.index_key());
        store.msgs.emplace(v, rng.elements(cfg.modulus, cfg.msg_len));
    }
    return store;
}

const Message& MessageStore::at(const AttributeVector& v) const {
    auto it = msgs.find(v);
    if (it == msgs.end()) throw Error("no message for key " + v.index_key());
    return it->second;
}

bool DatabaseView::contains(const AttributeVector& v) const {
    return std::binary_search(keys.begin(), keys.end(), v);
}

std::vector<DatabaseView> build_views(const SystemConfig& cfg, const AttributeVector& vstar) {
    if (!cfg.valid_vector(vstar)) throw ConfigError("invalid attribute vector");
    std::vector<DatabaseView> views;
    auto universe = all_vectors(cfg);
    auto tail_matches = [&](const AttributeVector& v) {
        for (int t = cfg.dedicated_count; t < cfg.attr_count; ++t)
            if (v.coords[t] != vstar.coords[t]) return false;
        return true;
    };
    for (int n = 1; n <= cfg.dedicated_count; ++n) {
        DatabaseView view;
        view.server_id = n;
        for (const auto& v : universe)
            if (v.coords[n - 1] == vstar.coords[n - 1] && tail_matches(v)) view.keys.push_back(v);
        views.push_back(std::move(view));
    }
    DatabaseView central;
    central.server_id = cfg.central_server();
    for (const auto& v : universe)
        if (tail_matches(v)) central.keys.push_back(v);
    views.push_back(std::move(central));
    return views;
}

std::vector<Fe> RandomnessPool::chunk(const std::string& key, size_t len) const {
    Rng rng = domain_rng(seed, "pool|" + key);
    return rng.elements(q, len);
}

SubPacketPlan::SubPacketPlan(const std::vector<AttributeVector>& universe, uint32_t packet_count,
                             uint64_t user_seed, bool identity_perms)
    : packet_count_(packet_count) {
    for (const auto& v : canonical_order(universe)) {
        Entry e;
        if (identity_perms) {
            e.perm.resize(packet_count);
            for (uint32_t i = 0; i < packet_count; ++i) e.perm[i] = i;
        } else {
            Rng rng = domain_rng(user_seed, "user-perm|" + v.index_key());
            e.perm = rng.permutation(packet_count);
        }
        entries_.emplace(v, std::move(e));
    }
}

uint32_t SubPacketPlan::fresh_raw(const AttributeVector& v) {
    auto it = entries_.find(v);
    if (it == entries_.end()) throw Error("message not in sub-packet plan: " + v.index_key());
    Entry& e = it->second;
    if (e.cursor >= packet_count_)
        throw Error("sub-packet cursor overflow for " + v.index_key());
    return e.perm[e.cursor++];
}

uint32_t SubPacketPlan::used(const AttributeVector& v) const {
    auto it = entries_.find(v);
    return it == entries_.end() ? 0 : it->second.cursor;
}

VerificationOutcome verify_attributes(const SystemConfig& cfg, const AttributeVector& asserted,
                                      const Registry& registry, const std::string& user) {
    if (!cfg.valid_vector(asserted)) throw ConfigError("invalid asserted attribute vector");
    auto it = registry.find(user);
    if (it == registry.end()) throw ConfigError("user not in registry: " + user);
    const AttributeVector& truth = it->second;

    VerificationOutcome out;
    for (int n = 1; n <= cfg.dedicated_count; ++n) {
        if (asserted.coords[n - 1] != truth.coords[n - 1])
            throw VerificationFailed(n, "server " + std::to_string(n) + " rejected attribute " +
                                            std::to_string(n));
        out.accepted.push_back(n);
    }
    for (int t = cfg.dedicated_count; t < cfg.attr_count; ++t) {
        if (asserted.coords[t] != truth.coords[t])
            throw VerificationFailed(cfg.central_server(),
                                     "central server rejected attribute " + std::to_string(t + 1));
        out.relayed.emplace_back(uint16_t(t + 1), asserted.coords[t]);
    }
    out.accepted.push_back(cfg.central_server());

    out.knowledge.resize(cfg.dedicated_count + 1);
    for (int n = 1; n <= cfg.dedicated_count; ++n) {
        out.knowledge[n - 1].emplace_back(uint16_t(n), asserted.coords[n - 1]);
        for (auto& r : out.relayed) out.knowledge[n - 1].push_back(r);
    }
    out.knowledge[cfg.dedicated_count] = out.relayed;
    return out;
}

} // namespace dapac
