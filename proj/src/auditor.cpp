#include "dapac/auditor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dapac/wire.hpp"

namespace dapac {

bool DistributionTable::uniform() const {
    for (const auto& [k, p] : entries)
        if (p != entries.front().second) return false;
    return true;
}

Rational DistributionTable::total() const {
    Rational t(0);
    for (const auto& [k, p] : entries) t += p;
    return t;
}

namespace {

uint64_t factorial(uint32_t n) {
    uint64_t f = 1;
    for (uint32_t i = 2; i <= n; ++i) f *= i;
    return f;
}

/// All permutations of 0..n-1 in lexicographic order.
std::vector<std::vector<uint32_t>> all_permutations(uint32_t n) {
    std::vector<uint32_t> cur(n);
    for (uint32_t i = 0; i < n; ++i) cur[i] = i;
    std::vector<std::vector<uint32_t>> out;
    do {
        out.push_back(cur);
    } while (std::next_permutation(cur.begin(), cur.end()));
    return out;
}

std::string join_u32(const std::vector<uint32_t>& vals) {
    std::string s;
    for (size_t i = 0; i < vals.size(); ++i) {
        if (i) s += '.';
        s += std::to_string(vals[i]);
    }
    return s;
}

/// Observable tuple of one message's raw indices under a uniform private
/// permutation, enumerated over all P! permutations.
DistributionTable index_atom(const std::vector<uint32_t>& slots, uint32_t packets) {
    std::map<std::string, int64_t> counts;
    auto perms = all_permutations(packets);
    for (const auto& p : perms) {
        std::vector<uint32_t> obs;
        obs.reserve(slots.size());
        for (uint32_t s : slots) obs.push_back(p[s]);
        counts[join_u32(obs)]++;
    }
    DistributionTable t;
    int64_t total = int64_t(factorial(packets));
    for (auto& [k, c] : counts) t.entries.emplace_back(k, Rational(c, total));
    t.domain = "perm[" + std::to_string(packets) + "]^" + std::to_string(slots.size());
    if (t.total() != Rational(1)) throw Error("index atom probabilities do not sum to 1");
    return t;
}

/// Observable coefficient vector of one group: fresh uniform of h_len
/// symbols, optionally conditioned nonzero at one coordinate, optionally
/// shifted by a unit vector; enumerated over all draws.
DistributionTable coeff_atom(const GroupAudit& ga, FieldPrime q, uint64_t state_bound) {
    DistributionTable t;
    int64_t states = 1;
    for (int i = 0; i < ga.h_len; ++i) {
        states *= (i == ga.nonzero_pos) ? (q.q - 1) : q.q;
        if (uint64_t(states) > state_bound)
            throw DomainTooLarge("coefficient domain q^" + std::to_string(ga.h_len) +
                                 " exceeds the enumeration bound; audit at q=2 or 3");
    }
    std::vector<uint32_t> draw(ga.h_len, 0);
    for (int i = 0; i < ga.h_len; ++i)
        if (i == ga.nonzero_pos) draw[i] = 1;
    std::map<std::string, int64_t> counts;
    while (true) {
        std::vector<uint32_t> obs = draw;
        if (ga.offset_pos >= 0) obs[ga.offset_pos] = (obs[ga.offset_pos] + 1) % q.q;
        counts[join_u32(obs)]++;
        int i = ga.h_len - 1;
        for (; i >= 0; --i) {
            uint32_t lo = (i == ga.nonzero_pos) ? 1u : 0u;
            if (draw[i] + 1 < q.q) {
                ++draw[i];
                break;
            }
            draw[i] = lo;
        }
        if (i < 0) break;
    }
    for (auto& [k, c] : counts) t.entries.emplace_back(k, Rational(c, states));
    t.domain = "F" + std::to_string(q.q) + "^" + std::to_string(ga.h_len);
    if (t.total() != Rational(1)) throw Error("coefficient atom probabilities do not sum to 1");
    return t;
}

struct Atom {
    std::string name;
    DistributionTable table;
};

bool same_table(const DistributionTable& a, const DistributionTable& b) {
    return a.entries == b.entries;
}

int64_t intersection_size(const DistributionTable& a, const DistributionTable& b) {
    int64_t n = 0;
    size_t i = 0, j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
        int cmp = a.entries[i].first.compare(b.entries[j].first);
        if (cmp == 0) {
            ++n;
            ++i;
            ++j;
        } else if (cmp < 0)
            ++i;
        else
            ++j;
    }
    return n;
}

double entropy_bits(const std::vector<double>& probs) {
    double h = 0;
    for (double p : probs)
        if (p > 0) h -= p * std::log2(p);
    return h;
}

/// I(V;A) for one atom with uniform hypothesis prior, evaluated in double.
double atom_mi_bits(const std::vector<const DistributionTable*>& tables) {
    std::map<std::string, double> mix;
    for (const auto* t : tables)
        for (const auto& [k, p] : t->entries)
            mix[k] += double(p.num()) / double(p.den()) / double(tables.size());
    std::vector<double> mixed;
    for (auto& [k, p] : mix) mixed.push_back(p);
    double h_q = entropy_bits(mixed);
    double h_q_given_v = 0;
    for (const auto* t : tables) {
        std::vector<double> ps;
        for (const auto& [k, p] : t->entries) ps.push_back(double(p.num()) / double(p.den()));
        h_q_given_v += entropy_bits(ps) / double(tables.size());
    }
    return std::max(0.0, h_q - h_q_given_v);
}

/// TV distance of two products of independent uniform atoms:
/// 1 - |joint support intersection| * min(state probabilities).
Rational product_tv(const std::vector<Atom>& a, const std::vector<Atom>& b) {
    Rational prob_a(1), prob_b(1), inter(1);
    for (size_t i = 0; i < a.size(); ++i) {
        if (!a[i].table.uniform() || !b[i].table.uniform())
            throw Error("product TV shortcut requires uniform atoms");
        prob_a *= a[i].table.entries.front().second;
        prob_b *= b[i].table.entries.front().second;
        inter *= Rational(intersection_size(a[i].table, b[i].table));
    }
    Rational min_p = prob_a < prob_b ? prob_a : prob_b;
    return Rational(1) - inter * min_p;
}

/// Exact joint MI over the given atoms (product per hypothesis), double.
double joint_mi_bits(const std::vector<std::vector<const DistributionTable*>>& per_hyp) {
    size_t hyps = per_hyp.size();
    size_t atoms = per_hyp[0].size();
    std::map<std::string, std::vector<double>> joint; // key -> per-hyp prob
    std::vector<size_t> idx(atoms, 0);
    // enumerate over the union of supports atom-by-atom, recursively
    struct Walker {
        const std::vector<std::vector<const DistributionTable*>>& per_hyp;
        size_t hyps, atoms;
        std::map<std::string, std::vector<double>>& joint;
        std::vector<std::set<std::string>> unions;

        void walk(size_t depth, const std::string& key, std::vector<double> probs) {
            if (depth == atoms) {
                auto& cell = joint[key];
                if (cell.empty()) cell = probs;
                return;
            }
            for (const auto& obs : unions[depth]) {
                std::vector<double> next = probs;
                for (size_t h = 0; h < hyps; ++h) {
                    const auto& entries = per_hyp[h][depth]->entries;
                    auto it = std::lower_bound(
                        entries.begin(), entries.end(), obs,
                        [](const auto& e, const std::string& k) { return e.first < k; });
                    double p = (it != entries.end() && it->first == obs)
                                   ? double(it->second.num()) / double(it->second.den())
                                   : 0.0;
                    next[h] *= p;
                }
                walk(depth + 1, key + "|" + obs, std::move(next));
            }
        }
    } w{per_hyp, hyps, atoms, joint, {}};
    w.unions.resize(atoms);
    for (size_t a = 0; a < atoms; ++a)
        for (size_t h = 0; h < hyps; ++h)
            for (const auto& [k, p] : per_hyp[h][a]->entries) w.unions[a].insert(k);
    w.walk(0, "", std::vector<double>(hyps, 1.0));

    std::vector<double> mixed;
    double h_cond = 0;
    std::vector<std::vector<double>> per_hyp_probs(hyps);
    for (auto& [k, probs] : joint) {
        double mix = 0;
        for (size_t h = 0; h < hyps; ++h) {
            mix += probs[h] / double(hyps);
            per_hyp_probs[h].push_back(probs[h]);
        }
        mixed.push_back(mix);
    }
    for (size_t h = 0; h < hyps; ++h) h_cond += entropy_bits(per_hyp_probs[h]) / double(hyps);
    return std::max(0.0, entropy_bits(mixed) - h_cond);
}

std::string skeleton_bytes(const ServerQuery& q) {
    // group structure and member keys only; indices and coefficients are the
    // random observables handled by the atoms
    std::string s;
    s += std::to_string(uint8_t(q.scheme)) + ";" + std::to_string(q.packet_len) + ";";
    for (const auto& g : q.groups) {
        s += "[";
        for (const auto& m : g.members) s += m.key.index_key() + ",";
        s += "]";
    }
    return s;
}

struct HypothesisView {
    AttributeVector vstar;
    std::string skeleton;
    std::vector<Atom> atoms;
};

} // namespace

PrivacyReport audit_attribute_privacy(const SystemConfig& cfg, const std::string& scheme,
                                      int server_id, uint64_t state_bound) {
    auto t0 = std::chrono::steady_clock::now();
    PrivacyReport rep;
    rep.scheme = scheme;
    rep.server_id = server_id;

    int D = cfg.dedicated_count;
    if (scheme == "dapac" && D != cfg.attr_count)
        throw ConfigError("baseline audit requires D == N");
    int central = cfg.central_server();
    bool is_central = (server_id == central);
    if (scheme == "dapac" && is_central) throw ConfigError("baseline has no central server");
    if (server_id < 1 || server_id > central) throw ConfigError("bad server id");

    std::vector<int> hidden;
    for (int p = 1; p <= D; ++p)
        if (is_central || p != server_id) hidden.push_back(p);

    // hypotheses: every assignment of the hidden head attributes
    std::vector<AttributeVector> hyps;
    AttributeVector base;
    base.coords.assign(cfg.attr_count, 0);
    std::vector<int> digits(hidden.size(), 0);
    while (true) {
        AttributeVector v = base;
        for (size_t i = 0; i < hidden.size(); ++i) v.coords[hidden[i] - 1] = uint16_t(digits[i]);
        hyps.push_back(v);
        int i = int(hidden.size()) - 1;
        for (; i >= 0; --i) {
            if (++digits[i] < cfg.alphabet_size) break;
            digits[i] = 0;
        }
        if (i < 0) break;
    }
    rep.hypotheses = int(hyps.size());

    uint32_t packets = packet_count_for(cfg, scheme);
    if (factorial(packets) > state_bound)
        throw DomainTooLarge("permutation domain " + std::to_string(packets) +
                             "! exceeds the enumeration bound");
    std::vector<HypothesisView> views;
    for (const auto& vstar : hyps) {
        auto universe = build_views(cfg, vstar).back().keys;
        SubPacketPlan plan(universe, packets, 0, /*identity*/ true);
        Rng rng(0);
        auto built = build_for(cfg, scheme, vstar, plan, rng);
        const ServerQuery& q = built.queries[server_id - 1];
        const auto& audits = built.info.per_server[server_id - 1];

        HypothesisView hv;
        hv.vstar = vstar;
        hv.skeleton = skeleton_bytes(q);

        // per-message slots in query order; identity permutations make the
        // raw indices equal the cursor slots
        std::map<AttributeVector, std::vector<uint32_t>> slots;
        for (const auto& g : q.groups)
            for (const auto& m : g.members) slots[m.key].push_back(m.subpacket);
        for (const auto& [key, s] : slots)
            hv.atoms.push_back({"idx|" + key.index_key(), index_atom(s, packets)});
        for (size_t g = 0; g < q.groups.size(); ++g)
            hv.atoms.push_back(
                {"coef|" + std::to_string(g), coeff_atom(audits[g], cfg.modulus, state_bound)});
        views.push_back(std::move(hv));
    }

    // nominal full domain: permutations of every visible message times the
    // support of every coefficient draw
    double log2_domain = 0;
    for (const auto& a : views.front().atoms) {
        if (a.name.rfind("idx|", 0) == 0)
            log2_domain += std::log2(double(factorial(packets)));
        else
            log2_domain += std::log2(double(a.table.entries.size()));
    }
    rep.nominal_domain_log2 = log2_domain;
    rep.atoms = views.front().atoms.size();

    for (size_t h = 1; h < views.size(); ++h) {
        if (views[h].skeleton != views.front().skeleton) {
            rep.max_tv = Rational(1);
            rep.notes.push_back("query skeleton differs across hypotheses (leak)");
            return rep;
        }
        if (views[h].atoms.size() != views.front().atoms.size())
            throw Error("atom count mismatch despite equal skeleton");
        for (size_t a = 0; a < views[h].atoms.size(); ++a)
            if (views[h].atoms[a].name != views.front().atoms[a].name)
                throw Error("atom alignment mismatch");
    }

    // atoms differing between at least one hypothesis pair
    std::vector<size_t> differing;
    for (size_t a = 0; a < views.front().atoms.size(); ++a) {
        bool same = true;
        for (size_t h = 1; h < views.size() && same; ++h)
            same = same_table(views[h].atoms[a].table, views.front().atoms[a].table);
        if (!same) differing.push_back(a);
    }
    rep.differing_atoms = differing.size();

    Rational max_tv(0);
    for (size_t h1 = 0; h1 < views.size(); ++h1) {
        for (size_t h2 = h1 + 1; h2 < views.size(); ++h2) {
            std::vector<Atom> a, b;
            for (size_t idx : differing) {
                a.push_back(views[h1].atoms[idx]);
                b.push_back(views[h2].atoms[idx]);
            }
            Rational tv = product_tv(a, b);
            if (max_tv < tv) max_tv = tv;
        }
    }
    rep.max_tv = max_tv;

    // MI report: per-atom subadditive bound always; exact joint when small
    double mi_upper = 0;
    uint64_t kept_joint = 1;
    bool joint_feasible = true;
    for (size_t idx : differing) {
        std::vector<const DistributionTable*> tables;
        std::set<std::string> support;
        for (const auto& hv : views) {
            tables.push_back(&hv.atoms[idx].table);
            for (const auto& [k, p] : hv.atoms[idx].table.entries) support.insert(k);
        }
        mi_upper += atom_mi_bits(tables);
        if (kept_joint > state_bound / std::max<uint64_t>(support.size(), 1))
            joint_feasible = false;
        else
            kept_joint *= support.size();
    }
    rep.mi_bits_upper = mi_upper;
    if (differing.empty()) {
        rep.mi_bits = 0.0;
        rep.notes.push_back("all atoms identical across hypotheses");
    } else if (joint_feasible && kept_joint <= (uint64_t(1) << 20)) {
        std::vector<std::vector<const DistributionTable*>> per_hyp;
        for (const auto& hv : views) {
            std::vector<const DistributionTable*> ts;
            for (size_t idx : differing) ts.push_back(&hv.atoms[idx].table);
            per_hyp.push_back(std::move(ts));
        }
        rep.mi_bits = joint_mi_bits(per_hyp);
    }
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return rep;
}

SecrecyReport audit_database_secrecy(const SystemConfig& cfg, const std::string& scheme,
                                     uint64_t seed, bool use_pads, uint64_t state_bound) {
    auto t0 = std::chrono::steady_clock::now();
    SecrecyReport rep;
    rep.scheme = scheme;

    uint32_t packets = packet_count_for(cfg, scheme);
    if (uint32_t(cfg.msg_len) != packets)
        throw ConfigError("secrecy audit needs L == sub-packet count (1-symbol chunks)");

    SystemConfig run_cfg = cfg;
    run_cfg.seed = seed;
    AttributeVector vstar;
    vstar.coords.assign(cfg.attr_count, 0);
    auto views = build_views(run_cfg, vstar);
    auto universe = views.back().keys;

    SubPacketPlan plan(universe, packets, derive_seed(run_cfg.user_seed(), "main"));
    Rng rng = domain_rng(run_cfg.user_seed(), "user-coeff|main");
    auto built = build_for(run_cfg, scheme, vstar, plan, rng);

    // chunk keys touched by the whole session, in deterministic order
    std::vector<std::string> chunk_order;
    std::map<std::string, size_t> chunk_index;
    struct GroupPads {
        int server;
        const QueryGroup* group;
        std::vector<size_t> pads;
    };
    std::vector<GroupPads> items;
    for (size_t s = 0; s < built.queries.size(); ++s) {
        for (const auto& g : built.queries[s].groups) {
            GroupPads gp{int(s + 1), &g, {}};
            if (use_pads)
                for (const auto& ck : group_chunk_keys(run_cfg, built.queries[s], int(s + 1), g)) {
                    auto it = chunk_index.find(ck);
                    if (it == chunk_index.end()) {
                        it = chunk_index.emplace(ck, chunk_order.size()).first;
                        chunk_order.push_back(ck);
                    }
                    gp.pads.push_back(it->second);
                }
            items.push_back(std::move(gp));
        }
    }

    uint64_t q = cfg.modulus.q;
    uint64_t states = 1;
    for (size_t i = 0; i < chunk_order.size(); ++i) {
        if (states > state_bound / q) throw DomainTooLarge("pool domain exceeds bound");
        states *= q;
    }
    rep.pool_states = states;

    // fixed (pad-free) answer parts per store; answers are 1 symbol wide
    auto fixed_parts = [&](const MessageStore& store) {
        std::vector<uint16_t> parts;
        for (const auto& item : items) {
            Fe acc = fe_zero(cfg.modulus);
            for (size_t i = 0; i < item.group->members.size(); ++i) {
                const auto& m = item.group->members[i];
                acc += item.group->coeffs[i] * store.at(m.key)[m.subpacket];
            }
            parts.push_back(acc.value());
        }
        return parts;
    };

    auto table_for = [&](const std::vector<uint16_t>& parts) {
        DistributionTable t;
        std::map<std::string, int64_t> counts;
        std::vector<uint16_t> pad(chunk_order.size(), 0);
        while (true) {
            std::string obs;
            for (size_t i = 0; i < items.size(); ++i) {
                uint32_t v = parts[i];
                for (size_t pi : items[i].pads) v += pad[pi];
                obs += std::to_string(v % q) + ".";
            }
            counts[obs]++;
            int i = int(pad.size()) - 1;
            for (; i >= 0; --i) {
                if (uint64_t(pad[i]) + 1 < q) {
                    ++pad[i];
                    break;
                }
                pad[i] = 0;
            }
            if (i < 0) break;
        }
        for (auto& [k, c] : counts) t.entries.emplace_back(k, Rational(c, int64_t(states)));
        return t;
    };

    MessageStore base = MessageStore::generate(run_cfg);
    auto base_table = table_for(fixed_parts(base));

    // all keys a query can touch, minus the designated one
    std::set<AttributeVector> touched;
    for (const auto& q2 : built.queries)
        for (const auto& g : q2.groups)
            for (const auto& m : g.members)
                if (!(m.key == vstar)) touched.insert(m.key);

    Rational max_tv(0);
    for (const auto& key : touched) {
        for (int sym = 0; sym < cfg.msg_len; ++sym) {
            MessageStore alt = base;
            alt.msgs[key][sym] += fe_one(cfg.modulus);
            auto alt_table = table_for(fixed_parts(alt));
            // both tables are uniform over equally sized supports
            Rational tv(0);
            {
                int64_t inter = intersection_size(base_table, alt_table);
                Rational pa = base_table.entries.front().second;
                Rational pb = alt_table.entries.front().second;
                if (!base_table.uniform() || !alt_table.uniform())
                    throw Error("expected uniform answer tables");
                Rational min_p = pa < pb ? pa : pb;
                tv = Rational(1) - Rational(inter) * min_p;
            }
            ++rep.substitutions;
            if (max_tv < tv) max_tv = tv;
            if (!tv.is_zero())
                rep.notes.push_back("substitution " + key.index_key() + "[" +
                                    std::to_string(sym) + "] -> TV " + tv.str());
        }
    }
    rep.max_tv = max_tv;
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return rep;
}

CorrectnessReport audit_correctness(const SystemConfig& cfg, const std::string& scheme,
                                    int seeds, uint64_t seed_base,
                                    std::optional<CorruptAnswer> fault,
                                    std::optional<TimeShare> share) {
    CorrectnessReport rep;
    rep.scheme = scheme;
    RunOptions opts;
    opts.corrupt = fault;
    for (const auto& vstar : all_vectors(cfg)) {
        for (int s = 0; s < seeds; ++s) {
            auto res = run_scheme(cfg, scheme, vstar, seed_base + uint64_t(s), opts, share);
            ++rep.runs;
            if (!res.decode_matches_store) {
                ++rep.failures;
                if (rep.failed_cases.size() < 16)
                    rep.failed_cases.push_back(vstar.index_key() + " seed " +
                                               std::to_string(seed_base + uint64_t(s)));
            }
        }
    }
    return rep;
}

bool audit_query_message_independence(const SystemConfig& cfg, const std::string& scheme,
                                      std::optional<TimeShare> share, QueryBuilderFn builder) {
    if (!builder)
        builder = [&](const SystemConfig& c, const AttributeVector& v, uint64_t s,
                      const MessageStore& st) { return build_query_frames(c, scheme, v, s, st, share); };
    SystemConfig cfg_b = cfg;
    cfg_b.seed = cfg.seed + 0x5eedULL;
    MessageStore store_a = MessageStore::generate(cfg);
    MessageStore store_b = MessageStore::generate(cfg_b);

    auto universe = all_vectors(cfg);
    for (uint64_t seed = 1; seed <= 3; ++seed) {
        for (size_t i = 0; i < universe.size(); i += std::max<size_t>(1, universe.size() / 4)) {
            auto fa = builder(cfg, universe[i], seed, store_a);
            auto fb = builder(cfg, universe[i], seed, store_b);
            if (fa != fb) return false;
        }
    }
    return true;
}

std::string PrivacyReport::to_string() const {
    std::ostringstream os;
    os << "attribute-privacy scheme=" << scheme << " server=" << server_id
       << " hypotheses=" << hypotheses << "\n";
    os << "  nominal domain ~2^" << nominal_domain_log2 << " states, atoms=" << atoms
       << " differing=" << differing_atoms << "\n";
    os << "  max TV distance = " << max_tv.str() << "\n";
    os << "  MI upper bound = " << mi_bits_upper << " bits";
    if (mi_bits) os << ", exact joint MI = " << *mi_bits << " bits";
    os << "\n";
    os << "  wall time = " << wall_ms << " ms\n";
    for (const auto& n : notes) os << "  note: " << n << "\n";
    return os.str();
}

std::string SecrecyReport::to_string() const {
    std::ostringstream os;
    os << "database-secrecy scheme=" << scheme << " substitutions=" << substitutions
       << " pool_states=" << pool_states << "\n";
    os << "  max TV distance = " << max_tv.str() << "\n";
    os << "  wall time = " << wall_ms << " ms\n";
    for (const auto& n : notes) os << "  note: " << n << "\n";
    return os.str();
}

std::string CorrectnessReport::to_string() const {
    std::ostringstream os;
    os << "correctness scheme=" << scheme << " runs=" << runs << " failures=" << failures << "\n";
    for (const auto& c : failed_cases) os << "  failed: " << c << "\n";
    return os.str();
}

} // namespace dapac
