#include "dapac/metrics.hpp"

#include <map>
#include <sstream>

namespace dapac {

Rational timeshare_rate(int K, Rational lambda) {
    Rational one(1);
    return one / (Rational(K) * (one + lambda) + (one - lambda));
}

Rational timeshare_load_ratio(int K, int D, Rational lambda) {
    Rational one(1);
    if (lambda == one) throw DivisionByZero("load ratio diverges at lambda = 1");
    return Rational(1, int64_t(K) * D) +
           (Rational(2) * lambda) / (Rational(D) * (one - lambda));
}

Rational rate_from_load_ratio(int K, int D, Rational ell) {
    Rational k(K), kd(int64_t(K) * D);
    Rational inner = (ell * k * k * Rational(D) + k) / (ell * kd + Rational(2) * k - Rational(1));
    return Rational(1) / (k + inner);
}

SchemeMetrics closed_form(const std::string& scheme, int K, int D, int L,
                          std::optional<Rational> lambda) {
    if (K < 2 || D < 1) throw ConfigError("closed forms need K >= 2, D >= 1");
    SchemeMetrics m;
    m.scheme = scheme;
    if (scheme == "hetdapac") {
        m.rate = Rational(1, K + 1);
        m.load_ratio = LoadRatio::of(Rational(1, int64_t(K) * D));
        m.cr_symbols = int64_t(K) * L;
        int64_t plen = L / D;
        m.downloads.assign(D, plen);
        m.downloads.push_back(int64_t(K) * D * plen);
        return m;
    }
    if (scheme == "dapac") {
        m.rate = Rational(1, 2 * int64_t(K));
        m.load_ratio = LoadRatio::infinite();
        m.cr_symbols = int64_t(K) * K * L; // nominal budget; construction uses (2K-1)L
        m.cr_is_nominal = true;
        int64_t packets = int64_t(D) * (D - 1) / 2;
        int64_t plen = L / packets;
        m.downloads.assign(D, int64_t(K) * (D - 1) * plen);
        return m;
    }
    if (scheme == "d3") {
        if (D != 3) throw ConfigError("the 2/(3K) scheme is defined for D = 3");
        m.rate = Rational(2, 3 * int64_t(K));
        m.load_ratio = LoadRatio::of(Rational(2, 3));
        m.cr_symbols = int64_t(K) * K * L / 2;
        int64_t plen = L / 6;
        m.downloads.assign(3, 2 * int64_t(K) * plen);
        m.downloads.push_back(3 * int64_t(K) * plen);
        return m;
    }
    if (scheme == "timeshare") {
        if (!lambda) throw ConfigError("timeshare needs lambda");
        Rational lam = *lambda;
        m.lambda = lam;
        m.rate = timeshare_rate(K, lam);
        if (lam == Rational(1))
            m.load_ratio = LoadRatio::infinite();
        else
            m.load_ratio = LoadRatio::of(timeshare_load_ratio(K, D, lam));
        // lambda*L via baseline over D servers + (1-lambda)*L via hybrid
        Rational lamL = lam * Rational(L);
        Rational restL = Rational(L) - lamL;
        if (lamL.den() != 1 || restL.den() != 1) throw ConfigError("lambda*L not integral");
        Rational cr = Rational(2 * int64_t(K) - 1) * lamL + Rational(K) * restL;
        m.cr_symbols = cr.num();
        Rational ded = Rational(2 * int64_t(K)) * lamL / Rational(D) + restL / Rational(D);
        Rational cen = Rational(int64_t(K)) * restL;
        if (ded.den() != 1 || cen.den() != 1)
            throw ConfigError("time-share downloads not integral for this L");
        m.downloads.assign(D, ded.num());
        m.downloads.push_back(cen.num());
        return m;
    }
    throw ConfigError("unknown scheme: " + scheme);
}

SchemeMetrics measure(const Transcript& t) {
    SystemConfig cfg = SystemConfig::from_json(t.config_json);
    SchemeMetrics m;
    m.scheme = t.scheme;
    m.lambda = t.lambda;

    int64_t total = 0;
    for (const auto& sr : t.servers) {
        int64_t d = int64_t(sr.downloaded_symbols());
        m.downloads.push_back(d);
        total += d;
    }
    if (total == 0) throw DecodeError("empty transcript");
    m.rate = Rational(cfg.msg_len, total);

    bool has_central = int(t.servers.size()) == cfg.central_server();
    int64_t central = has_central ? m.downloads.back() : 0;
    if (central == 0)
        m.load_ratio = LoadRatio::infinite();
    else
        m.load_ratio = LoadRatio::of(Rational(m.downloads.front(), central));

    std::map<std::string, int64_t> chunk_width;
    for (const auto& sr : t.servers)
        for (const auto& ph : sr.phases)
            for (const auto& keys : ph.chunk_keys)
                for (const auto& k : keys) chunk_width[k] = int64_t(ph.packet_len);
    m.cr_symbols = 0;
    for (const auto& [k, w] : chunk_width) m.cr_symbols += w;
    return m;
}

std::string metrics_csv_header() {
    return "scheme,N,D,K,q,L,lambda,rate_num,rate_den,load_num,load_den,cr_symbols,"
           "downloads_dedicated,downloads_central";
}

std::string metrics_csv_row(const SchemeMetrics& m, const SystemConfig& cfg) {
    std::ostringstream os;
    os << m.scheme << "," << cfg.attr_count << "," << cfg.dedicated_count << ","
       << cfg.alphabet_size << "," << cfg.modulus.q << "," << cfg.msg_len << ",";
    os << (m.lambda ? m.lambda->str() : "");
    os << "," << m.rate.num() << "," << m.rate.den();
    os << "," << m.load_ratio.num << "," << m.load_ratio.den;
    os << "," << m.cr_symbols;
    os << "," << (m.downloads.empty() ? 0 : m.downloads.front());
    bool has_central = int(m.downloads.size()) == cfg.central_server() && m.scheme != "dapac";
    os << "," << (has_central ? m.downloads.back() : 0);
    return os.str();
}

} // namespace dapac
