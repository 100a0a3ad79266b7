#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dapac/metrics.hpp"
#include "dapac/sim.hpp"
#include "test_helpers.hpp"

using namespace dapac;
using namespace dapac::testing;

TEST_CASE("closed forms: hybrid, baseline, D=3") {
    auto het = closed_form("hetdapac", 2, 3, 6);
    CHECK(het.rate == Rational(1, 3));
    CHECK(het.load_ratio == LoadRatio::of(Rational(1, 6))); // 1/(KD) = 1/(2D)
    CHECK(het.cr_symbols == 12);                            // KL

    auto base = closed_form("dapac", 2, 3, 3);
    CHECK(base.rate == Rational(1, 4));
    CHECK(base.load_ratio.is_infinite());
    CHECK(base.cr_symbols == 12); // nominal K^2 L budget
    CHECK(base.cr_is_nominal);

    auto d3 = closed_form("d3", 2, 3, 6);
    CHECK(d3.rate == Rational(1, 3));
    CHECK(d3.load_ratio == LoadRatio::of(Rational(2, 3)));
    CHECK(d3.cr_symbols == 12); // K^2 L / 2
    CHECK_THROWS_AS(closed_form("d3", 2, 4, 6), ConfigError);
    CHECK_THROWS_AS(closed_form("nope", 2, 2, 2), ConfigError);
}

TEST_CASE("time-share formulas: endpoints and the 7/24 comparison point") {
    // lambda = (2K-1)/(4K-1) at K=2 gives the (4K-1)/(6K^2) = 7/24 rate
    CHECK(timeshare_rate(2, Rational(3, 7)) == Rational(7, 24));
    CHECK(timeshare_load_ratio(2, 3, Rational(3, 7)) == Rational(2, 3));

    // endpoints: lambda=0 is the hybrid, lambda->1 approaches the baseline
    CHECK(timeshare_rate(2, Rational(0)) == Rational(1, 3));
    CHECK(timeshare_load_ratio(2, 3, Rational(0)) == Rational(1, 6));
    CHECK(timeshare_rate(2, Rational(1)) == Rational(1, 4));

    // lambda=1/2, K=2: R = 1/(2*(3/2) + 1/2) = 2/7
    CHECK(timeshare_rate(2, Rational(1, 2)) == Rational(2, 7));

    // trade-off form agrees with the parametric form on a rational grid
    for (int i = 0; i <= 7; ++i) {
        Rational lam(i, 8);
        for (int K : {2, 3, 5})
            for (int D : {2, 3, 4})
                CHECK(rate_from_load_ratio(K, D, timeshare_load_ratio(K, D, lam)) ==
                      timeshare_rate(K, lam));
    }
}

TEST_CASE("R strictly decreasing, l strictly increasing on the lambda grid") {
    for (int i = 0; i < 7; ++i) {
        Rational a(i, 8), b(i + 1, 8);
        CHECK(timeshare_rate(2, b) < timeshare_rate(2, a));
        CHECK(timeshare_load_ratio(2, 2, a) < timeshare_load_ratio(2, 2, b));
    }
}

TEST_CASE("dominance: 2/(3K) beats the same-load time share for K in [2,16]") {
    for (int K = 2; K <= 16; ++K) {
        Rational lhs(2, 3 * int64_t(K));
        Rational rhs(4 * int64_t(K) - 1, 6 * int64_t(K) * K);
        CHECK(rhs < lhs);
        // and that rhs really is R(lambda) at lambda=(2K-1)/(4K-1)
        CHECK(timeshare_rate(K, Rational(2 * int64_t(K) - 1, 4 * int64_t(K) - 1)) == rhs);
    }
}

TEST_CASE("measured equals closed form across schemes and parameters") {
    struct Case {
        const char* scheme;
        int N, D, K, L;
    };
    std::vector<Case> cases = {
        {"hetdapac", 3, 2, 2, 2}, {"hetdapac", 3, 2, 3, 2}, {"hetdapac", 4, 3, 2, 3},
        {"hetdapac", 4, 3, 3, 3}, {"dapac", 3, 3, 2, 3},    {"dapac", 3, 3, 3, 3},
        {"d3", 4, 3, 2, 6},       {"d3", 4, 3, 3, 6},
    };
    for (auto c : cases) {
        SystemConfig cfg = make_cfg(c.N, c.D, c.K, 257, c.L);
        auto vstar = all_vectors(cfg)[1];
        auto res = run_scheme(cfg, c.scheme, vstar, 5);
        REQUIRE(res.decode_matches_store);
        auto meas = measure(res.transcript);
        auto form = closed_form(c.scheme, c.K, c.D, c.L);
        CHECK(meas.rate == form.rate);
        CHECK(meas.load_ratio == form.load_ratio);
        CHECK(meas.downloads == form.downloads);
        if (std::string(c.scheme) == "dapac")
            CHECK(meas.cr_symbols == (2 * int64_t(c.K) - 1) * c.L); // measured, not K^2 L
        else
            CHECK(meas.cr_symbols == form.cr_symbols);
    }
}

TEST_CASE("measured equals closed form for every vstar on (3,2,2)") {
    SystemConfig cfg = cfg322();
    auto form = closed_form("hetdapac", 2, 2, 2);
    for (const auto& vstar : all_vectors(cfg)) {
        auto res = run_scheme(cfg, "hetdapac", vstar, 3);
        auto meas = measure(res.transcript);
        CHECK(meas.rate == form.rate);
        CHECK(meas.load_ratio == form.load_ratio);
        CHECK(meas.cr_symbols == form.cr_symbols);
    }
}

TEST_CASE("time-share runs: measured R and l match the formulas") {
    SystemConfig cfg = cfg322(257, 8);
    auto vstar = cfg.parse_labels("a,2,y");
    for (auto lam : {Rational(0), Rational(1, 4), Rational(1, 2), Rational(3, 4)}) {
        auto res = run_scheme(cfg, "timeshare", vstar, 5, {}, TimeShare{lam});
        REQUIRE(res.decode_matches_store);
        auto m = measure(res.transcript);
        CHECK(m.rate == timeshare_rate(2, lam));
        CHECK(m.load_ratio == LoadRatio::of(timeshare_load_ratio(2, 2, lam)));
        auto form = closed_form("timeshare", 2, 2, 8, lam);
        CHECK(m.downloads == form.downloads);
        CHECK(m.cr_symbols == form.cr_symbols);
    }
}

TEST_CASE("lambda=1/2, K=2, D=2: measured rate is 2/7") {
    SystemConfig cfg = cfg322(257, 4);
    auto res = run_scheme(cfg, "timeshare", cfg.parse_labels("b,1,x"), 2, {},
                          TimeShare{Rational(1, 2)});
    CHECK(res.decode_matches_store);
    CHECK(measure(res.transcript).rate == Rational(2, 7));
}

TEST_CASE("K=2, D=3, lambda=3/7: measured load ratio is 2/3") {
    SystemConfig cfg = make_cfg(4, 3, 2, 257, 21);
    auto res = run_scheme(cfg, "timeshare", all_vectors(cfg)[3], 4, {},
                          TimeShare{Rational(3, 7)});
    CHECK(res.decode_matches_store);
    auto m = measure(res.transcript);
    CHECK(m.load_ratio == LoadRatio::of(Rational(2, 3)));
    CHECK(m.rate == Rational(7, 24));
}

TEST_CASE("lambda=0 time share is a pure hybrid transcript") {
    SystemConfig cfg = cfg322(257, 2);
    auto vstar = cfg.parse_labels("a,2,y");
    auto ts = run_scheme(cfg, "timeshare", vstar, 5, {}, TimeShare{Rational(0)});
    auto het = run_scheme(cfg, "hetdapac", vstar, 5);
    REQUIRE(ts.transcript.servers.size() == het.transcript.servers.size());
    for (size_t s = 0; s < ts.transcript.servers.size(); ++s) {
        REQUIRE(ts.transcript.servers[s].phases.size() == 1);
        CHECK(ts.transcript.servers[s].phases[0].answer_frame ==
              het.transcript.servers[s].phases[0].answer_frame);
    }
}

TEST_CASE("time-share divisibility guards") {
    SystemConfig cfg = cfg322(257, 4); // lambda*L = 4/3 is not an integer
    CHECK_THROWS_AS(
        run_scheme(cfg, "timeshare", cfg.parse_labels("a,2,y"), 1, {}, TimeShare{Rational(1, 3)}),
        ConfigError);
    SystemConfig odd = cfg322(257, 3); // (1-lambda)*L = 3/2 per phase fails
    CHECK_THROWS_AS(
        run_scheme(odd, "timeshare", odd.parse_labels("a,2,y"), 1, {}, TimeShare{Rational(1, 2)}),
        ConfigError);
    CHECK_THROWS_AS(
        run_scheme(cfg, "timeshare", cfg.parse_labels("a,2,y"), 1, {}, TimeShare{Rational(3, 2)}),
        ConfigError);
}

TEST_CASE("time share over a D=3 system with extra tail attributes") {
    SystemConfig cfg = make_cfg(5, 3, 2, 257, 12);
    auto res = run_scheme(cfg, "timeshare", all_vectors(cfg)[9], 4, {},
                          TimeShare{Rational(1, 4)});
    CHECK(res.decode_matches_store);
    auto m = measure(res.transcript);
    CHECK(m.rate == timeshare_rate(2, Rational(1, 4)));
    CHECK(m.load_ratio == LoadRatio::of(timeshare_load_ratio(2, 3, Rational(1, 4))));
}

TEST_CASE("csv row shape") {
    SystemConfig cfg = cfg322(2);
    auto m = closed_form("hetdapac", 2, 2, 2);
    auto row = metrics_csv_row(m, cfg);
    CHECK(row == "hetdapac,3,2,2,2,2,,1,3,1,4,4,1,4");
    auto base = closed_form("dapac", 2, 3, 3);
    SystemConfig b = cfg32();
    CHECK(metrics_csv_row(base, b).find(",1,0,") != std::string::npos); // infinite load
}
