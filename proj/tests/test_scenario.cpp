#include <cmath>

#include "doctest.h"
#include "mimo/cli.hpp"
#include "mimo/errors.hpp"
#include "mimo/scenario.hpp"
#include "test_util.hpp"

using namespace mimo;

TEST_CASE("single link normalized to 0 dB") {
    ScenarioConfig c;
    c.L = 1;
    c.K = 1;
    c.M = 16;
    c.snr.intracell_db = 0.0;
    const auto s = build_scenario(c);
    CHECK(s.R(0, 0, 0).trace() / 16 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uplink preset SNR ranges") {
    ExperimentConfig e = preset_config("fig4");
    e.scenario.M = 64;
    const auto s = build_scenario(e.scenario);
    CHECK(s.L == 4);
    CHECK(s.K == 2);
    CHECK(s.tau_p == 2);
    CHECK(s.tau_c == 200);
    for (int j = 0; j < s.L; ++j)
        for (int l = 0; l < s.L; ++l)
            for (int i = 0; i < s.K; ++i) {
                const double db = 10 * std::log10(s.rho_ul * s.R(j, l, i).trace() / s.M);
                if (l == j) {
                    CHECK(std::abs(db - (-6.0)) < 1e-9);
                } else {
                    CHECK(db >= -11.5 - 1e-9);
                    CHECK(db <= -6.3 + 1e-9);
                }
            }
}

TEST_CASE("SNR normalization holds for every model") {
    for (auto model : {ModelKind::OneRing, ModelKind::ExpCorr, ModelKind::LogNormal, ModelKind::ExpLogNormal}) {
        ScenarioConfig c;
        c.L = 2;
        c.K = 2;
        c.M = 24;
        c.model = model;
        c.sigma_db = 3.0;
        c.rho_ul = 2.5;
        c.spacing = IntercellSpacing::Uniform;
        const auto s = build_scenario(c);
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l)
                for (int i = 0; i < 2; ++i) {
                    const double db = 10 * std::log10(s.rho_ul * s.R(j, l, i).trace() / s.M);
                    const double target = l == j ? c.snr.intracell_db : db;
                    CHECK(std::abs(db - target) < 1e-9);
                    if (l != j) {
                        CHECK(db >= c.snr.intercell_lo_db - 1e-9);
                        CHECK(db <= c.snr.intercell_hi_db + 1e-9);
                    }
                }
    }
}

TEST_CASE("same seed rebuilds bitwise identical covariances") {
    ScenarioConfig c;
    c.L = 3;
    c.K = 2;
    c.M = 20;
    c.model = ModelKind::ExpLogNormal;
    c.sigma_db = 4.0;
    c.seed = 77;
    const auto a = build_scenario(c);
    const auto b = build_scenario(c);
    for (std::size_t x = 0; x < a.links.size(); ++x) CHECK(a.links[x]->mat() == b.links[x]->mat());
    c.seed = 78;
    const auto d = build_scenario(c);
    CHECK(a.links[1]->mat() != d.links[1]->mat());
}

TEST_CASE("ten-UE cells are redrawn per seed") {
    ExperimentConfig e = preset_config("fig7a");
    e.scenario.M = 16;
    const auto a = build_scenario(e.scenario);
    e.scenario.seed = 2;
    const auto b = build_scenario(e.scenario);
    CHECK(a.K == 10);
    CHECK(a.R(0, 1, 3).mat() != b.R(0, 1, 3).mat());
}

TEST_CASE("pilot groups") {
    ScenarioConfig c;
    c.L = 4;
    c.K = 2;
    c.M = 4;
    const auto g = pilot_groups(build_scenario(c));
    REQUIRE(g.size() == 2);
    CHECK(g[0].size() == 4);
    CHECK(g[1].size() == 4);
    for (const auto& u : g[1]) CHECK(u.ue == 1);

    c.L = 1;
    c.K = 3;
    const auto g1 = pilot_groups(build_scenario(c));
    REQUIRE(g1.size() == 3);
    for (const auto& grp : g1) CHECK(grp.size() == 1);

    auto s = build_scenario(c);
    s.pilot_of[0] = {2, 0, 1};
    s.validate();
    const auto g2 = pilot_groups(s);
    CHECK(g2[2][0].ue == 0);
    CHECK(g2[0][0].ue == 1);
    CHECK(s.pilot(0, 2) == 1);
}

TEST_CASE("scenario validation") {
    ScenarioConfig c;
    c.M = 4;
    c.aoa_offsets_deg = {1.0};
    CHECK_THROWS_AS(build_scenario(c), ConfigError);

    auto r = testutil::cov(testutil::scaled_identity(4, 1.0));
    CHECK_THROWS_AS(make_scenario(1, 1, {r, r}, 1, 1, 1, 200), ConfigError);
    CHECK_THROWS_AS(make_scenario(1, 1, {r}, 1, -1, 1, 200), ConfigError);
    CHECK_THROWS_AS(make_scenario(1, 1, {r}, 1, 1, 1, 200, 201), ConfigError);
    auto bad = testutil::cov(testutil::scaled_identity(5, 1.0));
    CHECK_THROWS_AS(make_scenario(2, 1, {r, bad, r, r}, 1, 1, 1, 200), ConfigError);
}

TEST_CASE("two-user mapping") {
    const auto s = two_user_scenario(testutil::scaled_identity(8, 1.0), testutil::scaled_identity(8, 0.5));
    CHECK(s.L == 2);
    CHECK(s.K == 1);
    CHECK(s.tau_p == 1);
    CHECK(s.R(0, 1, 0).trace() == doctest::Approx(4.0));
    CHECK(s.R(1, 1, 0).trace() == doctest::Approx(4.0));
    CHECK(s.prelog() == doctest::Approx(1.0 - 1.0 / 200));
}
