#include <cmath>

#include "doctest.h"
#include "mimo/errors.hpp"
#include "mimo/se.hpp"
#include "test_util.hpp"

using namespace mimo;
using testutil::cov;
using testutil::scaled_identity;

namespace {

EstimationContext network(int L, int K, int m, std::uint64_t seed = 3) {
    ScenarioConfig c;
    c.L = L;
    c.K = K;
    c.M = m;
    c.model = ModelKind::ExpLogNormal;
    c.sigma_db = 4.0;
    c.seed = seed;
    return estimation_statistics(build_scenario(c));
}

RunOptions opts(std::uint64_t seed) {
    RunOptions o;
    o.seed = seed;
    o.threads = 1;
    o.zf.basis = ZfBasis::AllUes;
    return o;
}

}  // namespace

TEST_CASE("multicell MMSE SINR equals its quadratic form") {
    const auto ctx = network(3, 2, 16);
    RngStream rng(1, 1);
    for (int t = 0; t < 3; ++t) {
        const auto d = draw_and_estimate_mmse(ctx, rng);
        const auto g = ul_sinr_instant(d, ctx, m_mmse(d, ctx));
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 2; ++k)
                CHECK(g[j * 2 + k] == doctest::Approx(mmse_sinr_quadratic(d, ctx, j, k)).epsilon(1e-9));
    }
}

TEST_CASE("prelog and zero-length data phase") {
    const auto r = cov(exp_corr(ExpCorr{1.0, 0.5, 0.1}, 8));
    const auto full = estimation_statistics(make_scenario(1, 1, {r}, 1, 1, 1, 1));
    const auto rep = ul_se(full, Scheme::MR, 20);
    CHECK(rep.prelog == 0.0);
    CHECK(rep.se[0] == 0.0);

    const auto ctx = network(2, 2, 8);
    const auto a = ul_se(ctx, Scheme::MR, 20);
    CHECK(a.prelog == doctest::Approx(1.0 - 2.0 / 200));
    CHECK(a.se_mean > 0.0);
    CHECK(a.se_stderr[0] >= 0.0);
}

TEST_CASE("shared draws make scheme lists match single runs") {
    const auto ctx = network(2, 2, 12);
    const auto both = ul_se(ctx, {Scheme::MR, Scheme::M_MMSE}, 30, Estimator::MMSE, opts(4));
    const auto one = ul_se(ctx, Scheme::M_MMSE, 30, Estimator::MMSE, opts(4));
    CHECK(both[1].se == one.se);
    CHECK(both[1].se_mean >= both[0].se_mean);
}

TEST_CASE("results do not depend on the thread count") {
    const auto ctx = network(2, 2, 12);
    auto o1 = opts(5), o4 = opts(5);
    o4.threads = 4;
    CHECK(ul_se(ctx, Scheme::M_MMSE, 40, Estimator::MMSE, o1).se == ul_se(ctx, Scheme::M_MMSE, 40, Estimator::MMSE, o4).se);
    CHECK(dl_se(ctx, {Scheme::MR}, 40, Estimator::MMSE, o1, 40)[0].se ==
          dl_se(ctx, {Scheme::MR}, 40, Estimator::MMSE, o4, 40)[0].se);
}

TEST_CASE("use-and-then-forget is below the capacity bound") {
    const auto ctx = network(2, 2, 32);
    const auto cap = ul_se(ctx, Scheme::M_MMSE, 400, Estimator::MMSE, opts(6));
    const auto uatf = ul_se_uatf(ctx, {Scheme::M_MMSE}, 1000, Estimator::MMSE, opts(6))[0];
    CHECK(uatf.bound == Bound::UatF);
    for (std::size_t u = 0; u < cap.se.size(); ++u) {
        const double slack = 2.0 * std::hypot(cap.se_stderr[u], uatf.se_stderr[u]);
        CHECK(uatf.se[u] <= cap.se[u] + slack);
    }
}

TEST_CASE("symmetric pair has equal downlink SINRs") {
    const int m = 32;
    const auto ctx = estimation_statistics(
        two_user_scenario(exp_corr(ExpCorr{1.0, 0.5, 0.3}, m), exp_corr(ExpCorr{1.0, 0.5, -0.3}, m)));
    const auto r = dl_se(ctx, {Scheme::M_MMSE}, 800, Estimator::MMSE, opts(8), 500)[0];
    const double slack = 3.0 * std::hypot(r.se_stderr[0], r.se_stderr[1]);
    CHECK(std::abs(r.se[0] - r.se[1]) <= slack);
}

TEST_CASE("power decomposition accounting") {
    const auto single = estimation_statistics(make_scenario(1, 1, {cov(exp_corr(ExpCorr{1, 0.5, 0.1}, 8))}, 1, 1, 1, 200));
    const auto p0 = power_decomposition(single, Scheme::MR, 20, Estimator::MMSE, opts(9));
    CHECK(p0.same_pilot_interf[0] == 0.0);
    CHECK(p0.other_interf[0] == 0.0);

    const auto ctx = network(2, 2, 12);
    for (Scheme s : {Scheme::MR, Scheme::M_MMSE}) {
        const auto p = power_decomposition(ctx, s, 50, Estimator::MMSE, opts(9));
        for (std::size_t u = 0; u < p.total.size(); ++u) {
            const double sum = p.desired[u] + p.same_pilot_interf[u] + p.other_interf[u] + p.noise[u];
            CHECK(sum == doctest::Approx(p.total[u]).epsilon(1e-9));
            CHECK(p.desired[u] >= 0.0);
            CHECK(p.noise[u] > 0.0);
        }
    }
}

TEST_CASE("time splitting") {
    const auto one = network(1, 2, 12);
    const auto ts = time_splitting_se(one.scenario(), 30, opts(10));
    const auto ref = ul_se(one, Scheme::M_MMSE, 30, Estimator::MMSE, opts(10));
    CHECK(ts.se == ref.se);

    const auto four = network(4, 2, 12);
    const auto t4 = time_splitting_se(four.scenario(), 10, opts(10));
    CHECK(t4.prelog == doctest::Approx((1.0 - 2.0 / 200) / 4));
}

TEST_CASE("more uplink power never lowers the M-MMSE SINR") {
    const auto r1 = cov(exp_corr(ExpCorr{1.0, 0.5, 0.2}, 16));
    const auto r2 = cov(exp_corr(ExpCorr{0.5, 0.5, 1.2}, 16));
    double prev = 0.0;
    for (double rho : {0.5, 1.0, 4.0}) {
        const auto ctx = estimation_statistics(make_scenario(2, 1, {r1, r2, r1, r2}, 1.0, rho, 1.0, 200, 1));
        const double g = ul_se(ctx, Scheme::M_MMSE, 100, Estimator::MMSE, opts(11)).sinr[0];
        CHECK(g >= prev);
        prev = g;
    }
}

TEST_CASE("channel hardening of the normalized SINR") {
    auto spread = [](int m) {
        const auto ctx = estimation_statistics(
            two_user_scenario(exp_corr(ExpCorr{1.0, 0.5, 0.2}, m), exp_corr(ExpCorr{0.5, 0.5, 1.7}, m)));
        RngStream rng(12, static_cast<std::uint64_t>(m));
        double s = 0, s2 = 0;
        const int n = 200;
        for (int t = 0; t < n; ++t) {
            const auto d = draw_and_estimate_mmse(ctx, rng);
            const double g = mmse_sinr_quadratic(d, ctx, 0, 0) / m;
            s += g;
            s2 += g * g;
        }
        return s2 / n - (s / n) * (s / n);
    };
    CHECK(spread(128) < spread(16));
}

TEST_CASE("linearly dependent pair saturates at eta squared") {
    // R1 = 2 R2 = 2I: the desired estimate equals twice the interferer's, γ -> η²
    const auto ctx = estimation_statistics(two_user_scenario(scaled_identity(200, 2.0), scaled_identity(200, 1.0)));
    const auto r = ul_se(ctx, Scheme::M_MMSE, 100, Estimator::MMSE, opts(13));
    CHECK(r.sinr[0] == doctest::Approx(4.0).epsilon(0.15));
}
