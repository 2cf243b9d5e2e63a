#include <cmath>

#include "doctest.h"
#include "mimo/asymptotics.hpp"
#include "mimo/errors.hpp"
#include "test_util.hpp"

using namespace mimo;
using testutil::cov;

namespace {

CovarianceMatrix ec(double beta, double theta, int m) { return exp_corr(ExpCorr{beta, 0.5, theta}, m); }

CMat example1_r1(int m, int n) {
    RVec d = RVec::Ones(m);
    d.head(n).setConstant(2.0);
    return d.cast<cplx>().asDiagonal();
}

}  // namespace

TEST_CASE("two-user delta vanishes for dependent covariances") {
    const auto r = ec(1.0, 0.4, 24);
    const auto same = two_user_delta(estimation_statistics(two_user_scenario(r, r)));
    CHECK(same.beta11 == doctest::Approx(same.beta22));
    CHECK(std::abs(same.beta12) == doctest::Approx(same.beta11));
    CHECK(std::abs(same.delta1) <= 1e-10 * same.beta11);

    const auto scaled = two_user_delta(estimation_statistics(two_user_scenario(r.scaled(3.0), r)));
    CHECK(std::abs(scaled.delta1) <= 1e-10 * scaled.beta11);

    const auto indep = two_user_delta(estimation_statistics(two_user_scenario(ec(1.0, 0.2, 24), ec(0.5, 1.8, 24))));
    CHECK(indep.delta1 > 0.0);
    CHECK(indep.delta2 > 0.0);
    CHECK(indep.delta1 <= indep.beta11);
}

TEST_CASE("downlink delta prime") {
    const auto r = ec(1.0, 0.4, 24);
    const auto dep = dl_delta_prime(estimation_statistics(two_user_scenario(r, r)));
    CHECK(dep.gamma_dl_over_M == 0.0);

    const auto ind = dl_delta_prime(estimation_statistics(two_user_scenario(ec(1.0, 0.2, 24), ec(0.5, 1.8, 24))));
    CHECK(ind.delta1p > 0.0);
    CHECK(ind.gamma_dl_over_M > 0.0);
    // β' by dense traces tr(R_a Z^-2 R_b Q^-1)/M
    const auto ctx = estimation_statistics(two_user_scenario(ec(1.0, 0.2, 24), ec(0.5, 1.8, 24)));
    const CMat Zi = ctx.Z(0).mat().inverse(), Qi = ctx.Q(0, 0).mat().inverse();
    const CMat& R1 = ctx.scenario().R(0, 0, 0).mat();
    const CMat& R2 = ctx.scenario().R(0, 1, 0).mat();
    auto bp = [&](const CMat& a, const CMat& b) { return (a * Zi * Zi * b * Qi).trace() / 24.0; };
    CHECK(ind.beta11p == doctest::Approx(bp(R1, R1).real()).epsilon(1e-9));
    CHECK(std::abs(ind.beta12p - bp(R2, R1)) <= 1e-9 * std::abs(ind.beta12p));
    const double d1p = ind.beta11p - 2.0 * (ind.beta12 * std::conj(ind.beta12p)).real() / ind.beta22 +
                       std::norm(ind.beta12) * ind.beta22p / (ind.beta22 * ind.beta22);
    CHECK(ind.delta1p == doctest::Approx(d1p));
}

TEST_CASE("element-wise upsilon") {
    RngStream rng(1, 1);
    const auto d = lognormal_diag(LogNormalDiag{1.0, 0.0}, 32, rng);
    const auto eq = ew_upsilon(estimation_statistics(two_user_scenario(d, d)));
    CHECK(std::abs(eq.upsilon1) <= 1e-10 * eq.alpha11);
    CHECK(eq.gamma_uatf_over_M == 0.0);

    const auto pert = lognormal_diag(LogNormalDiag{1.0, 3.0}, 32, rng);
    const auto u = ew_upsilon(
        estimation_statistics(two_user_scenario(pert, CovarianceMatrix(HermitianMatrix::identity(32, 0.5)))));
    CHECK(u.upsilon1 > 0.0);
    CHECK(u.upsilon1p > 0.0);
    CHECK(u.gamma_uatf_over_M > 0.0);
}

TEST_CASE("two-cell reduction of the multicell delta") {
    const auto ctx = estimation_statistics(two_user_scenario(ec(1.0, 0.2, 20), ec(0.5, 1.8, 20)));
    const auto m = multicell_delta(ctx, 0, 0);
    const auto t = two_user_delta(ctx);
    CHECK(m.delta == doctest::Approx(t.delta1).epsilon(1e-12));
    CHECK(m.beta == doctest::Approx(t.beta11).epsilon(1e-12));
    CHECK(m.b.size() == 1);
}

TEST_CASE("multicell delta with proportional interferers") {
    const auto r = cov(ec(1.0, 0.3, 16));
    const auto r2 = cov(r->scaled(0.5));
    const auto r3 = cov(r->scaled(0.25));
    // every BS sees the same three proportional covariances
    std::vector<CovPtr> links;
    for (int j = 0; j < 3; ++j) links.insert(links.end(), {r, r2, r3});
    const auto ctx = estimation_statistics(make_scenario(3, 1, links, 1, 1, 1, 200));
    CHECK_THROWS_AS(multicell_delta(ctx, 0, 0), GramSingular);
    const auto g = gram_diagnostics(ctx, 0, 0);
    CHECK(g.cond > 1e12);
    CHECK_FALSE(g.independent);

    const auto two = estimation_statistics(two_user_scenario(*r, *r2));
    const auto m = multicell_delta(two, 0, 0);
    CHECK(std::abs(m.delta) <= 1e-10 * m.beta);
}

TEST_CASE("multicell delta is bounded by the serving term") {
    ScenarioConfig c;
    c.L = 4;
    c.K = 2;
    c.M = 32;
    c.model = ModelKind::ExpLogNormal;
    c.sigma_db = 4.0;
    const auto ctx = estimation_statistics(build_scenario(c));
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 2; ++k) {
            const auto m = multicell_delta(ctx, j, k);
            CHECK(m.delta >= 0.0);
            CHECK(m.delta <= m.beta);
            CHECK(m.C.rows() == 3);
            CHECK((m.C - m.C.adjoint()).norm() <= 1e-12 * m.C.norm());
            Eigen::SelfAdjointEigenSolver<CMat> es(m.C);
            CHECK(es.eigenvalues().minCoeff() > 0.0);
            const CMat G = weighted_gram(ctx, j, k);
            CHECK(G.rows() == 4);
        }
    CHECK_THROWS_AS(multicell_delta(estimation_statistics(make_scenario(1, 1, {cov(ec(1, 0, 4))}, 1, 1, 1, 200)), 0, 0),
                    std::invalid_argument);
}

TEST_CASE("independence margin of the fixed two-matrix example") {
    for (int m : {10, 100, 1000}) {
        const int n = m / 2;
        const std::vector<CMat> rs = {example1_r1(m, n), CMat::Identity(m, m)};
        const auto r = independence_minimizer(rs, 0, NormMode::Frobenius);
        const double want = double(m - n) * n / (double(m) * m);
        CHECK(std::abs(r.margin - want) <= 1e-12);
        CHECK(std::abs(r.lambda(1) - cplx(-(m + n) / double(m), 0.0)) <= 1e-12);
        CHECK(r.lambda(0) == cplx(1.0, 0.0));
    }
}

TEST_CASE("proportional matrices have zero margin") {
    const CMat r = ec(1.0, 0.3, 12).mat();
    const std::vector<CMat> rs = {r, 2.5 * r};
    CHECK(independence_margin(rs, 0) <= kMarginZeroTol);
    CHECK(independence_margin(rs, 1) <= kMarginZeroTol);
    const std::vector<CMat> three = {r, 2.0 * r, -0.5 * r};
    CHECK(independence_margin(three, 0) <= kMarginZeroTol);
}

TEST_CASE("margin of a perturbed identity is the variance of the perturbation") {
    const int m = 10000;
    RngStream rng(2, 2);
    const auto p = lognormal_diag(LogNormalDiag{1.0, 2.0}, m, rng);
    const RVec eps = p.diag();
    const double b1 = 1.5, b2 = 0.7;
    // diagonal matrices: build a cheap Gram directly instead of dense M×M products
    CMat G(2, 2);
    G(0, 0) = b1 * b1 * eps.squaredNorm() / m;
    G(0, 1) = G(1, 0) = b1 * b2 * eps.sum() / m;
    G(1, 1) = b2 * b2;
    const double sample_var = (eps.array() - eps.mean()).square().mean();
    CHECK(gram_margin(G, 0).margin == doctest::Approx(b1 * b1 * sample_var).epsilon(1e-9));
    const double s = 2.0 * std::log(10.0) / 10.0;
    const double theory = std::exp(s * s) * (std::exp(s * s) - 1.0);
    CHECK(gram_margin(G, 0).margin == doctest::Approx(b1 * b1 * theory).epsilon(0.1));
}

TEST_CASE("margin scaling and weighted consistency") {
    const CMat a = ec(1.0, 0.2, 16).mat(), b = ec(0.6, 1.5, 16).mat();
    const double m1 = independence_margin({a, b}, 0);
    const double m3 = independence_margin({3.0 * a, 3.0 * b}, 0);
    CHECK(m1 > kMarginZeroTol);
    CHECK(m3 == doctest::Approx(9.0 * m1).epsilon(1e-10));

    const auto ctx = estimation_statistics(two_user_scenario(ec(1.0, 0.2, 16), ec(0.6, 1.5, 16)));
    MarginWeights w;
    w.Qinv = ctx.Q_solver(0, 0).solve(CMat(CMat::Identity(16, 16)));
    w.Zinv = ctx.Z_solver(0).solve(CMat(CMat::Identity(16, 16)));
    CHECK(independence_margin({a, b}, 0, NormMode::Weighted, &w) > 0.0);
    CHECK_THROWS(independence_margin({a, b}, 0, NormMode::Weighted));
}

TEST_CASE("gram diagnostics agree with the Frobenius margin") {
    int agree = 0;
    for (int t = 0; t < 50; ++t) {
        RngStream rng(3, t);
        const auto base = lognormal_diag(LogNormalDiag{1.0, 3.0}, 8, rng);
        std::vector<CovPtr> links;
        const bool dependent = t % 2 == 0;
        for (int j = 0; j < 2; ++j) {
            links.push_back(cov(base));
            links.push_back(dependent ? cov(base.scaled(0.3 + 0.01 * t)) : cov(lognormal_diag(LogNormalDiag{0.5, 3.0}, 8, rng)));
        }
        const auto ctx = estimation_statistics(make_scenario(2, 1, links, 1, 1, 1, 200));
        const auto g = gram_diagnostics(ctx, 0, 0);
        const bool frob = g.frobenius_margin > kMarginZeroTol * base.mat().squaredNorm() / 8;
        agree += (g.independent == frob) && (g.independent == !dependent);
    }
    CHECK(agree == 50);
}

TEST_CASE("two-user functions reject other layouts") {
    ScenarioConfig c;
    c.L = 3;
    c.K = 1;
    c.M = 4;
    const auto ctx = estimation_statistics(build_scenario(c));
    CHECK_THROWS_AS(two_user_delta(ctx), std::invalid_argument);
    CHECK_THROWS_AS(dl_delta_prime(ctx), std::invalid_argument);
    CHECK_THROWS_AS(ew_upsilon(ctx), std::invalid_argument);
}
