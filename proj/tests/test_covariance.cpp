#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "mimo/covariance.hpp"
#include "test_util.hpp"

using namespace mimo;

namespace {
constexpr double kDeg = M_PI / 180.0;
}

TEST_CASE("one-ring: unit diagonal, linear in beta, bounded norm") {
    const auto r1 = one_ring(OneRing{1.0, 0.7, 10 * kDeg}, 32);
    const auto r2 = one_ring(OneRing{2.0, 0.7, 10 * kDeg}, 32);
    for (int m = 0; m < 32; ++m) CHECK(r1.mat()(m, m).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((r2.mat() - 2.0 * r1.mat()).norm() <= 1e-12 * r2.mat().norm());
    const double n64 = eigen_spectrum(one_ring(OneRing{1.0, 0.7, 10 * kDeg}, 64))(0);
    const double n256 = eigen_spectrum(one_ring(OneRing{1.0, 0.7, 10 * kDeg}, 256))(0);
    // spectral norm grows at most like M times the angular-support fraction
    CHECK(n256 / 256.0 <= n64 / 64.0 * 1.5);
}

TEST_CASE("one-ring at 15 degrees is strongly rank deficient") {
    const auto r = one_ring(OneRing{1.0, 0.0, 15 * kDeg}, 100);
    const RVec ev = eigen_spectrum(r);
    int small = 0;
    for (int i = 0; i < ev.size(); ++i) small += ev(i) < 1e-6 * ev(0);
    CHECK(small >= 60);
}

TEST_CASE("one-ring quadrature is converged") {
    const CVec a = one_ring_row(0.4, 20 * kDeg, 64);
    const CVec b = one_ring_row(0.4, 20 * kDeg, 64, 256);
    const CVec c = one_ring_row(0.4, 20 * kDeg, 64, 512);
    CHECK((a - c).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((b - c).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("exponential correlation entries") {
    const auto r0 = exp_corr(ExpCorr{1.5, 0.0, 0.3}, 8);
    CHECK((r0.mat() - 1.5 * CMat::Identity(8, 8)).norm() < 1e-15);

    const auto r = exp_corr(ExpCorr{1.0, 0.5, 0.0}, 5);
    CHECK(r.mat()(0, 2).real() == doctest::Approx(0.25));
    CHECK(r.mat()(0, 2).imag() == doctest::Approx(0.0));

    const auto rt = exp_corr(ExpCorr{1.0, 0.5, 0.3}, 5);
    const cplx e = 0.25 * std::exp(cplx(0, 2 * 0.3));
    CHECK(std::abs(rt.mat()(0, 2) - e) < 1e-14);

    const auto hi = exp_corr(ExpCorr{1.0, 0.9, M_PI / 3}, 64);
    CHECK(eigen_spectrum(hi).minCoeff() >= 0.0);
    for (double rr : {0.0, 0.3, 0.6, 0.95})
        for (int m : {4, 33, 128}) CHECK(eigen_spectrum(exp_corr(ExpCorr{1.0, rr, 0.1}, m)).minCoeff() >= 0.0);
}

TEST_CASE("log-normal diagonal") {
    RngStream rng(1, 1);
    const auto r0 = lognormal_diag(LogNormalDiag{2.0, 0.0}, 16, rng);
    CHECK(r0.is_diagonal());
    CHECK((r0.diag() - RVec::Constant(16, 2.0)).norm() < 1e-15);

    const int m = 10000;
    const auto r = lognormal_diag(LogNormalDiag{1.0, 4.0}, m, rng);
    const RVec db = 10.0 * r.diag().array().log10();
    const double mean = db.mean();
    const double sd = std::sqrt((db.array() - mean).square().sum() / (m - 1));
    CHECK(sd == doctest::Approx(4.0).epsilon(0.05));
    CHECK(r.diag().minCoeff() > 0.0);
}

TEST_CASE("exp-corr with log-normal array variations") {
    RngStream a(4, 4), b(4, 4), c(4, 4);
    const auto plain = exp_corr(ExpCorr{1.0, 0.5, 0.2}, 16);
    const auto s0 = exp_lognormal(ExpLogNormal{1.0, 0.5, 0.2, 0.0}, 16, a);
    CHECK((s0.mat() - plain.mat()).norm() < 1e-14);

    const auto d1 = exp_lognormal(ExpLogNormal{1.0, 0.0, 0.2, 4.0}, 16, b);
    const auto d2 = lognormal_diag(LogNormalDiag{1.0, 4.0}, 16, c);
    CHECK((d1.mat() - d2.mat()).norm() <= 1e-12 * d2.mat().norm());

    RngStream e(5, 5);
    const auto full = exp_lognormal(ExpLogNormal{1.0, 0.5, 0.2, 4.0}, 64, e);
    CHECK(eigen_spectrum(full).minCoeff() >= 0.0);
}

TEST_CASE("eigen spectrum: sorted and sums to the trace") {
    const auto id = testutil::scaled_identity(6, 3.0);
    CHECK((eigen_spectrum(id) - RVec::Constant(6, 3.0)).norm() < 1e-12);

    CVec u = CVec::Ones(5);
    const auto r1 = CovarianceMatrix(HermitianMatrix(u * u.adjoint()));
    const RVec ev1 = eigen_spectrum(r1);
    CHECK(ev1(0) == doctest::Approx(5.0));
    CHECK(ev1.tail(4).cwiseAbs().maxCoeff() < 1e-12);

    RngStream rng(2, 2);
    const auto r = exp_lognormal(ExpLogNormal{1.0, 0.5, 0.1, 3.0}, 40, rng);
    const RVec ev = eigen_spectrum(r);
    CHECK(std::is_sorted(ev.data(), ev.data() + ev.size(), std::greater<double>()));
    CHECK(ev.sum() == doctest::Approx(r.trace()).epsilon(1e-8));
}

TEST_CASE("normalized traces") {
    CHECK(one_ring(OneRing{0.7, 0.2, 10 * kDeg}, 50).trace() / 50 == doctest::Approx(0.7));
    CHECK(exp_corr(ExpCorr{0.7, 0.5, 0.2}, 50).trace() / 50 == doctest::Approx(0.7));
    RngStream rng(8, 8);
    const double s = 4.0;
    const double t = lognormal_diag(LogNormalDiag{0.7, s}, 50, rng).trace() / 50;
    CHECK(t >= 0.7 * std::pow(10.0, -3 * s / 10));
    CHECK(t <= 0.7 * std::pow(10.0, 3 * s / 10));
}

TEST_CASE("averaged spectra order the three models") {
    // share of total energy in the largest 20 of 100 eigenvalues
    const int m = 100;
    RngStream rng(12, 3);
    double ring = 0, exp = 0, logn = 0;
    const int draws = 10;
    for (int t = 0; t < draws; ++t) {
        const double th = rng.uniform(-M_PI, M_PI);
        auto top = [](const RVec& ev) { return ev.head(20).sum() / ev.sum(); };
        ring += top(eigen_spectrum(one_ring(OneRing{1.0, th, 15 * kDeg}, m)));
        exp += top(eigen_spectrum(exp_corr(ExpCorr{1.0, 0.5, th}, m)));
        logn += top(eigen_spectrum(lognormal_diag(LogNormalDiag{1.0, 2.0}, m, rng)));
    }
    CHECK(ring > exp);
    CHECK(exp > logn);
}

TEST_CASE("make_covariance dispatches on the variant") {
    RngStream rng(1, 1);
    const auto a = make_covariance(ExpCorr{1.0, 0.5, 0.0}, 4, rng);
    CHECK(a.mat()(0, 1).real() == doctest::Approx(0.5));
    const auto b = make_covariance(LogNormalDiag{1.0, 0.0}, 4, rng);
    CHECK(b.is_diagonal());
}
