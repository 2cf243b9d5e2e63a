#include "mimo/covariance.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "mimo/errors.hpp"

namespace mimo {

namespace {

void check_dim(int m) {
    if (m < 1) throw std::invalid_argument("covariance: M must be >= 1");
}

void check_beta(double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("covariance: beta must be > 0");
}

CVec one_ring_row_fixed(double theta, double delta, int m, int order) {
    std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
        gsl_integration_glfixed_table_alloc(static_cast<size_t>(order)), gsl_integration_glfixed_table_free);
    if (!table) throw QuadratureFailure("cannot allocate Gauss-Legendre table of order " + std::to_string(order));
    CVec row = CVec::Zero(m);
    for (int q = 0; q < order; ++q) {
        double x = 0.0, w = 0.0;
        gsl_integration_glfixed_point(-delta, delta, static_cast<size_t>(q), &x, &w, table.get());
        const double phase = M_PI * std::sin(theta + x);
        const cplx step = std::polar(1.0, phase);
        cplx e(1.0, 0.0);
        for (int d = 0; d < m; ++d) {
            row(d) += w * e;
            e *= step;
        }
    }
    return row / (2.0 * delta);
}

CMat toeplitz_hermitian(const CVec& row) {
    const auto m = row.size();
    CMat a(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c < m; ++c) a(r, c) = c >= r ? row(c - r) : std::conj(row(r - c));
    return a;
}

RVec lognormal_exponents(double sigma_db, int m, RngStream& rng) {
    RVec f(m);
    for (int i = 0; i < m; ++i) f(i) = sigma_db * rng.normal();
    return f;
}

}  // namespace

CovarianceMatrix::CovarianceMatrix(HermitianMatrix r) : r_(std::move(r)), f_(psd_factor(r_)) {}

CovarianceMatrix CovarianceMatrix::scaled(double c) const {
    return CovarianceMatrix(HermitianMatrix(r_.mat() * c));
}

CVec one_ring_row(double theta, double delta, int m, int order) {
    check_dim(m);
    if (!(delta > 0.0)) throw std::invalid_argument("one_ring: delta must be > 0");
    if (order > 0) return one_ring_row_fixed(theta, delta, m, order);
    constexpr int kMaxOrder = 1 << 14;
    CVec prev = one_ring_row_fixed(theta, delta, m, 16);
    for (int n = 32; n <= kMaxOrder; n *= 2) {
        CVec next = one_ring_row_fixed(theta, delta, m, n);
        if ((next - prev).cwiseAbs().maxCoeff() < 1e-10) return next;
        prev = std::move(next);
    }
    throw QuadratureFailure("one-ring integral did not converge up to order " + std::to_string(kMaxOrder));
}

CovarianceMatrix one_ring(const OneRing& model, int m) {
    check_beta(model.beta);
    CVec row = one_ring_row(model.theta, model.delta, m);
    row(0) = 1.0;
    return CovarianceMatrix(HermitianMatrix(toeplitz_hermitian(row * model.beta)));
}

CovarianceMatrix exp_corr(const ExpCorr& model, int m) {
    check_dim(m);
    check_beta(model.beta);
    if (model.r < 0.0 || model.r > 1.0) throw std::invalid_argument("exp_corr: r must lie in [0,1]");
    CVec row(m);
    for (int d = 0; d < m; ++d) row(d) = model.beta * std::pow(model.r, d) * std::polar(1.0, d * model.theta);
    return CovarianceMatrix(HermitianMatrix(toeplitz_hermitian(row)));
}

CovarianceMatrix lognormal_diag(const LogNormalDiag& model, int m, RngStream& rng) {
    check_dim(m);
    check_beta(model.beta);
    if (model.sigma_db < 0.0) throw std::invalid_argument("lognormal_diag: sigma must be >= 0");
    RVec f = lognormal_exponents(model.sigma_db, m, rng);
    RVec d = (f.array() / 10.0).unaryExpr([](double x) { return std::pow(10.0, x); }) * model.beta;
    return CovarianceMatrix(HermitianMatrix::diagonal(d));
}

CovarianceMatrix exp_lognormal(const ExpLogNormal& model, int m, RngStream& rng) {
    if (model.sigma_db < 0.0) throw std::invalid_argument("exp_lognormal: sigma must be >= 0");
    const CovarianceMatrix base = exp_corr(ExpCorr{model.beta, model.r, model.theta}, m);
    RVec f = lognormal_exponents(model.sigma_db, m, rng);
    RVec g = (f.array() / 20.0).unaryExpr([](double x) { return std::pow(10.0, x); });
    CMat a = g.cast<cplx>().asDiagonal() * base.mat() * g.cast<cplx>().asDiagonal();
    return CovarianceMatrix(HermitianMatrix(a));
}

CovarianceMatrix make_covariance(const CovarianceModel& model, int m, RngStream& rng) {
    return std::visit(
        [&](const auto& mdl) -> CovarianceMatrix {
            using T = std::decay_t<decltype(mdl)>;
            if constexpr (std::is_same_v<T, OneRing>) return one_ring(mdl, m);
            else if constexpr (std::is_same_v<T, ExpCorr>) return exp_corr(mdl, m);
            else if constexpr (std::is_same_v<T, LogNormalDiag>) return lognormal_diag(mdl, m, rng);
            else return exp_lognormal(mdl, m, rng);
        },
        model);
}

RVec eigen_spectrum(const CovarianceMatrix& r) { return r.factor().eigenvalues; }

}  // namespace mimo
