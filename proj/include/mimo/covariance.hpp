#pragma once

#include <memory>
#include <variant>

#include "mimo/numerics.hpp"

namespace mimo {

struct OneRing {
    double beta = 1.0;
    double theta = 0.0;  // radians
    double delta = 0.0;  // angular half-spread, radians
};

struct ExpCorr {
    double beta = 1.0;
    double r = 0.0;
    double theta = 0.0;
};

struct LogNormalDiag {
    double beta = 1.0;
    double sigma_db = 0.0;
};

struct ExpLogNormal {
    double beta = 1.0;
    double r = 0.0;
    double theta = 0.0;
    double sigma_db = 0.0;
};

using CovarianceModel = std::variant<OneRing, ExpCorr, LogNormalDiag, ExpLogNormal>;

// Covariance matrix with its spectral factor computed once at construction.
class CovarianceMatrix {
public:
    CovarianceMatrix() = default;
    explicit CovarianceMatrix(HermitianMatrix r);

    const HermitianMatrix& hermitian() const { return r_; }
    const CMat& mat() const { return r_.mat(); }
    const SpectralFactor& factor() const { return f_; }
    RVec diag() const { return r_.diag(); }
    int dim() const { return r_.dim(); }
    double trace() const { return r_.trace(); }
    bool is_diagonal() const { return r_.is_diagonal(); }

    CovarianceMatrix scaled(double c) const;

private:
    HermitianMatrix r_;
    SpectralFactor f_;
};

using CovPtr = std::shared_ptr<const CovarianceMatrix>;

CovarianceMatrix one_ring(const OneRing& model, int m);
CovarianceMatrix exp_corr(const ExpCorr& model, int m);
CovarianceMatrix lognormal_diag(const LogNormalDiag& model, int m, RngStream& rng);
CovarianceMatrix exp_lognormal(const ExpLogNormal& model, int m, RngStream& rng);

// Any model; the stream is consumed only by the log-normal variants.
CovarianceMatrix make_covariance(const CovarianceModel& model, int m, RngStream& rng);

RVec eigen_spectrum(const CovarianceMatrix& r);

// Toeplitz first row of the one-ring model with unit beta: c_d = (1/2Δ)∫ exp(iπ d sin(θ+δ)) dδ.
// `order` > 0 forces a fixed Gauss–Legendre order, otherwise the order is doubled until
// successive estimates agree to 1e-10.
CVec one_ring_row(double theta, double delta, int m, int order = 0);

}  // namespace mimo
