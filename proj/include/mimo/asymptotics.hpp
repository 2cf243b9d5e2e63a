#pragma once

#include <vector>

#include "mimo/estimation.hpp"

namespace mimo {

// Two-user quantities at BS 0 of a two_user_scenario: UE 1 is (0,0), UE 2 is (1,0).
struct TwoUserDelta {
    double beta11 = 0.0, beta22 = 0.0;
    cplx beta12 = 0.0;
    double delta1 = 0.0, delta2 = 0.0;
};

struct DlDeltaPrime {
    double beta11 = 0.0, beta22 = 0.0;
    cplx beta12 = 0.0;
    double beta11p = 0.0, beta22p = 0.0;
    cplx beta12p = 0.0;
    double delta1 = 0.0;
    double delta1p = 0.0;
    double gamma_dl_over_M = 0.0;  // rho_dl * delta1^2 / delta1'
};

struct EwUpsilon {
    double alpha11 = 0.0, alpha22 = 0.0, alpha12 = 0.0;
    double alpha11p = 0.0, alpha22p = 0.0, alpha12p = 0.0;
    double upsilon1 = 0.0;
    double upsilon1p = 0.0;
    double gamma_uatf_over_M = 0.0;  // rho_ul * upsilon1^2 / upsilon1'
};

struct MulticellDelta {
    double beta = 0.0;  // serving term tr(Φ_jjk Z_j^-1)/M
    CVec b;             // length L-1, other cells in increasing order
    CMat C;             // (L-1)x(L-1) Hermitian Gramian
    double delta = 0.0;
};

TwoUserDelta two_user_delta(const EstimationContext& ctx);
DlDeltaPrime dl_delta_prime(const EstimationContext& ctx);
// Diagonal covariances only; uses S and Λ of the element-wise estimator.
EwUpsilon ew_upsilon(const EstimationContext& ctx);
MulticellDelta multicell_delta(const EstimationContext& ctx, int j, int k);

// G_ab = tr(R_a Z^-1 R_b Q^-1)/M at BS j over the UEs sharing the pilot of (j,k); (j,k) comes first,
// the rest follow in pilot-group order.
CMat weighted_gram(const EstimationContext& ctx, int j, int k);

enum class NormMode { Frobenius, Weighted };

struct MarginWeights {
    CMat Qinv;
    CMat Zinv;
};

struct MarginResult {
    double margin = 0.0;
    CVec lambda;  // minimizer, lambda(i) = 1
};

// inf over λ with λ_i = 1 of the quadratic form λ^H G λ, G the Gram matrix of the list.
// Frobenius: G_ab = tr(R_a R_b)/M. Weighted: G_ab = tr(Q^-1 R_a Z^-1 R_b)/M, needs `w`.
MarginResult independence_minimizer(const std::vector<CMat>& rs, int i, NormMode mode,
                                    const MarginWeights* w = nullptr);
double independence_margin(const std::vector<CMat>& rs, int i, NormMode mode = NormMode::Frobenius,
                           const MarginWeights* w = nullptr);
// Same minimization on a precomputed Hermitian Gram matrix; singular sub-blocks use a pseudo-inverse.
MarginResult gram_margin(const CMat& G, int i);

struct GramDiagnostics {
    double cond = 0.0;               // of C_jk; +inf when singular
    double u_margin = 0.0;           // margin of the u vectors with the serving one pinned
    double frobenius_margin = 0.0;   // plain Frobenius margin of the same covariances
    bool independent = false;        // cond <= 1e12 and u_margin > 0
};

GramDiagnostics gram_diagnostics(const EstimationContext& ctx, int j, int k);

// Relative threshold below which a margin counts as zero.
constexpr double kMarginZeroTol = 1e-10;

}  // namespace mimo
