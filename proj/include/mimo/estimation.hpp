#pragma once

#include <optional>
#include <vector>

#include "mimo/scenario.hpp"

namespace mimo {

enum class Estimator { MMSE, EW_MMSE };

const char* estimator_name(Estimator e);
Estimator parse_estimator(const std::string& s);

// Closed-form second-order statistics, computed once per scenario.
class EstimationContext {
public:
    explicit EstimationContext(NetworkScenario s);

    const NetworkScenario& scenario() const { return s_; }
    int L() const { return s_.L; }
    int K() const { return s_.K; }
    int M() const { return s_.M; }
    int link(int j, int l, int i) const { return (j * s_.L + l) * s_.K + i; }

    // Q_jp = sum of R over UEs on pilot p + I/rho_tr
    const HermitianMatrix& Q(int j, int p) const { return q_[j * s_.tau_p + p]; }
    const HermitianSolver& Q_solver(int j, int p) const { return q_solve_[j * s_.tau_p + p]; }
    // R_jli Q_jp^{-1}; the MMSE estimate is gain * observation
    const CMat& gain(int j, int l, int i) const { return gain_[link(j, l, i)]; }
    // set when every covariance sharing the pilot at BS j is diagonal
    const std::optional<RVec>& diag_gain(int j, int l, int i) const { return diag_gain_[link(j, l, i)]; }

    HermitianMatrix Phi(int j, int l, int i) const;
    // R_ja Q^{-1} R_jb for two UEs on the same pilot
    CMat Upsilon(int j, UeId a, UeId b) const;

    const HermitianMatrix& Z(int j) const { return z_[j]; }
    const HermitianMatrix& Zbar(int j) const { return zbar_[j]; }
    const HermitianSolver& Z_solver(int j) const { return z_solve_[j]; }

    // Element-wise MMSE statistics (all diagonal).
    RVec D(int j, int l, int i) const { return s_.R(j, l, i).diag(); }
    const RVec& Lambda(int j, int p) const { return lambda_[j * s_.tau_p + p]; }
    const RVec& S(int j) const { return s_ew_[j]; }
    const RVec& Sbar(int j) const { return sbar_ew_[j]; }
    // D_jli Lambda^{-1}
    const RVec& ew_gain(int j, int l, int i) const { return ew_gain_[link(j, l, i)]; }
    // E{ĥ_a ĥ_b^H} = D_a Λ^{-1} Q Λ^{-1} D_b for the EW estimator
    CMat ew_Theta(int j, UeId a, UeId b) const;
    CMat ew_Sigma(int j, int l, int i) const { return ew_Theta(j, {l, i}, {l, i}); }
    // E{ĥ h̃^H} = D Λ^{-1} R − Σ for the EW estimator
    CMat ew_cross(int j, int l, int i) const;

private:
    NetworkScenario s_;
    std::vector<HermitianMatrix> q_;
    std::vector<HermitianSolver> q_solve_;
    std::vector<CMat> gain_;
    std::vector<std::optional<RVec>> diag_gain_;
    std::vector<HermitianMatrix> z_, zbar_;
    std::vector<HermitianSolver> z_solve_;
    std::vector<RVec> lambda_, s_ew_, sbar_ew_, ew_gain_;
};

EstimationContext estimation_statistics(const NetworkScenario& s);

// Full eigen check of every R − Φ; throws NotPSD beyond the clip tolerance. O(L^2 K M^3).
void check_error_covariances(const EstimationContext& ctx);

struct ChannelDraw {
    int L = 0;
    int K = 0;
    int M = 0;
    int tau_p = 0;
    Estimator estimator = Estimator::MMSE;
    std::vector<int> pilot_of;  // index l*K + i
    std::vector<CVec> h;     // true channels, link order
    std::vector<CVec> hhat;  // estimates, link order
    std::vector<CVec> y;     // de-spread observation per (j, p): sum of h + n/sqrt(rho_tr)

    int link(int j, int l, int i) const { return (j * L + l) * K + i; }
    int pilot(int l, int i) const { return pilot_of[l * K + i]; }
    const CVec& H(int j, int l, int i) const { return h[link(j, l, i)]; }
    const CVec& Hhat(int j, int l, int i) const { return hhat[link(j, l, i)]; }
    CVec Htilde(int j, int l, int i) const { return H(j, l, i) - Hhat(j, l, i); }
};

// Channels and observations only; hhat is left empty.
ChannelDraw draw_channels(const EstimationContext& ctx, RngStream& rng);
void estimate_mmse(const EstimationContext& ctx, ChannelDraw& d);
void estimate_ew(const EstimationContext& ctx, ChannelDraw& d);

ChannelDraw draw_and_estimate_mmse(const EstimationContext& ctx, RngStream& rng);
ChannelDraw draw_and_estimate_ew(const EstimationContext& ctx, RngStream& rng);
ChannelDraw draw_and_estimate(const EstimationContext& ctx, Estimator e, RngStream& rng);

// EW estimate straight from the raw observation Y^p φ* (not divided by sqrt(rho_tr)); d_k and lambda are diagonals.
CVec ew_estimate_raw(const RVec& d_k, const RVec& lambda, double rho_tr, const CVec& raw_obs);

}  // namespace mimo
