#pragma once

#include <vector>

#include "mimo/combining.hpp"

namespace mimo {

enum class Direction { UL, DL };
enum class Bound { CapacityLB, UatF };

const char* bound_name(Bound b);

struct SeReport {
    Scheme scheme = Scheme::MR;
    Estimator estimator = Estimator::MMSE;
    Direction direction = Direction::UL;
    Bound bound = Bound::CapacityLB;
    int trials = 0;
    double prelog = 1.0;
    int L = 0;
    int K = 0;
    int M = 0;
    // per UE, index j*K + k
    std::vector<double> se;
    std::vector<double> se_stderr;
    std::vector<double> sinr;  // mean instantaneous γ, or the bound's effective SINR
    // network average over all UEs
    double se_mean = 0.0;
    double se_mean_stderr = 0.0;

    double sinr_over_M(int u) const { return sinr[u] / M; }
    double sinr_over_M_mean() const;
};

struct PowerDecomposition {
    int L = 0;
    int K = 0;
    // per UE, index j*K + k; all normalized by the noise power
    std::vector<double> desired;
    std::vector<double> same_pilot_interf;
    std::vector<double> other_interf;
    std::vector<double> noise;
    std::vector<double> total;  // E{ρ Σ|v^H h|² + ||v||²} accumulated separately
};

// γ per (j,k) with estimation errors folded into Z_j.
std::vector<double> ul_sinr_instant(const ChannelDraw& d, const EstimationContext& ctx, const CombinerSet& c);
// ĥ^H (Σ_{≠} ĥĥ^H + Z)^{-1} ĥ, the M-MMSE SINR in closed form.
double mmse_sinr_quadratic(const ChannelDraw& d, const EstimationContext& ctx, int j, int k);

// Uplink SE with the instantaneous-SINR capacity bound; schemes share channel draws.
std::vector<SeReport> ul_se(const EstimationContext& ctx, const std::vector<Scheme>& schemes, int trials,
                            Estimator e = Estimator::MMSE, const RunOptions& opt = {});
SeReport ul_se(const EstimationContext& ctx, Scheme s, int trials, Estimator e = Estimator::MMSE,
               const RunOptions& opt = {});

// Use-and-then-forget bound; throws NegativeVariance if the estimated denominator is not positive.
std::vector<SeReport> ul_se_uatf(const EstimationContext& ctx, const std::vector<Scheme>& schemes, int trials,
                                 Estimator e = Estimator::MMSE, const RunOptions& opt = {});

// Downlink UatF SE with w = sqrt(ϑ) v; ϑ from `theta_trials` independent draws.
std::vector<SeReport> dl_se(const EstimationContext& ctx, const std::vector<Scheme>& schemes, int trials,
                            Estimator e = Estimator::MMSE, const RunOptions& opt = {}, int theta_trials = 500);

PowerDecomposition power_decomposition(const EstimationContext& ctx, Scheme s, int trials,
                                       Estimator e = Estimator::MMSE, const RunOptions& opt = {});

// Each cell alone (no intercell links) with M-MMSE; SE scaled by 1/L.
SeReport time_splitting_se(const NetworkScenario& s, int trials, const RunOptions& opt = {});

}  // namespace mimo
