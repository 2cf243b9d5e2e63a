#include "mimo/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mimo/errors.hpp"

namespace mimo {

const char* estimator_name(Estimator e) { return e == Estimator::MMSE ? "mmse" : "ew-mmse"; }

Estimator parse_estimator(const std::string& s) {
    if (s == "mmse") return Estimator::MMSE;
    if (s == "ew-mmse") return Estimator::EW_MMSE;
    throw ConfigError("unknown estimator '" + s + "'");
}

EstimationContext::EstimationContext(NetworkScenario s) : s_(std::move(s)) {
    s_.validate();
    const int L = s_.L, K = s_.K, M = s_.M, P = s_.tau_p;
    const auto groups = pilot_groups(s_);
    const CMat eye = CMat::Identity(M, M);

    q_.resize(L * P);
    q_solve_.resize(L * P);
    lambda_.resize(L * P);
    gain_.resize(L * L * K);
    diag_gain_.resize(L * L * K);
    ew_gain_.resize(L * L * K);
    z_.resize(L);
    zbar_.resize(L);
    z_solve_.resize(L);
    s_ew_.resize(L);
    sbar_ew_.resize(L);

    for (int j = 0; j < L; ++j) {
        CMat z = eye / s_.rho_ul;
        CMat zbar = eye / s_.rho_ul;
        RVec sew = RVec::Constant(M, 1.0 / s_.rho_ul);
        RVec sbar = sew;
        for (int p = 0; p < P; ++p) {
            const auto& g = groups[p];
            CMat q = eye / s_.rho_tr;
            RVec lam = RVec::Constant(M, 1.0 / s_.rho_tr);
            bool all_diag = true;
            for (const auto& u : g) {
                const auto& R = s_.R(j, u.cell, u.ue);
                q += R.mat();
                lam += R.diag();
                all_diag = all_diag && R.is_diagonal();
            }
            q_[j * P + p] = HermitianMatrix(q);
            q_solve_[j * P + p] = HermitianSolver(q_[j * P + p].mat());
            lambda_[j * P + p] = lam;
            for (const auto& u : g) {
                const int id = link(j, u.cell, u.ue);
                const auto& R = s_.R(j, u.cell, u.ue);
                const RVec d = R.diag();
                ew_gain_[id] = d.cwiseQuotient(lam);
                const RVec ew_err = d - d.cwiseProduct(ew_gain_[id]);
                sew += ew_err;
                if (all_diag) {
                    diag_gain_[id] = ew_gain_[id];
                    const RVec err = d - d.cwiseProduct(ew_gain_[id]);
                    z.diagonal() += err.cast<cplx>();
                } else {
                    gain_[id] = q_solve_[j * P + p].solve(R.mat()).adjoint();
                    z += R.mat() - gain_[id] * R.mat();
                }
                if (u.cell == j) {
                    sbar += ew_err;
                    if (all_diag)
                        zbar.diagonal() += (d - d.cwiseProduct(ew_gain_[id])).cast<cplx>();
                    else
                        zbar += R.mat() - gain_[id] * R.mat();
                } else {
                    sbar += d;
                    zbar += R.mat();
                }
            }
        }
        z_[j] = HermitianMatrix(z);
        zbar_[j] = HermitianMatrix(zbar);
        try {
            z_solve_[j] = HermitianSolver(z_[j].mat());
        } catch (const Singular&) {
            throw NotPSD("Z_" + std::to_string(j) + " is not positive definite");
        }
        s_ew_[j] = sew;
        sbar_ew_[j] = sbar;
    }
}

HermitianMatrix EstimationContext::Phi(int j, int l, int i) const {
    const auto& R = s_.R(j, l, i);
    const auto& dg = diag_gain(j, l, i);
    if (dg) return HermitianMatrix::diagonal(R.diag().cwiseProduct(*dg));
    return HermitianMatrix(gain(j, l, i) * R.mat());
}

CMat EstimationContext::Upsilon(int j, UeId a, UeId b) const {
    if (s_.pilot(a.cell, a.ue) != s_.pilot(b.cell, b.ue))
        throw std::invalid_argument("Upsilon: UEs do not share a pilot");
    const auto& Rb = s_.R(j, b.cell, b.ue);
    const auto& dg = diag_gain(j, a.cell, a.ue);
    if (dg) {
        CMat u = CMat::Zero(s_.M, s_.M);
        u.diagonal() = dg->cwiseProduct(Rb.diag()).cast<cplx>();
        return u;
    }
    return gain(j, a.cell, a.ue) * Rb.mat();
}

CMat EstimationContext::ew_Theta(int j, UeId a, UeId b) const {
    const int p = s_.pilot(a.cell, a.ue);
    if (p != s_.pilot(b.cell, b.ue)) throw std::invalid_argument("ew_Theta: UEs do not share a pilot");
    const RVec& ga = ew_gain(j, a.cell, a.ue);
    const RVec& gb = ew_gain(j, b.cell, b.ue);
    return ga.cast<cplx>().asDiagonal() * Q(j, p).mat() * gb.cast<cplx>().asDiagonal();
}

CMat EstimationContext::ew_cross(int j, int l, int i) const {
    return ew_gain(j, l, i).cast<cplx>().asDiagonal() * s_.R(j, l, i).mat() - ew_Sigma(j, l, i);
}

EstimationContext estimation_statistics(const NetworkScenario& s) { return EstimationContext(s); }

void check_error_covariances(const EstimationContext& ctx) {
    const auto& s = ctx.scenario();
    for (int j = 0; j < s.L; ++j)
        for (int l = 0; l < s.L; ++l)
            for (int i = 0; i < s.K; ++i) {
                const auto& R = s.R(j, l, i);
                const double tol = 1e-10 * std::max(R.factor().eigenvalues(0), 1e-300);
                HermitianMatrix e(R.mat() - ctx.Phi(j, l, i).mat());
                psd_factor(e, tol);
            }
}

ChannelDraw draw_channels(const EstimationContext& ctx, RngStream& rng) {
    const auto& s = ctx.scenario();
    ChannelDraw d;
    d.L = s.L;
    d.K = s.K;
    d.M = s.M;
    d.tau_p = s.tau_p;
    for (int l = 0; l < s.L; ++l)
        for (int i = 0; i < s.K; ++i) d.pilot_of.push_back(s.pilot(l, i));
    d.h.resize(s.L * s.L * s.K);
    for (int j = 0; j < s.L; ++j)
        for (int l = 0; l < s.L; ++l)
            for (int i = 0; i < s.K; ++i) d.h[d.link(j, l, i)] = sample_cn(s.R(j, l, i).factor(), rng);
    const double noise = 1.0 / std::sqrt(s.rho_tr);
    d.y.assign(s.L * s.tau_p, CVec());
    for (int j = 0; j < s.L; ++j)
        for (int p = 0; p < s.tau_p; ++p) d.y[j * s.tau_p + p] = rng.cnormal_vec(s.M) * noise;
    for (int j = 0; j < s.L; ++j)
        for (int l = 0; l < s.L; ++l)
            for (int i = 0; i < s.K; ++i) d.y[j * s.tau_p + s.pilot(l, i)] += d.h[d.link(j, l, i)];
    return d;
}

void estimate_mmse(const EstimationContext& ctx, ChannelDraw& d) {
    const auto& s = ctx.scenario();
    d.estimator = Estimator::MMSE;
    d.hhat.resize(d.h.size());
    for (int j = 0; j < s.L; ++j)
        for (int l = 0; l < s.L; ++l)
            for (int i = 0; i < s.K; ++i) {
                const CVec& y = d.y[j * s.tau_p + s.pilot(l, i)];
                const auto& dg = ctx.diag_gain(j, l, i);
                d.hhat[d.link(j, l, i)] = dg ? CVec(dg->cast<cplx>().cwiseProduct(y)) : CVec(ctx.gain(j, l, i) * y);
            }
}

void estimate_ew(const EstimationContext& ctx, ChannelDraw& d) {
    const auto& s = ctx.scenario();
    d.estimator = Estimator::EW_MMSE;
    d.hhat.resize(d.h.size());
    for (int j = 0; j < s.L; ++j)
        for (int l = 0; l < s.L; ++l)
            for (int i = 0; i < s.K; ++i) {
                const CVec& y = d.y[j * s.tau_p + s.pilot(l, i)];
                d.hhat[d.link(j, l, i)] = ctx.ew_gain(j, l, i).cast<cplx>().cwiseProduct(y);
            }
}

ChannelDraw draw_and_estimate_mmse(const EstimationContext& ctx, RngStream& rng) {
    ChannelDraw d = draw_channels(ctx, rng);
    estimate_mmse(ctx, d);
    return d;
}

ChannelDraw draw_and_estimate_ew(const EstimationContext& ctx, RngStream& rng) {
    ChannelDraw d = draw_channels(ctx, rng);
    estimate_ew(ctx, d);
    return d;
}

ChannelDraw draw_and_estimate(const EstimationContext& ctx, Estimator e, RngStream& rng) {
    return e == Estimator::MMSE ? draw_and_estimate_mmse(ctx, rng) : draw_and_estimate_ew(ctx, rng);
}

CVec ew_estimate_raw(const RVec& d_k, const RVec& lambda, double rho_tr, const CVec& raw_obs) {
    return d_k.cwiseQuotient(lambda).cast<cplx>().cwiseProduct(raw_obs) / std::sqrt(rho_tr);
}

}  // namespace mimo
