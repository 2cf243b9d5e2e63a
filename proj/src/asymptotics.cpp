#include "mimo/asymptotics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "mimo/errors.hpp"

namespace mimo {

namespace {

constexpr double kDegenerate = 1e-14;
constexpr double kCondMax = 1e12;

// tr(A B) without forming the product
cplx trace_prod(const CMat& a, const CMat& b) { return a.cwiseProduct(b.transpose()).sum(); }

struct GroupTraces {
    std::vector<UeId> ues;  // serving first
    CMat G;                 // tr(R_a Z^-1 R_b Q^-1)/M
    CMat Gp;                // same with Z^-2
};

GroupTraces group_traces(const EstimationContext& ctx, int j, int k, bool with_prime) {
    const auto& s = ctx.scenario();
    const int p = s.pilot(j, k);
    GroupTraces t;
    t.ues.push_back({j, k});
    const auto groups = pilot_groups(s);
    for (const auto& u : groups[p])
        if (!(u.cell == j && u.ue == k)) t.ues.push_back(u);
    const int n = static_cast<int>(t.ues.size());
    const double M = s.M;
    std::vector<CMat> a(n), ap(n), b(n);
    for (int x = 0; x < n; ++x) {
        const CMat& R = s.R(j, t.ues[x].cell, t.ues[x].ue).mat();
        const CMat zr = ctx.Z_solver(j).solve(R);
        a[x] = zr.adjoint();  // R Z^-1
        if (with_prime) ap[x] = ctx.Z_solver(j).solve(zr).adjoint();
        b[x] = ctx.Q_solver(j, p).solve(R).adjoint();  // R Q^-1
    }
    t.G.resize(n, n);
    if (with_prime) t.Gp.resize(n, n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            t.G(x, y) = trace_prod(a[x], b[y]) / M;
            if (with_prime) t.Gp(x, y) = trace_prod(ap[x], b[y]) / M;
        }
    // exact Hermitian symmetry; diagonal entries are real traces
    t.G = (0.5 * (t.G + t.G.adjoint())).eval();
    if (with_prime) t.Gp = (0.5 * (t.Gp + t.Gp.adjoint())).eval();
    return t;
}

void require_two_user(const EstimationContext& ctx) {
    const auto& s = ctx.scenario();
    if (s.L != 2 || s.K != 1 || s.pilot(0, 0) != s.pilot(1, 0))
        throw std::invalid_argument("two-user context expected (L = 2, K = 1, shared pilot)");
}

double condition(const CMat& C) {
    if (C.rows() == 0) return 1.0;
    Eigen::SelfAdjointEigenSolver<CMat> es(C, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(C.rows() - 1);
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

}  // namespace

TwoUserDelta two_user_delta(const EstimationContext& ctx) {
    require_two_user(ctx);
    const auto t = group_traces(ctx, 0, 0, false);
    TwoUserDelta r;
    r.beta11 = t.G(0, 0).real();
    r.beta22 = t.G(1, 1).real();
    r.beta12 = t.G(1, 0);
    if (r.beta22 <= kDegenerate || r.beta11 <= kDegenerate)
        throw DegenerateDenominator("beta22 = " + std::to_string(r.beta22));
    r.delta1 = r.beta11 - std::norm(r.beta12) / r.beta22;
    r.delta2 = r.beta22 - std::norm(r.beta12) / r.beta11;
    return r;
}

DlDeltaPrime dl_delta_prime(const EstimationContext& ctx) {
    require_two_user(ctx);
    const auto t = group_traces(ctx, 0, 0, true);
    DlDeltaPrime r;
    r.beta11 = t.G(0, 0).real();
    r.beta22 = t.G(1, 1).real();
    r.beta12 = t.G(1, 0);
    r.beta11p = t.Gp(0, 0).real();
    r.beta22p = t.Gp(1, 1).real();
    r.beta12p = t.Gp(1, 0);
    if (r.beta22 <= kDegenerate) throw DegenerateDenominator("beta22 = " + std::to_string(r.beta22));
    const double b22 = r.beta22;
    r.delta1 = r.beta11 - std::norm(r.beta12) / b22;
    r.delta1p = r.beta11p - 2.0 * (r.beta12 * std::conj(r.beta12p)).real() / b22 +
                std::norm(r.beta12) * r.beta22p / (b22 * b22);
    // dependent pair: δ1 and δ1' vanish together and the limit is zero, not 0/0
    if (std::abs(r.delta1) <= kMarginZeroTol * r.beta11) return r;
    if (r.delta1p <= kDegenerate) throw DegenerateDenominator("delta1' = " + std::to_string(r.delta1p));
    r.gamma_dl_over_M = ctx.scenario().rho_dl * r.delta1 * r.delta1 / r.delta1p;
    return r;
}

EwUpsilon ew_upsilon(const EstimationContext& ctx) {
    require_two_user(ctx);
    const auto& s = ctx.scenario();
    const RVec r1 = s.R(0, 0, 0).diag(), r2 = s.R(0, 1, 0).diag();
    const RVec& S = ctx.S(0);
    const RVec& lam = ctx.Lambda(0, s.pilot(0, 0));
    const RVec w = (S.cwiseProduct(lam)).cwiseInverse();
    const RVec wp = w.cwiseQuotient(S);
    EwUpsilon u;
    u.alpha11 = r1.cwiseProduct(r1).cwiseProduct(w).mean();
    u.alpha22 = r2.cwiseProduct(r2).cwiseProduct(w).mean();
    u.alpha12 = r1.cwiseProduct(r2).cwiseProduct(w).mean();
    u.alpha11p = r1.cwiseProduct(r1).cwiseProduct(wp).mean();
    u.alpha22p = r2.cwiseProduct(r2).cwiseProduct(wp).mean();
    u.alpha12p = r1.cwiseProduct(r2).cwiseProduct(wp).mean();
    if (u.alpha22 <= kDegenerate) throw DegenerateDenominator("alpha22 = " + std::to_string(u.alpha22));
    const double a22 = u.alpha22;
    u.upsilon1 = u.alpha11 - u.alpha12 * u.alpha12 / a22;
    u.upsilon1p = u.alpha11p - 2.0 * u.alpha12 * u.alpha12p / a22 + u.alpha12 * u.alpha12 * u.alpha22p / (a22 * a22);
    if (std::abs(u.upsilon1) <= kMarginZeroTol * u.alpha11) return u;
    if (u.upsilon1p <= kDegenerate) throw DegenerateDenominator("upsilon1' = " + std::to_string(u.upsilon1p));
    u.gamma_uatf_over_M = s.rho_ul * u.upsilon1 * u.upsilon1 / u.upsilon1p;
    return u;
}

MulticellDelta multicell_delta(const EstimationContext& ctx, int j, int k) {
    if (ctx.L() < 2) throw std::invalid_argument("multicell_delta needs L >= 2");
    const auto t = group_traces(ctx, j, k, false);
    const int n = static_cast<int>(t.ues.size()) - 1;
    MulticellDelta r;
    r.beta = t.G(0, 0).real();
    r.b = t.G.col(0).tail(n);
    r.C = t.G.bottomRightCorner(n, n);
    if (n == 0) {
        r.delta = r.beta;
        return r;
    }
    const double c = condition(r.C);
    if (c > kCondMax)
        throw GramSingular("cond(C) = " + std::to_string(c) + " for UE (" + std::to_string(j) + "," +
                           std::to_string(k) + ")");
    const CVec x = r.C.ldlt().solve(r.b);
    r.delta = r.beta - r.b.dot(x).real();
    return r;
}

CMat weighted_gram(const EstimationContext& ctx, int j, int k) { return group_traces(ctx, j, k, false).G; }

MarginResult gram_margin(const CMat& G, int i) {
    const int n = static_cast<int>(G.rows());
    if (n < 2) throw std::invalid_argument("margin needs at least 2 matrices");
    if (i < 0 || i >= n) throw std::invalid_argument("margin index out of range");
    std::vector<int> rest;
    for (int x = 0; x < n; ++x)
        if (x != i) rest.push_back(x);
    const int m = n - 1;
    CMat sub(m, m);
    CVec g(m);
    for (int a = 0; a < m; ++a) {
        g(a) = G(rest[a], i);
        for (int b = 0; b < m; ++b) sub(a, b) = G(rest[a], rest[b]);
    }
    // pseudo-inverse through the eigendecomposition; tiny eigenvalues are dropped
    Eigen::SelfAdjointEigenSolver<CMat> es(sub);
    const RVec& ev = es.eigenvalues();
    const double cut = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    CVec proj = es.eigenvectors().adjoint() * g;
    for (int a = 0; a < m; ++a) proj(a) = ev(a) > cut ? proj(a) / ev(a) : cplx(0.0);
    const CVec x = es.eigenvectors() * proj;  // sub^+ g
    MarginResult r;
    r.margin = std::max(0.0, G(i, i).real() - g.dot(x).real());
    r.lambda = CVec::Zero(n);
    r.lambda(i) = 1.0;
    for (int a = 0; a < m; ++a) r.lambda(rest[a]) = -x(a);
    return r;
}

MarginResult independence_minimizer(const std::vector<CMat>& rs, int i, NormMode mode, const MarginWeights* w) {
    const int n = static_cast<int>(rs.size());
    if (n < 2) throw std::invalid_argument("margin needs at least 2 matrices");
    const double M = rs[0].rows();
    CMat G(n, n);
    if (mode == NormMode::Frobenius) {
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) {
                // tr(R_a R_b) for Hermitian R_b
                G(a, b) = rs[a].cwiseProduct(rs[b].conjugate()).sum() / M;
                G(b, a) = std::conj(G(a, b));
            }
    } else {
        if (!w) throw std::invalid_argument("weighted margin needs Q^-1 and Z^-1");
        std::vector<CMat> left(n), right(n);
        for (int a = 0; a < n; ++a) {
            left[a] = rs[a] * w->Zinv;   // R_a Z^-1
            right[a] = rs[a] * w->Qinv;  // R_b Q^-1
        }
        // λ^H G λ = tr(Q^-1 X^H Z^-1 X)/M with X = Σ λ R
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) G(a, b) = trace_prod(left[a], right[b]) / M;
        G = (0.5 * (G + G.adjoint())).eval();
    }
    return gram_margin(G, i);
}

double independence_margin(const std::vector<CMat>& rs, int i, NormMode mode, const MarginWeights* w) {
    return independence_minimizer(rs, i, mode, w).margin;
}

GramDiagnostics gram_diagnostics(const EstimationContext& ctx, int j, int k) {
    const auto t = group_traces(ctx, j, k, false);
    const int n = static_cast<int>(t.ues.size()) - 1;
    GramDiagnostics d;
    d.cond = condition(t.G.bottomRightCorner(n, n));
    if (n == 0) {
        d.u_margin = t.G(0, 0).real();
        d.frobenius_margin = t.G(0, 0).real();
        d.independent = d.u_margin > 0.0;
        return d;
    }
    d.u_margin = gram_margin(t.G, 0).margin;
    std::vector<CMat> rs;
    for (const auto& u : t.ues) rs.push_back(ctx.scenario().R(j, u.cell, u.ue).mat());
    d.frobenius_margin = independence_margin(rs, 0, NormMode::Frobenius);
    d.independent = d.cond <= kCondMax && d.u_margin > kMarginZeroTol * t.G(0, 0).real();
    return d;
}

}  // namespace mimo
