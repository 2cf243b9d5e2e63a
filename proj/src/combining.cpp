#include "mimo/combining.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "mimo/errors.hpp"
#include "mimo/parallel.hpp"
#include "streams.hpp"

namespace mimo {

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::MR: return "mr";
        case Scheme::S_MMSE: return "s-mmse";
        case Scheme::M_MMSE: return "m-mmse";
        case Scheme::M_ZF: return "m-zf";
        case Scheme::APPROX_M_MMSE: return "approx-m-mmse";
        case Scheme::PCP: return "pcp";
    }
    return "?";
}

Scheme parse_scheme(const std::string& s) {
    if (s == "mr") return Scheme::MR;
    if (s == "s-mmse") return Scheme::S_MMSE;
    if (s == "m-mmse") return Scheme::M_MMSE;
    if (s == "m-zf") return Scheme::M_ZF;
    if (s == "approx-m-mmse") return Scheme::APPROX_M_MMSE;
    if (s == "pcp") return Scheme::PCP;
    throw ConfigError("unknown scheme '" + s + "'");
}

CVec CombinerSet::w(int j, int k) const {
    if (theta.empty()) throw std::logic_error("CombinerSet::w: normalization not set");
    return at(j, k) * std::sqrt(theta[j * K + k]);
}

namespace {

CombinerSet empty_set(Scheme s, const ChannelDraw& d) {
    CombinerSet c;
    c.scheme = s;
    c.L = d.L;
    c.K = d.K;
    c.v.resize(d.L * d.K);
    return c;
}

void require_estimates(const ChannelDraw& d) {
    if (d.hhat.size() != d.h.size()) throw std::invalid_argument("channel draw has no estimates");
}

// Columns ĥ_jli for every UE (cells in the given range), in link order.
CMat stack_estimates(const ChannelDraw& d, int j, int l0, int l1) {
    CMat H(d.M, (l1 - l0) * d.K);
    for (int l = l0; l < l1; ++l)
        for (int i = 0; i < d.K; ++i) H.col((l - l0) * d.K + i) = d.Hhat(j, l, i);
    return H;
}

// v_jk = (H H^H + N)^{-1} ĥ_jjk for every k in cell j.
void regularized(CombinerSet& c, const ChannelDraw& d, int j, const CMat& H, CMat N) {
    N.noalias() += H * H.adjoint();
    HermitianSolver solver(N);
    CMat own(d.M, d.K);
    for (int k = 0; k < d.K; ++k) own.col(k) = d.Hhat(j, j, k);
    CMat V = solver.solve(own);
    for (int k = 0; k < d.K; ++k) c.v[j * d.K + k] = V.col(k);
}

CMat diag_mat(const RVec& s) {
    CMat n = CMat::Zero(s.size(), s.size());
    n.diagonal() = s.cast<cplx>();
    return n;
}

}  // namespace

CombinerSet mr(const ChannelDraw& d) {
    require_estimates(d);
    CombinerSet c = empty_set(Scheme::MR, d);
    for (int j = 0; j < d.L; ++j)
        for (int k = 0; k < d.K; ++k) c.v[j * d.K + k] = d.Hhat(j, j, k);
    return c;
}

CombinerSet m_mmse(const ChannelDraw& d, const EstimationContext& ctx) {
    require_estimates(d);
    CombinerSet c = empty_set(Scheme::M_MMSE, d);
    for (int j = 0; j < d.L; ++j) regularized(c, d, j, stack_estimates(d, j, 0, d.L), ctx.Z(j).mat());
    return c;
}

CombinerSet s_mmse(const ChannelDraw& d, const EstimationContext& ctx) {
    require_estimates(d);
    CombinerSet c = empty_set(Scheme::S_MMSE, d);
    for (int j = 0; j < d.L; ++j) {
        CMat N = d.estimator == Estimator::MMSE ? ctx.Zbar(j).mat() : diag_mat(ctx.Sbar(j));
        regularized(c, d, j, stack_estimates(d, j, j, j + 1), std::move(N));
    }
    return c;
}

CombinerSet approx_m_mmse(const ChannelDraw& d, const EstimationContext& ctx) {
    require_estimates(d);
    CombinerSet c = empty_set(Scheme::APPROX_M_MMSE, d);
    for (int j = 0; j < d.L; ++j) regularized(c, d, j, stack_estimates(d, j, 0, d.L), diag_mat(ctx.S(j)));
    return c;
}

CVec zf_vector(const CMat& H, bool rank_reduce) {
    CMat sel = H;
    if (rank_reduce && H.cols() > 1) {
        // pivoted Gram–Schmidt over the interferer columns
        const int n = static_cast<int>(H.cols()) - 1;
        std::vector<CVec> basis;
        std::vector<int> keep;
        std::vector<bool> used(n, false);
        std::vector<CVec> resid(n);
        std::vector<double> norm0(n);
        for (int c = 0; c < n; ++c) {
            resid[c] = H.col(c + 1);
            norm0[c] = resid[c].norm();
        }
        for (;;) {
            int best = -1;
            double best_rel = 0.0;
            for (int c = 0; c < n; ++c) {
                if (used[c] || norm0[c] == 0.0) continue;
                const double rel = resid[c].norm() / norm0[c];
                if (rel > best_rel) best_rel = rel, best = c;
            }
            if (best < 0 || best_rel < 1e-8) break;
            used[best] = true;
            keep.push_back(best);
            CVec q = resid[best] / resid[best].norm();
            for (int c = 0; c < n; ++c)
                if (!used[c]) resid[c] -= q * q.dot(resid[c]);
            basis.push_back(std::move(q));
        }
        CVec own = H.col(0);
        for (const auto& q : basis) own -= q * q.dot(own);
        const double on = H.col(0).norm();
        if (on == 0.0 || own.norm() / on < 1e-8)
            throw RankDeficient("own estimate lies in the span of the interferers");
        sel.resize(H.rows(), 1 + static_cast<Eigen::Index>(keep.size()));
        sel.col(0) = H.col(0);
        for (size_t t = 0; t < keep.size(); ++t) sel.col(1 + t) = H.col(1 + keep[t]);
    }
    const CMat G = sel.adjoint() * sel;
    Eigen::SelfAdjointEigenSolver<CMat> es(G, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0), lmax = es.eigenvalues()(G.rows() - 1);
    if (!(lmin > 0.0) || lmax / lmin > 1e12)
        throw RankDeficient("Gram condition number " + std::to_string(lmin > 0.0 ? lmax / lmin : INFINITY) +
                            " exceeds 1e12");
    CVec e1 = CVec::Zero(G.rows());
    e1(0) = 1.0;
    return sel * G.ldlt().solve(e1);
}

CombinerSet m_zf(const ChannelDraw& d, const ZfOptions& opt) {
    require_estimates(d);
    CombinerSet c = empty_set(Scheme::M_ZF, d);
    for (int j = 0; j < d.L; ++j)
        for (int k = 0; k < d.K; ++k) {
            std::vector<const CVec*> cols{&d.Hhat(j, j, k)};
            for (int l = 0; l < d.L; ++l)
                for (int i = 0; i < d.K; ++i) {
                    if (l == j && i == k) continue;
                    if (opt.basis == ZfBasis::SamePilot && d.pilot(l, i) != d.pilot(j, k)) continue;
                    cols.push_back(&d.Hhat(j, l, i));
                }
            CMat H(d.M, static_cast<Eigen::Index>(cols.size()));
            for (size_t t = 0; t < cols.size(); ++t) H.col(t) = *cols[t];
            try {
                c.v[j * d.K + k] = zf_vector(H, opt.rank_reduce);
            } catch (const RankDeficient& e) {
                std::string msg = e.what();
                msg = msg.substr(msg.find(": ") + 2);
                throw RankDeficient("m-zf for UE " + std::to_string(j) + ":" + std::to_string(k) + ": " + msg);
            }
        }
    return c;
}

CombinerSet combine(Scheme s, const ChannelDraw& d, const EstimationContext& ctx, const ZfOptions& zf) {
    switch (s) {
        case Scheme::MR: return mr(d);
        case Scheme::S_MMSE: return s_mmse(d, ctx);
        case Scheme::M_MMSE: return m_mmse(d, ctx);
        case Scheme::M_ZF: return m_zf(d, zf);
        case Scheme::APPROX_M_MMSE: return approx_m_mmse(d, ctx);
        case Scheme::PCP: break;
    }
    throw std::invalid_argument("combine: pcp needs the two-array topology, use pcp()");
}

CombinerSet pcp(const CVec& y, const Eigen::Matrix2d& b, int m_half) {
    if (y.size() != 2 * m_half) throw std::invalid_argument("pcp: observation length must be 2*M'");
    const double det = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
    const double scale = std::abs(b(0, 0) * b(1, 1)) + std::abs(b(0, 1) * b(1, 0));
    if (std::abs(det) <= 1e-12 * scale) throw SingularGain("b11*b22 == b12*b21");
    CMat Y = CMat::Zero(2 * m_half, 2);
    Y.col(0).head(m_half) = y.head(m_half) / double(m_half);
    Y.col(1).tail(m_half) = y.tail(m_half) / double(m_half);
    const CMat V = Y * b.inverse().cast<cplx>();
    CombinerSet c;
    c.scheme = Scheme::PCP;
    c.L = 1;
    c.K = 2;
    c.v = {V.col(0), V.col(1)};
    return c;
}

double precoder_scale(const std::vector<CVec>& realizations) {
    CompensatedSum s;
    for (const auto& v : realizations) s.add(v.squaredNorm());
    return realizations.size() / s.value();
}

std::vector<double> precoder_normalize(const EstimationContext& ctx, Scheme s, Estimator e, int trials,
                                       const RunOptions& opt) {
    if (trials < 1) throw std::invalid_argument("precoder_normalize: trials must be >= 1");
    const int n = ctx.L() * ctx.K();
    std::vector<double> norms(static_cast<size_t>(trials) * n);
    parallel_for(trials, opt.threads, [&](int t) {
        RngStream rng(opt.seed, stream_id({streams::kTheta, std::uint64_t(t)}));
        const ChannelDraw d = draw_and_estimate(ctx, e, rng);
        const CombinerSet c = combine(s, d, ctx, opt.zf);
        for (int u = 0; u < n; ++u) norms[static_cast<size_t>(t) * n + u] = c.v[u].squaredNorm();
    });
    std::vector<double> theta(n);
    for (int u = 0; u < n; ++u) {
        CompensatedSum acc;
        for (int t = 0; t < trials; ++t) acc.add(norms[static_cast<size_t>(t) * n + u]);
        theta[u] = trials / acc.value();
    }
    return theta;
}

void apply_normalization(CombinerSet& c, const std::vector<double>& theta) {
    if (static_cast<int>(theta.size()) != c.L * c.K) throw std::invalid_argument("theta size mismatch");
    c.theta = theta;
}

}  // namespace mimo
