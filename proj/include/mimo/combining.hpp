#pragma once

#include <string>
#include <vector>

#include "mimo/estimation.hpp"

namespace mimo {

enum class Scheme { MR, S_MMSE, M_MMSE, M_ZF, APPROX_M_MMSE, PCP };

const char* scheme_name(Scheme s);
Scheme parse_scheme(const std::string& s);

struct CombinerSet {
    Scheme scheme = Scheme::MR;
    int L = 0;
    int K = 0;
    std::vector<CVec> v;         // index j*K + k
    std::vector<double> theta;   // precoder normalization, empty until set

    const CVec& at(int j, int k) const { return v[j * K + k]; }
    CVec w(int j, int k) const;  // sqrt(theta) * v
};

enum class ZfBasis { SamePilot, AllUes };

struct ZfOptions {
    ZfBasis basis = ZfBasis::SamePilot;
    // drop interferer columns whose residual after pivoted Gram–Schmidt is below 1e-8 (relative)
    bool rank_reduce = false;
};

CombinerSet mr(const ChannelDraw& d);
CombinerSet m_mmse(const ChannelDraw& d, const EstimationContext& ctx);
// With an EW draw this is the approximate S-MMSE scheme (diagonal S̄ in place of Z̄).
CombinerSet s_mmse(const ChannelDraw& d, const EstimationContext& ctx);
CombinerSet m_zf(const ChannelDraw& d, const ZfOptions& opt = {});
CombinerSet approx_m_mmse(const ChannelDraw& d, const EstimationContext& ctx);

CombinerSet combine(Scheme s, const ChannelDraw& d, const EstimationContext& ctx, const ZfOptions& zf = {});

// Columns of H (H^H H)^{-1} e_1 for H = [own, interferers...]; throws RankDeficient.
CVec zf_vector(const CMat& H, bool rank_reduce = false);

// Two distributed arrays of M' antennas, two UEs. `y` is the de-spread observation (length 2M').
// Returns L = 1, K = 2 set with v_1, v_2 per the pilot-contamination precoding heuristic.
CombinerSet pcp(const CVec& y, const Eigen::Matrix2d& b, int m_half);

// 1 / mean(||v||^2) over the given realizations.
double precoder_scale(const std::vector<CVec>& realizations);

struct RunOptions {
    std::uint64_t seed = 1;
    int threads = 1;
    ZfOptions zf;
};

// ϑ_jk = 1/E{||v_jk||^2} from `trials` fresh draws (streams independent of any SE run).
std::vector<double> precoder_normalize(const EstimationContext& ctx, Scheme s, Estimator e, int trials,
                                       const RunOptions& opt = {});
void apply_normalization(CombinerSet& c, const std::vector<double>& theta);

}  // namespace mimo
