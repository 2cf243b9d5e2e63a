#include "mimo/se.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mimo/errors.hpp"
#include "mimo/parallel.hpp"
#include "streams.hpp"

namespace mimo {

const char* bound_name(Bound b) { return b == Bound::CapacityLB ? "capacity-lb" : "uatf"; }

double SeReport::sinr_over_M_mean() const {
    CompensatedSum s;
    for (double g : sinr) s.add(g / M);
    return sinr.empty() ? 0.0 : s.value() / sinr.size();
}

namespace {

double mean_of(const std::vector<double>& x, size_t n, size_t stride, size_t offset) {
    CompensatedSum s;
    for (size_t t = 0; t < n; ++t) s.add(x[t * stride + offset]);
    return s.value() / n;
}

double stderr_of(const std::vector<double>& x, size_t n, size_t stride, size_t offset, double mean) {
    if (n < 2) return 0.0;
    CompensatedSum s;
    for (size_t t = 0; t < n; ++t) {
        const double d = x[t * stride + offset] - mean;
        s.add(d * d);
    }
    return std::sqrt(s.value() / (n - 1) / n);
}

SeReport blank_report(const EstimationContext& ctx, Scheme s, Estimator e, Direction dir, Bound b, int trials) {
    SeReport r;
    r.scheme = s;
    r.estimator = e;
    r.direction = dir;
    r.bound = b;
    r.trials = trials;
    r.prelog = ctx.scenario().prelog();
    r.L = ctx.L();
    r.K = ctx.K();
    r.M = ctx.M();
    const int n = r.L * r.K;
    r.se.assign(n, 0.0);
    r.se_stderr.assign(n, 0.0);
    r.sinr.assign(n, 0.0);
    return r;
}

void check_trials(int trials) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
}

// Moments for UatF-type bounds: per (trial, scheme, ue) the record holds
// Re s1, Im s1, s2, extra, where the SINR is |E s1|^2 / (E s2 - |E s1|^2 + E extra).
struct MomentTable {
    size_t trials, schemes, ues;
    std::vector<double> data;
    MomentTable(size_t t, size_t s, size_t u) : trials(t), schemes(s), ues(u), data(t * s * u * 4, 0.0) {}
    double* at(size_t t, size_t s, size_t u) { return &data[((t * schemes + s) * ues + u) * 4]; }
    const double* at(size_t t, size_t s, size_t u) const { return &data[((t * schemes + s) * ues + u) * 4]; }

    // effective SINR over trials [t0, t1); returns NaN if the denominator is not positive
    double sinr(size_t s, size_t u, size_t t0, size_t t1) const {
        CompensatedSum re, im, s2, ex;
        for (size_t t = t0; t < t1; ++t) {
            const double* r = at(t, s, u);
            re.add(r[0]);
            im.add(r[1]);
            s2.add(r[2]);
            ex.add(r[3]);
        }
        const double n = static_cast<double>(t1 - t0);
        const double m1 = (re.value() / n) * (re.value() / n) + (im.value() / n) * (im.value() / n);
        const double den = s2.value() / n - m1 + ex.value() / n;
        return den > 0.0 ? m1 / den : std::nan("");
    }
};

void fill_bound_reports(std::vector<SeReport>& reps, const MomentTable& tab, const char* what) {
    const size_t T = tab.trials;
    const size_t B = std::min<size_t>(10, T);
    for (size_t s = 0; s < reps.size(); ++s) {
        auto& r = reps[s];
        const size_t n = tab.ues;
        std::vector<double> batch_avg(B, 0.0);
        std::vector<int> batch_ok(B, 1);
        CompensatedSum avg;
        for (size_t u = 0; u < n; ++u) {
            const double g = tab.sinr(s, u, 0, T);
            if (!(g >= 0.0))
                throw NegativeVariance(std::string(what) + ": non-positive denominator for scheme " +
                                       scheme_name(r.scheme) + ", UE " + std::to_string(u) +
                                       "; increase trials");
            r.sinr[u] = g;
            r.se[u] = r.prelog * std::log2(1.0 + g);
            avg.add(r.se[u]);
            std::vector<double> bs;
            for (size_t b = 0; b < B; ++b) {
                const double gb = tab.sinr(s, u, b * T / B, (b + 1) * T / B);
                if (gb >= 0.0) {
                    const double v = r.prelog * std::log2(1.0 + gb);
                    bs.push_back(v);
                    batch_avg[b] += v / n;
                } else {
                    batch_ok[b] = 0;
                }
            }
            if (bs.size() >= 2) {
                double m = 0.0;
                for (double v : bs) m += v;
                m /= bs.size();
                double ss = 0.0;
                for (double v : bs) ss += (v - m) * (v - m);
                r.se_stderr[u] = std::sqrt(ss / (bs.size() - 1) / bs.size());
            }
        }
        r.se_mean = avg.value() / n;
        std::vector<double> ok;
        for (size_t b = 0; b < B; ++b)
            if (batch_ok[b]) ok.push_back(batch_avg[b]);
        if (ok.size() >= 2) {
            double m = 0.0;
            for (double v : ok) m += v;
            m /= ok.size();
            double ss = 0.0;
            for (double v : ok) ss += (v - m) * (v - m);
            r.se_mean_stderr = std::sqrt(ss / (ok.size() - 1) / ok.size());
        }
    }
}

}  // namespace

std::vector<double> ul_sinr_instant(const ChannelDraw& d, const EstimationContext& ctx, const CombinerSet& c) {
    std::vector<double> g(d.L * d.K);
    for (int j = 0; j < d.L; ++j) {
        const CMat& Z = ctx.Z(j).mat();
        for (int k = 0; k < d.K; ++k) {
            const CVec& v = c.at(j, k);
            const double num = std::norm(v.dot(d.Hhat(j, j, k)));
            double den = v.dot(Z * v).real();
            for (int l = 0; l < d.L; ++l)
                for (int i = 0; i < d.K; ++i)
                    if (l != j || i != k) den += std::norm(v.dot(d.Hhat(j, l, i)));
            g[j * d.K + k] = num / den;
        }
    }
    return g;
}

double mmse_sinr_quadratic(const ChannelDraw& d, const EstimationContext& ctx, int j, int k) {
    CMat B = ctx.Z(j).mat();
    for (int l = 0; l < d.L; ++l)
        for (int i = 0; i < d.K; ++i)
            if (l != j || i != k) B.noalias() += d.Hhat(j, l, i) * d.Hhat(j, l, i).adjoint();
    const CVec& h = d.Hhat(j, j, k);
    return h.dot(HermitianSolver(B).solve(CVec(h))).real();
}

std::vector<SeReport> ul_se(const EstimationContext& ctx, const std::vector<Scheme>& schemes, int trials,
                            Estimator e, const RunOptions& opt) {
    check_trials(trials);
    const size_t S = schemes.size(), U = ctx.L() * ctx.K();
    std::vector<double> gam(static_cast<size_t>(trials) * S * U);
    parallel_for(trials, opt.threads, [&](int t) {
        RngStream rng(opt.seed, stream_id({streams::kUplink, std::uint64_t(t)}));
        const ChannelDraw d = draw_and_estimate(ctx, e, rng);
        for (size_t s = 0; s < S; ++s) {
            const auto g = ul_sinr_instant(d, ctx, combine(schemes[s], d, ctx, opt.zf));
            std::copy(g.begin(), g.end(), gam.begin() + (static_cast<size_t>(t) * S + s) * U);
        }
    });
    std::vector<SeReport> out;
    for (size_t s = 0; s < S; ++s) {
        SeReport r = blank_report(ctx, schemes[s], e, Direction::UL, Bound::CapacityLB, trials);
        std::vector<double> se(static_cast<size_t>(trials) * U), avg(trials);
        for (int t = 0; t < trials; ++t) {
            CompensatedSum a;
            for (size_t u = 0; u < U; ++u) {
                const double v = r.prelog * std::log2(1.0 + gam[(t * S + s) * U + u]);
                se[t * U + u] = v;
                a.add(v);
            }
            avg[t] = a.value() / U;
        }
        for (size_t u = 0; u < U; ++u) {
            r.se[u] = mean_of(se, trials, U, u);
            r.se_stderr[u] = stderr_of(se, trials, U, u, r.se[u]);
            CompensatedSum g;
            for (int t = 0; t < trials; ++t) g.add(gam[(t * S + s) * U + u]);
            r.sinr[u] = g.value() / trials;
        }
        r.se_mean = mean_of(avg, trials, 1, 0);
        r.se_mean_stderr = stderr_of(avg, trials, 1, 0, r.se_mean);
        out.push_back(std::move(r));
    }
    return out;
}

SeReport ul_se(const EstimationContext& ctx, Scheme s, int trials, Estimator e, const RunOptions& opt) {
    return ul_se(ctx, std::vector<Scheme>{s}, trials, e, opt).front();
}

std::vector<SeReport> ul_se_uatf(const EstimationContext& ctx, const std::vector<Scheme>& schemes, int trials,
                                 Estimator e, const RunOptions& opt) {
    check_trials(trials);
    const int L = ctx.L(), K = ctx.K();
    const size_t S = schemes.size(), U = L * K;
    const double inv_rho = 1.0 / ctx.scenario().rho_ul;
    MomentTable tab(trials, S, U);
    parallel_for(trials, opt.threads, [&](int t) {
        RngStream rng(opt.seed, stream_id({streams::kUatf, std::uint64_t(t)}));
        const ChannelDraw d = draw_and_estimate(ctx, e, rng);
        for (size_t s = 0; s < S; ++s) {
            const CombinerSet c = combine(schemes[s], d, ctx, opt.zf);
            for (int j = 0; j < L; ++j)
                for (int k = 0; k < K; ++k) {
                    const CVec& v = c.at(j, k);
                    const cplx s1 = v.dot(d.H(j, j, k));
                    double s2 = 0.0;
                    for (int l = 0; l < L; ++l)
                        for (int i = 0; i < K; ++i) s2 += std::norm(v.dot(d.H(j, l, i)));
                    double* rec = tab.at(t, s, j * K + k);
                    rec[0] = s1.real();
                    rec[1] = s1.imag();
                    rec[2] = s2;
                    rec[3] = v.squaredNorm() * inv_rho;
                }
        }
    });
    std::vector<SeReport> out;
    for (size_t s = 0; s < S; ++s) out.push_back(blank_report(ctx, schemes[s], e, Direction::UL, Bound::UatF, trials));
    fill_bound_reports(out, tab, "ul_se_uatf");
    return out;
}

std::vector<SeReport> dl_se(const EstimationContext& ctx, const std::vector<Scheme>& schemes, int trials,
                            Estimator e, const RunOptions& opt, int theta_trials) {
    check_trials(trials);
    const int L = ctx.L(), K = ctx.K();
    const size_t S = schemes.size(), U = L * K;
    const double inv_rho = 1.0 / ctx.scenario().rho_dl;
    std::vector<std::vector<double>> theta;
    for (auto s : schemes) theta.push_back(precoder_normalize(ctx, s, e, theta_trials, opt));
    MomentTable tab(trials, S, U);
    parallel_for(trials, opt.threads, [&](int t) {
        RngStream rng(opt.seed, stream_id({streams::kDownlink, std::uint64_t(t)}));
        const ChannelDraw d = draw_and_estimate(ctx, e, rng);
        for (size_t s = 0; s < S; ++s) {
            CombinerSet c = combine(schemes[s], d, ctx, opt.zf);
            apply_normalization(c, theta[s]);
            std::vector<CVec> w(U);
            for (int l = 0; l < L; ++l)
                for (int i = 0; i < K; ++i) w[l * K + i] = c.w(l, i);
            for (int j = 0; j < L; ++j)
                for (int k = 0; k < K; ++k) {
                    // UE (j,k) hears BS l through h_{l j k}
                    const cplx s1 = d.H(j, j, k).dot(w[j * K + k]);
                    double s2 = 0.0;
                    for (int l = 0; l < L; ++l)
                        for (int i = 0; i < K; ++i) s2 += std::norm(d.H(l, j, k).dot(w[l * K + i]));
                    double* rec = tab.at(t, s, j * K + k);
                    rec[0] = s1.real();
                    rec[1] = s1.imag();
                    rec[2] = s2;
                    rec[3] = inv_rho;
                }
        }
    });
    std::vector<SeReport> out;
    for (size_t s = 0; s < S; ++s) out.push_back(blank_report(ctx, schemes[s], e, Direction::DL, Bound::UatF, trials));
    fill_bound_reports(out, tab, "dl_se");
    return out;
}

PowerDecomposition power_decomposition(const EstimationContext& ctx, Scheme s, int trials, Estimator e,
                                       const RunOptions& opt) {
    check_trials(trials);
    const int L = ctx.L(), K = ctx.K();
    const size_t U = L * K;
    const double rho = ctx.scenario().rho_ul;
    std::vector<double> rec(static_cast<size_t>(trials) * U * 5);
    parallel_for(trials, opt.threads, [&](int t) {
        RngStream rng(opt.seed, stream_id({streams::kPower, std::uint64_t(t)}));
        const ChannelDraw d = draw_and_estimate(ctx, e, rng);
        const CombinerSet c = combine(s, d, ctx, opt.zf);
        for (int j = 0; j < L; ++j) {
            CMat Hj(d.M, L * K);
            for (int l = 0; l < L; ++l)
                for (int i = 0; i < K; ++i) Hj.col(l * K + i) = d.H(j, l, i);
            for (int k = 0; k < K; ++k) {
                const CVec& v = c.at(j, k);
                double same = 0.0, other = 0.0;
                for (int l = 0; l < L; ++l)
                    for (int i = 0; i < K; ++i) {
                        if (l == j && i == k) continue;
                        const double p = rho * std::norm(v.dot(d.H(j, l, i)));
                        (d.pilot(l, i) == d.pilot(j, k) ? same : other) += p;
                    }
                double* r = &rec[(static_cast<size_t>(t) * U + j * K + k) * 5];
                r[0] = rho * std::norm(v.dot(d.H(j, j, k)));
                r[1] = same;
                r[2] = other;
                r[3] = v.squaredNorm();
                r[4] = rho * (Hj.adjoint() * v).squaredNorm() + v.squaredNorm();
            }
        }
    });
    PowerDecomposition pd;
    pd.L = L;
    pd.K = K;
    std::vector<double>* fields[5] = {&pd.desired, &pd.same_pilot_interf, &pd.other_interf, &pd.noise, &pd.total};
    for (int f = 0; f < 5; ++f) {
        fields[f]->assign(U, 0.0);
        for (size_t u = 0; u < U; ++u) (*fields[f])[u] = mean_of(rec, trials, U * 5, u * 5 + f);
    }
    return pd;
}

SeReport time_splitting_se(const NetworkScenario& s, int trials, const RunOptions& opt) {
    check_trials(trials);
    SeReport out;
    out.scheme = Scheme::M_MMSE;
    out.trials = trials;
    out.prelog = s.prelog() / s.L;
    out.L = s.L;
    out.K = s.K;
    out.M = s.M;
    const int U = s.L * s.K;
    out.se.assign(U, 0.0);
    out.se_stderr.assign(U, 0.0);
    out.sinr.assign(U, 0.0);
    double var_mean = 0.0;
    for (int j = 0; j < s.L; ++j) {
        std::vector<CovPtr> links;
        for (int i = 0; i < s.K; ++i) links.push_back(s.R_ptr(j, j, i));
        NetworkScenario cell = make_scenario(1, s.K, links, s.rho_tr, s.rho_ul, s.rho_dl, s.tau_c, s.tau_p);
        cell.pilot_of = {s.pilot_of[j]};
        RunOptions o = opt;
        // a lone cell keeps the caller's streams, so L = 1 reproduces ul_se exactly
        if (s.L > 1) o.seed = stream_id({streams::kTimeSplit, opt.seed, std::uint64_t(j)});
        const SeReport r = ul_se(EstimationContext(cell), Scheme::M_MMSE, trials, Estimator::MMSE, o);
        for (int k = 0; k < s.K; ++k) {
            out.se[j * s.K + k] = r.se[k] / s.L;
            out.se_stderr[j * s.K + k] = r.se_stderr[k] / s.L;
            out.sinr[j * s.K + k] = r.sinr[k];
        }
        out.se_mean += r.se_mean / s.L / s.L;
        var_mean += std::pow(r.se_mean_stderr / s.L / s.L, 2);
    }
    out.se_mean_stderr = std::sqrt(var_mean);
    return out;
}

}  // namespace mimo
