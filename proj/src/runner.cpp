#include <gsl/gsl_version.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "mimo/cli.hpp"
#include "mimo/errors.hpp"
#include "mimo/parallel.hpp"
#include "streams.hpp"

#ifndef MIMO_SIM_VERSION
#define MIMO_SIM_VERSION "dev"
#endif

namespace mimo {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTagTrials = 0x7121a1;
constexpr std::uint64_t kTagSpectrum = 0x5bec;
constexpr std::uint64_t kTagPcp = 0x9c9;

std::string fmt(double x) {
    if (std::isnan(x)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

std::string ue_label(int j, int k) { return std::to_string(j) + ":" + std::to_string(k); }

// Rethrows a module error with the experiment coordinates in front, keeping its kind.
[[noreturn]] void rethrow_at(const std::string& where, const Error& e) {
    std::string msg = e.what();
    const std::string prefix = std::string(error_kind_name(e.kind())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    throw Error(e.kind(), where + ": " + msg);
}

std::string sigma_label(const ExperimentConfig& c, double sigma) {
    std::string base = c.preset.empty() ? "custom" : c.preset;
    if (c.sigma_grid.empty()) return base;
    return base + "/sigma=" + fmt(sigma);
}

void add_report_rows(std::vector<ResultRow>& rows, const ExperimentConfig& c, const std::string& label,
                     const SeReport& r, const std::string& scheme, const char* dir,
                     const std::vector<double>& delta) {
    ResultRow row;
    row.preset = label;
    row.scheme = scheme;
    row.estimator = estimator_name(r.estimator);
    row.direction = dir;
    row.M = r.M;
    row.seed = c.seed;
    row.ue = "all";
    row.se_mean = r.se_mean;
    row.se_stderr = r.se_mean_stderr;
    row.sinr_over_M = r.sinr_over_M_mean();
    if (!delta.empty()) {
        double s = 0.0;
        int n = 0;
        for (double d : delta)
            if (!std::isnan(d)) s += d, ++n;
        if (n == static_cast<int>(delta.size())) {
            row.has_delta = true;
            row.delta_prediction = s / n;
        }
    }
    rows.push_back(row);
    if (!c.per_ue) return;
    for (int j = 0; j < r.L; ++j)
        for (int k = 0; k < r.K; ++k) {
            const int u = j * r.K + k;
            ResultRow x = row;
            x.ue = ue_label(j, k);
            x.se_mean = r.se[u];
            x.se_stderr = r.se_stderr[u];
            x.sinr_over_M = r.sinr_over_M(u);
            x.has_delta = !delta.empty() && !std::isnan(delta[u]);
            x.delta_prediction = x.has_delta ? delta[u] : 0.0;
            rows.push_back(x);
        }
}

// Runs `f` on all schemes at once; with skipping enabled a RankDeficient failure falls back to
// one scheme at a time so the remaining schemes still report.
template <class F>
std::vector<std::pair<Scheme, SeReport>> run_schemes(const ExperimentConfig& c, F&& f, json& skipped,
                                                     const std::string& label, int M) {
    std::vector<std::pair<Scheme, SeReport>> out;
    try {
        auto reps = f(c.schemes);
        for (std::size_t s = 0; s < reps.size(); ++s) out.emplace_back(c.schemes[s], std::move(reps[s]));
        return out;
    } catch (const RankDeficient&) {
        if (!c.skip_rank_deficient) throw;
    }
    for (auto s : c.schemes) {
        try {
            auto reps = f(std::vector<Scheme>{s});
            out.emplace_back(s, std::move(reps.front()));
        } catch (const RankDeficient& e) {
            skipped.push_back({{"preset", label}, {"M", M}, {"scheme", scheme_name(s)}, {"reason", e.what()}});
        }
    }
    return out;
}

void run_network(const ExperimentConfig& c, RunOutput& out, json& asym, json& skipped) {
    RunOptions opt;
    opt.seed = stream_id({kTagTrials, c.seed});
    opt.threads = resolve_threads(c.threads);
    opt.zf = c.zf;
    std::vector<double> sigmas = c.sigma_grid;
    if (sigmas.empty()) sigmas.push_back(c.scenario.sigma_db);
    std::ostringstream power_csv;
    power_csv << "preset,scheme,estimator,M,ue,desired,same_pilot_interf,other_interf,noise,total\n";
    json points = json::array();

    for (double sigma : sigmas) {
        const std::string label = sigma_label(c, sigma);
        for (int M : c.m_grid) {
            std::string where = label + ", M=" + std::to_string(M);
            try {
                ScenarioConfig sc = c.scenario;
                sc.M = M;
                sc.sigma_db = sigma;
                sc.seed = c.seed;
                const NetworkScenario s = build_scenario(sc);
                const EstimationContext ctx(s);
                const int L = s.L, K = s.K;

                // deterministic equivalents of the M-MMSE uplink SINR
                std::vector<double> delta(L * K, std::nan(""));
                json point = {{"preset", label}, {"M", M}, {"sigma_db", sigma}};
                json ues = json::array();
                if (L >= 2) {
                    for (int j = 0; j < L; ++j)
                        for (int k = 0; k < K; ++k) {
                            json u = {{"ue", ue_label(j, k)}};
                            try {
                                const auto md = multicell_delta(ctx, j, k);
                                delta[j * K + k] = md.delta;
                                u["beta"] = md.beta;
                                u["delta"] = md.delta;
                            } catch (const GramSingular& e) {
                                u["delta"] = nullptr;
                                u["note"] = e.what();
                            }
                            const auto g = gram_diagnostics(ctx, j, k);
                            u["cond_C"] = std::isfinite(g.cond) ? json(g.cond) : json(nullptr);
                            u["u_margin"] = g.u_margin;
                            u["frobenius_margin"] = g.frobenius_margin;
                            u["independent"] = g.independent;
                            ues.push_back(u);
                        }
                }
                point["ues"] = ues;
                points.push_back(point);
                const bool want_delta = c.estimator == Estimator::MMSE && L >= 2;

                if (c.direction != DirectionSel::DL) {
                    where += ", ul";
                    auto reps = run_schemes(
                        c,
                        [&](const std::vector<Scheme>& ss) {
                            return c.bound == Bound::CapacityLB ? ul_se(ctx, ss, c.trials, c.estimator, opt)
                                                                : ul_se_uatf(ctx, ss, c.trials, c.estimator, opt);
                        },
                        skipped, label, M);
                    for (auto& [sch, r] : reps)
                        add_report_rows(out.rows, c, label, r, scheme_name(sch), "ul",
                                        want_delta && sch == Scheme::M_MMSE && c.bound == Bound::CapacityLB
                                            ? delta
                                            : std::vector<double>{});
                }
                if (c.direction != DirectionSel::UL) {
                    where += ", dl";
                    auto reps = run_schemes(
                        c,
                        [&](const std::vector<Scheme>& ss) {
                            return dl_se(ctx, ss, c.trials, c.estimator, opt, c.theta_trials);
                        },
                        skipped, label, M);
                    for (auto& [sch, r] : reps)
                        add_report_rows(out.rows, c, label, r, scheme_name(sch), "dl", {});
                }
                if (c.time_splitting) {
                    where += ", time-splitting";
                    const SeReport r = time_splitting_se(s, c.trials, opt);
                    add_report_rows(out.rows, c, label, r, "time-splitting", "ul", {});
                }
                if (c.power_decomposition) {
                    where += ", power";
                    for (auto sch : c.schemes) {
                        PowerDecomposition pd;
                        try {
                            pd = power_decomposition(ctx, sch, c.trials, c.estimator, opt);
                        } catch (const RankDeficient& e) {
                            if (!c.skip_rank_deficient) throw;
                            skipped.push_back(
                                {{"preset", label}, {"M", M}, {"scheme", scheme_name(sch)}, {"reason", e.what()}});
                            continue;
                        }
                        double acc[5] = {0, 0, 0, 0, 0};
                        const int U = L * K;
                        for (int u = 0; u < U; ++u) {
                            const double v[5] = {pd.desired[u], pd.same_pilot_interf[u], pd.other_interf[u],
                                                 pd.noise[u], pd.total[u]};
                            for (int f = 0; f < 5; ++f) acc[f] += v[f] / U;
                            if (c.per_ue) {
                                power_csv << csv_field(label) << ',' << scheme_name(sch) << ','
                                          << estimator_name(c.estimator) << ',' << M << ','
                                          << ue_label(u / K, u % K);
                                for (double x : v) power_csv << ',' << fmt(x);
                                power_csv << '\n';
                            }
                        }
                        power_csv << csv_field(label) << ',' << scheme_name(sch) << ','
                                  << estimator_name(c.estimator) << ',' << M << ",all";
                        for (double x : acc) power_csv << ',' << fmt(x);
                        power_csv << '\n';
                        out.summary += label + " M=" + std::to_string(M) + " " + scheme_name(sch) +
                                       ": desired " + fmt(acc[0]) + ", same-pilot " + fmt(acc[1]) +
                                       ", other-pilot " + fmt(acc[2]) + ", noise " + fmt(acc[3]) + "\n";
                    }
                }
            } catch (const Error& e) {
                rethrow_at(where, e);
            }
        }
    }
    asym["points"] = points;
    if (c.power_decomposition) out.extra_files.emplace_back("power.csv", power_csv.str());
    for (const auto& r : out.rows)
        if (r.ue == "all")
            out.summary += r.preset + " " + r.direction + " " + r.scheme + " M=" + std::to_string(r.M) +
                           ": SE " + fmt(r.se_mean) + " +/- " + fmt(2 * r.se_stderr) + "\n";
}

void run_spectrum(const ExperimentConfig& c, RunOutput& out, json& asym) {
    const int M = c.m_grid.front();
    const int T = c.trials;
    std::vector<RVec> acc(3, RVec::Zero(M));
    std::vector<std::vector<RVec>> per(T, std::vector<RVec>(3));
    parallel_for(T, resolve_threads(c.threads), [&](int t) {
        RngStream rng(c.seed, stream_id({kTagSpectrum, std::uint64_t(t)}));
        const double theta = rng.uniform(-M_PI, M_PI);
        per[t][0] = eigen_spectrum(one_ring(OneRing{1.0, theta, c.scenario.delta_deg * M_PI / 180.0}, M));
        per[t][1] = eigen_spectrum(exp_corr(ExpCorr{1.0, c.scenario.r, theta}, M));
        per[t][2] = eigen_spectrum(lognormal_diag(LogNormalDiag{1.0, c.scenario.sigma_db}, M, rng));
    });
    for (int t = 0; t < T; ++t)
        for (int m = 0; m < 3; ++m) acc[m] += per[t][m] / T;
    const char* names[3] = {"one-ring", "exp-corr", "lognormal"};
    std::ostringstream csv;
    csv << "model,index,eigenvalue\n";
    json models = json::object();
    for (int m = 0; m < 3; ++m) {
        for (int i = 0; i < M; ++i) csv << names[m] << ',' << i << ',' << fmt(acc[m](i)) << '\n';
        const double tiny = 1e-6 * acc[m](0);
        int below = 0;
        for (int i = 0; i < M; ++i) below += acc[m](i) < tiny;
        models[names[m]] = {{"fraction_below_1e-6_max", double(below) / M}, {"largest", acc[m](0)},
                            {"smallest", acc[m](M - 1)}};
        out.summary += std::string(names[m]) + ": largest " + fmt(acc[m](0)) + ", smallest " +
                       fmt(acc[m](M - 1)) + ", fraction below 1e-6 max " + fmt(double(below) / M) + "\n";
    }
    asym["spectra"] = models;
    out.extra_files.emplace_back("spectrum.csv", csv.str());
}

void run_example1(const ExperimentConfig& c, RunOutput& out, json& asym) {
    json pts = json::array();
    for (int M : c.m_grid) {
        const int N = c.example1_n > 0 ? c.example1_n : M / 2;
        const auto r = example1_zf(M, N);
        ResultRow row;
        row.preset = c.preset.empty() ? "custom" : c.preset;
        row.scheme = "m-zf";
        row.estimator = "mmse";
        row.direction = "ul";
        row.M = M;
        row.ue = "0:0";
        row.se_mean = std::log2(1.0 + r.sinr);
        row.sinr_over_M = r.sinr / M;
        row.has_delta = true;
        row.delta_prediction = r.closed_form / M;
        row.seed = c.seed;
        out.rows.push_back(row);
        const double rel = std::abs(r.sinr / r.closed_form - 1.0);
        pts.push_back({{"M", M}, {"N", N}, {"sinr", r.sinr}, {"closed_form", r.closed_form}, {"rel_error", rel}});
        out.summary += "M=" + std::to_string(M) + " N=" + std::to_string(N) + ": simulated gamma_1 " +
                       fmt(r.sinr) + ", closed form " + fmt(r.closed_form) + ", relative error " + fmt(rel) +
                       (rel <= 1e-9 ? " (match)\n" : " (MISMATCH)\n");
    }
    asym["example1"] = pts;
}

void run_example3(const ExperimentConfig& c, RunOutput& out, json& asym) {
    json pts = json::array();
    std::vector<double> lx, ly;
    const double prelog = 1.0 - 1.0 / c.scenario.tau_c;
    for (int M : c.m_grid) {
        const auto r = pcp_deviation(M, c.pcp_b, c.trials, c.seed, resolve_threads(c.threads));
        ResultRow row;
        row.preset = c.preset.empty() ? "custom" : c.preset;
        row.scheme = "pcp";
        row.estimator = "mmse";
        row.direction = "ul";
        row.M = M;
        row.ue = "0:0";
        row.se_mean = prelog * r.log_rate1;
        row.sinr_over_M = r.sinr1 / M;
        row.seed = c.seed;
        out.rows.push_back(row);
        pts.push_back({{"M", M}, {"deviation", r.deviation}, {"deviation_stderr", r.deviation_stderr}});
        lx.push_back(std::log(double(M)));
        ly.push_back(std::log(r.deviation));
        out.summary += "M=" + std::to_string(M) + ": mean ||H^H V - I||_F " + fmt(r.deviation) + "\n";
    }
    json e3 = {{"points", pts}};
    if (lx.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
        mx /= lx.size();
        my /= ly.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
        e3["loglog_slope"] = sxy / sxx;
        out.summary += "log-log slope " + fmt(sxy / sxx) + "\n";
    }
    asym["example3"] = e3;
}

}  // namespace

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    os << "preset,scheme,estimator,direction,M,ue,se_mean,se_stderr,sinr_over_M,delta_prediction,seed\n";
    for (const auto& r : rows) {
        os << csv_field(r.preset) << ',' << csv_field(r.scheme) << ',' << csv_field(r.estimator) << ','
           << csv_field(r.direction) << ',' << r.M << ',' << csv_field(r.ue) << ',' << fmt(r.se_mean) << ','
           << fmt(r.se_stderr) << ',' << fmt(r.sinr_over_M) << ',' << (r.has_delta ? fmt(r.delta_prediction) : "")
           << ',' << r.seed << '\n';
    }
    return os.str();
}

RunOutput run_experiment(const ExperimentConfig& c) {
    RunOutput out;
    json asym = {{"preset", c.preset}, {"seed", c.seed}};
    json skipped = json::array();
    switch (c.kind) {
        case ExperimentKind::Network: run_network(c, out, asym, skipped); break;
        case ExperimentKind::Spectrum: run_spectrum(c, out, asym); break;
        case ExperimentKind::Example1: run_example1(c, out, asym); break;
        case ExperimentKind::Example3: run_example3(c, out, asym); break;
    }
    out.asymptotics_json = asym.dump(2) + "\n";

    json cfg = json::parse(config_to_json(c));
    cfg.erase("threads");  // outputs do not depend on it
    std::vector<std::string> files = {"results.csv", "asymptotics.json", "manifest.json"};
    for (const auto& f : out.extra_files) files.push_back(f.first);
    json man = {
        {"tool", "mimo_sim"},
        {"version", MIMO_SIM_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"gsl", GSL_VERSION},
        {"seed", c.seed},
        {"config", cfg},
        {"files", files},
        {"skipped", skipped},
    };
    out.manifest_json = man.dump(2) + "\n";
    return out;
}

void write_outputs(const RunOutput& out, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& text) {
        std::ofstream f(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
        f << text;
    };
    put("results.csv", rows_to_csv(out.rows));
    put("asymptotics.json", out.asymptotics_json);
    put("manifest.json", out.manifest_json);
    for (const auto& [name, text] : out.extra_files) put(name, text);
}

Example1Result example1_zf(int M, int N) {
    if (N < 1 || N >= M) throw std::invalid_argument("example1 needs 1 <= N < M");
    RVec d1 = RVec::Ones(M);
    d1.head(N).setConstant(2.0);
    const CovarianceMatrix R1(HermitianMatrix::diagonal(d1));
    const CovarianceMatrix R2(HermitianMatrix::identity(M));
    const EstimationContext ctx(two_user_scenario(R1, R2, 1.0, 1.0, 1.0, 200));
    ChannelDraw d;
    d.L = 2;
    d.K = 1;
    d.M = M;
    d.tau_p = 1;
    d.pilot_of = {0, 0};
    // Q^{-1} y / sqrt(rho_tr) = 1_M, so each estimate is R times the all-ones vector
    const CVec h1 = d1.cast<cplx>(), h2 = CVec::Ones(M);
    d.hhat = {h1, h2, h1, h2};
    d.h = d.hhat;
    const CombinerSet zf = m_zf(d, ZfOptions{});
    Example1Result r;
    r.sinr = ul_sinr_instant(d, ctx, zf)[0];
    r.closed_form = 1.0 / (7.0 / (4.0 * N) + 4.0 / (3.0 * (M - N)) + double(M) / (double(N) * (M - N)));
    return r;
}

PcpResult pcp_deviation(int M, const double b[2][2], int trials, std::uint64_t seed, int threads) {
    if (M < 2 || M % 2 != 0) throw std::invalid_argument("pcp_deviation needs even M >= 2");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    const int h = M / 2;
    RVec r1(M), r2(M);
    r1.head(h).setConstant(b[0][0]);
    r1.tail(h).setConstant(b[0][1]);
    r2.head(h).setConstant(b[1][0]);
    r2.tail(h).setConstant(b[1][1]);
    const EstimationContext ctx(two_user_scenario(CovarianceMatrix(HermitianMatrix::diagonal(r1)),
                                                  CovarianceMatrix(HermitianMatrix::diagonal(r2))));
    Eigen::Matrix2d B;
    B << b[0][0], b[0][1], b[1][0], b[1][1];
    const CMat& Z = ctx.Z(0).mat();
    std::vector<double> dev(trials), sinr(trials);
    parallel_for(trials, threads, [&](int t) {
        RngStream rng(seed, stream_id({kTagPcp, std::uint64_t(M), std::uint64_t(t)}));
        const ChannelDraw d = draw_and_estimate_mmse(ctx, rng);
        const CombinerSet c = pcp(d.y[0], B, h);
        CMat H(M, 2), V(M, 2);
        H.col(0) = d.H(0, 0, 0);
        H.col(1) = d.H(0, 1, 0);
        V.col(0) = c.v[0];
        V.col(1) = c.v[1];
        dev[t] = (H.adjoint() * V - CMat::Identity(2, 2)).norm();
        const CVec& v = c.v[0];
        const double num = std::norm(v.dot(d.Hhat(0, 0, 0)));
        const double den = std::norm(v.dot(d.Hhat(0, 1, 0))) + v.dot(Z * v).real();
        sinr[t] = num / den;
    });
    CompensatedSum s, s2, g, lr;
    for (int t = 0; t < trials; ++t) s.add(dev[t]), g.add(sinr[t]), lr.add(std::log2(1.0 + sinr[t]));
    PcpResult r;
    r.deviation = s.value() / trials;
    for (int t = 0; t < trials; ++t) s2.add((dev[t] - r.deviation) * (dev[t] - r.deviation));
    r.deviation_stderr = trials > 1 ? std::sqrt(s2.value() / (trials - 1) / trials) : 0.0;
    r.sinr1 = g.value() / trials;
    r.log_rate1 = lr.value() / trials;
    return r;
}

}  // namespace mimo
