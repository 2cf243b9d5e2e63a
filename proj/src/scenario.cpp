#include "mimo/scenario.hpp"

#include <cmath>
#include <string>

#include "mimo/errors.hpp"

namespace mimo {

namespace {

constexpr std::uint64_t kTagAoa = 0xa0a;
constexpr std::uint64_t kTagJitter = 0x717;
constexpr std::uint64_t kTagSnr = 0x5a7;
constexpr std::uint64_t kTagCov = 0xc0f;

double deg2rad(double d) { return d * M_PI / 180.0; }

double link_snr_db(const ScenarioConfig& c, int order, int j, int l, int i) {
    if (order == 0) return c.snr.intracell_db;
    const double lo = c.snr.intercell_lo_db, hi = c.snr.intercell_hi_db;
    if (c.spacing == IntercellSpacing::Uniform) {
        RngStream rng(c.seed, stream_id({kTagSnr, std::uint64_t(j), std::uint64_t(l), std::uint64_t(i)}));
        return rng.uniform(lo, hi);
    }
    if (c.L <= 2) return hi;
    return hi - (order - 1) * (hi - lo) / (c.L - 2);
}

}  // namespace

const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::OneRing: return "one-ring";
        case ModelKind::ExpCorr: return "exp-corr";
        case ModelKind::LogNormal: return "lognormal";
        case ModelKind::ExpLogNormal: return "exp-lognormal";
    }
    return "?";
}

ModelKind parse_model_kind(const std::string& s) {
    if (s == "one-ring") return ModelKind::OneRing;
    if (s == "exp-corr") return ModelKind::ExpCorr;
    if (s == "lognormal") return ModelKind::LogNormal;
    if (s == "exp-lognormal") return ModelKind::ExpLogNormal;
    throw ConfigError("unknown covariance model '" + s + "'");
}

void NetworkScenario::validate() const {
    if (L < 1 || K < 1 || M < 1) throw ConfigError("L, K, M must be >= 1");
    if (tau_p < 1 || tau_p > tau_c) throw ConfigError("need 1 <= tau_p <= tau_c");
    if (!(rho_tr > 0.0) || !(rho_ul > 0.0) || !(rho_dl > 0.0)) throw ConfigError("powers must be > 0");
    if (static_cast<int>(links.size()) != L * L * K)
        throw ConfigError("expected " + std::to_string(L * L * K) + " link covariances");
    if (static_cast<int>(pilot_of.size()) != L) throw ConfigError("pilot_of must have L rows");
    for (const auto& row : pilot_of) {
        if (static_cast<int>(row.size()) != K) throw ConfigError("pilot_of rows must have K entries");
        for (int p : row)
            if (p < 0 || p >= tau_p) throw ConfigError("pilot index out of range [0, tau_p)");
    }
    for (const auto& r : links) {
        if (!r || r->dim() != M) throw ConfigError("link covariance has wrong dimension");
        if (!(r->trace() > 0.0)) throw ConfigError("link covariance has zero trace");
    }
}

NetworkScenario make_scenario(int L, int K, std::vector<CovPtr> links, double rho_tr, double rho_ul,
                              double rho_dl, int tau_c, int tau_p) {
    NetworkScenario s;
    s.L = L;
    s.K = K;
    s.M = links.empty() || !links.front() ? 0 : links.front()->dim();
    s.tau_p = tau_p > 0 ? tau_p : K;
    s.tau_c = tau_c;
    s.rho_tr = rho_tr;
    s.rho_ul = rho_ul;
    s.rho_dl = rho_dl;
    s.links = std::move(links);
    s.pilot_of.assign(L, std::vector<int>(K));
    for (int l = 0; l < L; ++l)
        for (int i = 0; i < K; ++i) s.pilot_of[l][i] = i;
    s.validate();
    return s;
}

NetworkScenario two_user_scenario(const CovarianceMatrix& r1, const CovarianceMatrix& r2, double rho_tr,
                                  double rho_ul, double rho_dl, int tau_c) {
    auto p1 = std::make_shared<const CovarianceMatrix>(r1);
    auto p2 = std::make_shared<const CovarianceMatrix>(r2);
    return make_scenario(2, 1, {p1, p2, p1, p2}, rho_tr, rho_ul, rho_dl, tau_c, 1);
}

NetworkScenario build_scenario(const ScenarioConfig& c) {
    if (c.L < 1 || c.K < 1 || c.M < 1) throw ConfigError("L, K, M must be >= 1");
    if (c.snr.intercell_lo_db > c.snr.intercell_hi_db) throw ConfigError("snr intercell range has lo > hi");
    if (!c.aoa_offsets_deg.empty() && static_cast<int>(c.aoa_offsets_deg.size()) != c.L - 1)
        throw ConfigError("aoa_offsets_deg must have L-1 entries");
    if (c.aoa_jitter_deg < 0.0) throw ConfigError("aoa_jitter_deg must be >= 0");
    if (!(c.rho_ul > 0.0)) throw ConfigError("rho_ul must be > 0");

    const int L = c.L, K = c.K, M = c.M;
    std::vector<CovPtr> links(L * L * K);
    for (int j = 0; j < L; ++j) {
        std::vector<double> base(K);
        for (int k = 0; k < K; ++k) {
            RngStream rng(c.seed, stream_id({kTagAoa, std::uint64_t(j), std::uint64_t(k)}));
            base[k] = rng.uniform(-M_PI, M_PI);
        }
        for (int l = 0; l < L; ++l) {
            const int order = ((l - j) % L + L) % L;
            for (int i = 0; i < K; ++i) {
                double theta = base[i];
                if (order > 0) {
                    if (!c.aoa_offsets_deg.empty()) theta += deg2rad(c.aoa_offsets_deg[order - 1]);
                    if (c.aoa_jitter_deg > 0.0) {
                        RngStream jr(c.seed, stream_id({kTagJitter, std::uint64_t(j), std::uint64_t(l),
                                                        std::uint64_t(i)}));
                        theta += deg2rad(jr.uniform(-c.aoa_jitter_deg, c.aoa_jitter_deg));
                    }
                }
                const double target_db = link_snr_db(c, order, j, l, i);
                const double target = std::pow(10.0, target_db / 10.0);
                const double beta = target / c.rho_ul;
                CovarianceModel model;
                switch (c.model) {
                    case ModelKind::OneRing: model = OneRing{beta, theta, deg2rad(c.delta_deg)}; break;
                    case ModelKind::ExpCorr: model = ExpCorr{beta, c.r, theta}; break;
                    case ModelKind::LogNormal: model = LogNormalDiag{beta, c.sigma_db}; break;
                    case ModelKind::ExpLogNormal: model = ExpLogNormal{beta, c.r, theta, c.sigma_db}; break;
                }
                RngStream cr(c.seed, stream_id({kTagCov, std::uint64_t(j), std::uint64_t(l), std::uint64_t(i)}));
                CovarianceMatrix R = make_covariance(model, M, cr);
                const double got = c.rho_ul * R.trace() / M;
                if (std::abs(got / target - 1.0) > 1e-13) R = R.scaled(target / got);
                links[(j * L + l) * K + i] = std::make_shared<const CovarianceMatrix>(std::move(R));
            }
        }
    }
    return make_scenario(L, K, std::move(links), c.rho_tr, c.rho_ul, c.rho_dl, c.tau_c,
                         c.tau_p > 0 ? c.tau_p : K);
}

std::vector<std::vector<UeId>> pilot_groups(const NetworkScenario& s) {
    std::vector<std::vector<UeId>> g(s.tau_p);
    for (int l = 0; l < s.L; ++l)
        for (int i = 0; i < s.K; ++i) g[s.pilot(l, i)].push_back({l, i});
    return g;
}

}  // namespace mimo
