#include <sstream>

#include "mimo/cli.hpp"
#include "mimo/errors.hpp"

namespace mimo {

namespace {

// Shared by the uplink figures: four corner cells, two cell-edge UEs each, pilots reused across cells.
ExperimentConfig base_network() {
    ExperimentConfig c;
    c.kind = ExperimentKind::Network;
    c.scenario.L = 4;
    c.scenario.K = 2;
    c.scenario.tau_c = 200;
    c.scenario.tau_p = 0;
    c.scenario.model = ModelKind::ExpCorr;
    c.scenario.r = 0.5;
    c.scenario.snr = SnrTargets{-6.0, -11.5, -6.3};
    c.scenario.spacing = IntercellSpacing::Evenly;
    // similar but non-identical AoAs: fixed per-cell offsets, no random jitter
    c.scenario.aoa_offsets_deg = {63.0, -135.0, 155.0};
    c.scenario.aoa_jitter_deg = 0.0;
    c.scenario.seed = 1;
    c.schemes = {Scheme::MR, Scheme::S_MMSE, Scheme::M_MMSE, Scheme::M_ZF};
    c.zf.basis = ZfBasis::AllUes;
    c.trials = 500;
    c.theta_trials = 500;
    c.seed = 1;
    return c;
}

ExperimentConfig downlink(bool ew, int K) {
    ExperimentConfig c = base_network();
    c.scenario.model = ModelKind::ExpLogNormal;
    c.scenario.sigma_db = 4.0;
    c.scenario.K = K;
    c.direction = DirectionSel::DL;
    c.bound = Bound::UatF;
    c.estimator = ew ? Estimator::EW_MMSE : Estimator::MMSE;
    if (ew) c.schemes = {Scheme::MR, Scheme::S_MMSE, Scheme::APPROX_M_MMSE, Scheme::M_ZF};
    // pilot-sharing UEs clustered around a shared AoA: the spread offsets above make the
    // diagonal-only estimator lose far more than it does for near-collinear arrivals
    c.scenario.aoa_offsets_deg.clear();
    c.scenario.aoa_jitter_deg = 5.0;
    if (K > 2) {
        // cell-edge UEs spread over the shaded area: random AoA jitter and intercell SNRs
        c.scenario.spacing = IntercellSpacing::Uniform;
        c.scenario.aoa_jitter_deg = 20.0;
        c.m_grid = {64, 128, 256};
        c.trials = 200;
        c.theta_trials = 200;
    } else {
        c.m_grid = {32, 64, 128, 256};
    }
    return c;
}

}  // namespace

const std::vector<PresetInfo>& preset_table() {
    static const std::vector<PresetInfo> t = {
        {"fig3", "Fig. 3", "eigenvalue spectra of one-ring, exponential correlation and log-normal models, M=100"},
        {"fig4", "Fig. 4", "exponential correlation r=0.5, uplink SE vs M, L=4 K=2, plus time splitting"},
        {"fig5a", "Fig. 5a", "uncorrelated log-normal array fading, uplink SE vs sigma, M=200"},
        {"fig5b", "Fig. 5b", "received power after combining, sigma=4, M=200"},
        {"fig6a", "Fig. 6a", "downlink SE vs M, exp-corr with sigma=4, MMSE estimator, K=2"},
        {"fig6b", "Fig. 6b", "downlink SE vs M, exp-corr with sigma=4, EW-MMSE estimator, K=2"},
        {"fig7a", "Fig. 7a", "downlink SE vs M, MMSE estimator, K=10 UEs spread over the cell edge"},
        {"fig7b", "Fig. 7b", "downlink SE vs M, EW-MMSE estimator, K=10 UEs spread over the cell edge"},
        {"example1", "Example 1", "M-ZF SINR of the fixed two-user fixture vs its closed form"},
        {"example3", "Example 3", "pilot-contamination precoding on two sub-arrays, ||H^H V - I|| vs M"},
    };
    return t;
}

bool has_preset(const std::string& name) {
    for (const auto& p : preset_table())
        if (p.name == name) return true;
    return false;
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    if (name == "fig3") {
        c.kind = ExperimentKind::Spectrum;
        c.m_grid = {100};
        c.scenario.r = 0.5;
        c.scenario.sigma_db = 2.0;
        c.scenario.delta_deg = 15.0;
        c.trials = 100;
    } else if (name == "fig4") {
        c = base_network();
        c.m_grid = {32, 64, 128, 256};
        c.time_splitting = true;
    } else if (name == "fig5a" || name == "fig5b") {
        c = base_network();
        c.scenario.model = ModelKind::LogNormal;
        c.m_grid = {200};
        if (name == "fig5a") {
            c.sigma_grid = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
            // σ = 0 makes all same-pilot estimates parallel, where M-ZF does not exist
            c.skip_rank_deficient = true;
        } else {
            c.scenario.sigma_db = 4.0;
            c.power_decomposition = true;
        }
    } else if (name == "fig6a" || name == "fig6b") {
        c = downlink(name == "fig6b", 2);
    } else if (name == "fig7a" || name == "fig7b") {
        c = downlink(name == "fig7b", 10);
    } else if (name == "example1") {
        c.kind = ExperimentKind::Example1;
        c.m_grid = {100};
        c.example1_n = 50;
        c.schemes = {Scheme::M_ZF};
        c.trials = 1;
    } else if (name == "example3") {
        c.kind = ExperimentKind::Example3;
        c.m_grid = {64, 256, 1024};
        c.schemes = {Scheme::PCP};
        c.trials = 100;
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    c.preset = name;
    return c;
}

std::string list_presets() {
    std::ostringstream os;
    for (const auto& p : preset_table()) {
        os << p.name;
        for (std::size_t i = p.name.size(); i < 10; ++i) os << ' ';
        os << p.figure << ' ' << p.description << '\n';
    }
    return os.str();
}

}  // namespace mimo
