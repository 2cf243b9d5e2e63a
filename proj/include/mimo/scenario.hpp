#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mimo/covariance.hpp"

namespace mimo {

enum class ModelKind { OneRing, ExpCorr, LogNormal, ExpLogNormal };

const char* model_kind_name(ModelKind k);
ModelKind parse_model_kind(const std::string& s);

struct SnrTargets {
    double intracell_db = -6.0;
    double intercell_lo_db = -11.5;
    double intercell_hi_db = -6.3;
};

// How intercell SNRs are assigned inside [lo, hi].
//   Evenly:  by cell order (l - j mod L), nearest cell at hi, farthest at lo.
//   Uniform: drawn per link from the scenario seed.
enum class IntercellSpacing { Evenly, Uniform };

struct ScenarioConfig {
    int L = 4;
    int K = 2;
    int M = 64;
    int tau_c = 200;
    int tau_p = 0;  // 0 means K
    double rho_tr = 1.0;
    double rho_ul = 1.0;
    double rho_dl = 1.0;

    ModelKind model = ModelKind::ExpCorr;
    double r = 0.5;
    double sigma_db = 0.0;
    double delta_deg = 15.0;  // one-ring half-spread

    SnrTargets snr;
    IntercellSpacing spacing = IntercellSpacing::Evenly;

    // Pilot-sharing UEs seen from BS j sit at base(j, pilot) + offset[order - 1] + jitter.
    double aoa_jitter_deg = 5.0;
    std::vector<double> aoa_offsets_deg;  // length L-1 or empty (all zero)

    std::uint64_t seed = 1;
};

struct UeId {
    int cell = 0;
    int ue = 0;
    bool operator==(const UeId& o) const { return cell == o.cell && ue == o.ue; }
};

class NetworkScenario {
public:
    int L = 0;
    int K = 0;
    int M = 0;
    int tau_p = 0;
    int tau_c = 0;
    double rho_tr = 1.0;
    double rho_ul = 1.0;
    double rho_dl = 1.0;
    std::vector<std::vector<int>> pilot_of;  // [cell][ue]

    // links[(j*L + l)*K + i]: covariance of the channel from UE i in cell l to BS j.
    std::vector<CovPtr> links;

    const CovarianceMatrix& R(int j, int l, int i) const { return *links[(j * L + l) * K + i]; }
    const CovPtr& R_ptr(int j, int l, int i) const { return links[(j * L + l) * K + i]; }
    int pilot(int l, int i) const { return pilot_of[l][i]; }
    double prelog() const { return 1.0 - static_cast<double>(tau_p) / tau_c; }

    // Throws ConfigError if dimensions or invariants are violated.
    void validate() const;
};

NetworkScenario build_scenario(const ScenarioConfig& cfg);

// Scenario from explicit covariances, indexed as NetworkScenario::links. Default pilots: UE i uses pilot i.
NetworkScenario make_scenario(int L, int K, std::vector<CovPtr> links, double rho_tr, double rho_ul,
                              double rho_dl, int tau_c, int tau_p = 0);

// Single BS serving two UEs that share a pilot, mapped onto L = 2, K = 1. Both BSs see the same
// pair (R1 from cell 0, R2 from cell 1), so BS 1 serving cell 1 is a statistical copy of the
// two-user BS serving UE 2. UE 1 is (cell 0, ue 0).
NetworkScenario two_user_scenario(const CovarianceMatrix& r1, const CovarianceMatrix& r2, double rho_tr = 1.0,
                                  double rho_ul = 1.0, double rho_dl = 1.0, int tau_c = 200);

// One list per pilot; each list holds the UEs using it.
std::vector<std::vector<UeId>> pilot_groups(const NetworkScenario& s);

}  // namespace mimo
