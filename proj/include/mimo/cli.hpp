#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mimo/asymptotics.hpp"
#include "mimo/se.hpp"

namespace mimo {

enum class DirectionSel { UL, DL, Both };

// Network runs go through build_scenario; the others are fixed small experiments.
enum class ExperimentKind { Network, Spectrum, Example1, Example3 };

struct ExperimentConfig {
    std::string preset;  // empty for custom configs
    ExperimentKind kind = ExperimentKind::Network;
    ScenarioConfig scenario;
    std::vector<int> m_grid;
    std::vector<double> sigma_grid;  // optional sweep over scenario.sigma_db
    std::vector<Scheme> schemes;
    Estimator estimator = Estimator::MMSE;
    DirectionSel direction = DirectionSel::UL;
    Bound bound = Bound::CapacityLB;
    int trials = 500;
    int theta_trials = 500;
    bool time_splitting = false;
    bool power_decomposition = false;
    bool per_ue = false;             // one CSV row per UE in addition to the network mean
    bool skip_rank_deficient = false;  // M-ZF points with parallel estimates are skipped, not fatal
    ZfOptions zf;
    int threads = 0;
    std::uint64_t seed = 1;

    // fixed experiments
    int example1_n = 0;                              // 0 means M/2
    double pcp_b[2][2] = {{1.0, 0.3}, {0.4, 0.8}};   // rows: UE, columns: sub-array
};

// Parses the JSON key tree documented in the README. Unknown keys, bad ranges and missing
// required fields throw ConfigError naming the key.
ExperimentConfig parse_config(const std::string& text);
// Echo of every field; parse_config(config_to_json(c)) reproduces c.
std::string config_to_json(const ExperimentConfig& c);

struct PresetInfo {
    std::string name;
    std::string figure;
    std::string description;
};

const std::vector<PresetInfo>& preset_table();
bool has_preset(const std::string& name);
ExperimentConfig preset_config(const std::string& name);
std::string list_presets();

struct ResultRow {
    std::string preset;
    std::string scheme;
    std::string estimator;
    std::string direction;
    int M = 0;
    std::string ue;  // "j:k" or "all"
    double se_mean = 0.0;
    double se_stderr = 0.0;
    double sinr_over_M = 0.0;
    bool has_delta = false;
    double delta_prediction = 0.0;
    std::uint64_t seed = 0;
};

struct RunOutput {
    std::vector<ResultRow> rows;
    std::string asymptotics_json;
    std::string manifest_json;
    // optional extra tables (file name, CSV text)
    std::vector<std::pair<std::string, std::string>> extra_files;
    std::string summary;  // human-readable lines for stdout
};

std::string rows_to_csv(const std::vector<ResultRow>& rows);

// Executes the experiment. Module errors are rethrown with the (preset, sigma, M, scheme) coordinates
// prepended to the message, keeping their ErrorKind.
RunOutput run_experiment(const ExperimentConfig& c);
void write_outputs(const RunOutput& out, const std::string& dir);

// Fixed-fixture M-ZF SINR of UE 1: ĥ1 = [2·1_N; 1_{M-N}], ĥ2 = 1_M, ρ = 1.
struct Example1Result {
    double sinr = 0.0;
    double closed_form = 0.0;
};
Example1Result example1_zf(int M, int N);

// Two sub-arrays of M/2 antennas with block-scaled identity covariances b[ue][array]; mean over
// `trials` draws of ||H^H V - I||_F with the pilot-contamination precoding vectors, and the mean
// instantaneous SINR of UE 1 with those vectors.
struct PcpResult {
    double deviation = 0.0;
    double deviation_stderr = 0.0;
    double sinr1 = 0.0;
    double log_rate1 = 0.0;  // mean log2(1 + γ) of UE 1, no prelog
};
PcpResult pcp_deviation(int M, const double b[2][2], int trials, std::uint64_t seed, int threads = 1);

}  // namespace mimo
