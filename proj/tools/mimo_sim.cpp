// Experiment runner: presets or a JSON config in, results.csv / asymptotics.json / manifest.json out.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mimo/cli.hpp"
#include "mimo/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw mimo::ConfigError("cannot read config file '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Massive MIMO spectral-efficiency simulator"};
    std::string preset, config_path, out_dir = "out";
    std::uint64_t seed = 0;
    int trials = 0, threads = 0;
    auto* o_seed = app.add_option("--seed", seed, "override the experiment seed");
    auto* o_trials = app.add_option("--trials", trials, "override the number of Monte Carlo trials")->check(CLI::PositiveNumber);
    app.add_option("--threads", threads, "worker threads, 0 = all cores (MIMO_SIM_THREADS overrides)")
        ->check(CLI::NonNegativeNumber);
    auto* o_preset = app.add_option("--preset", preset, "named preset, see list-presets");
    auto* o_config = app.add_option("--config", config_path, "JSON config file");
    o_preset->excludes(o_config);
    app.add_option("--out-dir", out_dir, "output directory");
    auto* list = app.add_subcommand("list-presets", "print the preset table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    if (list->parsed()) {
        std::cout << mimo::list_presets();
        return 0;
    }

    try {
        mimo::ExperimentConfig cfg;
        if (!config_path.empty()) {
            cfg = mimo::parse_config(slurp(config_path));
        } else if (!preset.empty()) {
            if (!mimo::has_preset(preset)) throw mimo::ConfigError("unknown preset '" + preset + "'");
            cfg = mimo::preset_config(preset);
        } else {
            throw mimo::ConfigError("one of --preset or --config is required");
        }
        if (o_seed->count()) cfg.seed = seed;
        if (o_trials->count()) cfg.trials = trials;
        cfg.threads = threads;
        if (const char* env = std::getenv("MIMO_SIM_THREADS")) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (end == env || *end != '\0' || v < 0) throw mimo::ConfigError("MIMO_SIM_THREADS must be an integer >= 0");
            cfg.threads = static_cast<int>(v);
        }
        const mimo::RunOutput out = mimo::run_experiment(cfg);
        mimo::write_outputs(out, out_dir);
        std::cout << out.summary;
        std::cout << "wrote " << out_dir << "/results.csv (" << out.rows.size() << " rows)\n";
        return 0;
    } catch (const mimo::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.kind() == mimo::ErrorKind::ConfigError ? kExitConfig : kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
