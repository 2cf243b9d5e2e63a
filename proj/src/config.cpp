#include <algorithm>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mimo/cli.hpp"
#include "mimo/errors.hpp"

namespace mimo {

using nlohmann::json;

namespace {

const char* direction_sel_name(DirectionSel d) {
    switch (d) {
        case DirectionSel::UL: return "ul";
        case DirectionSel::DL: return "dl";
        case DirectionSel::Both: return "both";
    }
    return "?";
}

const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Network: return "network";
        case ExperimentKind::Spectrum: return "spectrum";
        case ExperimentKind::Example1: return "example1";
        case ExperimentKind::Example3: return "example3";
    }
    return "?";
}

// Walks one JSON object, checking types and remembering which keys were consumed.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "expected an object");
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    [[noreturn]] void fail(const std::string& k, const std::string& msg) const {
        const std::string where = k.empty() ? (path_.empty() ? "<root>" : path_) : key(k);
        throw ConfigError(where + ": " + msg);
    }

    const json& get(const std::string& k) {
        seen_.insert(k);
        return j_.at(k);
    }

    template <class F>
    void opt(const std::string& k, F&& f) {
        if (has(k)) f(get(k));
    }

    double number(const std::string& k, double v) {
        if (!has(k)) return v;
        const json& x = get(k);
        if (!x.is_number()) fail(k, "expected a number");
        return x.get<double>();
    }

    int integer(const std::string& k, int v) {
        if (!has(k)) return v;
        const json& x = get(k);
        if (!x.is_number_integer()) fail(k, "expected an integer");
        return x.get<int>();
    }

    bool boolean(const std::string& k, bool v) {
        if (!has(k)) return v;
        const json& x = get(k);
        if (!x.is_boolean()) fail(k, "expected true or false");
        return x.get<bool>();
    }

    std::string string(const std::string& k, const std::string& v) {
        if (!has(k)) return v;
        const json& x = get(k);
        if (!x.is_string()) fail(k, "expected a string");
        return x.get<std::string>();
    }

    std::vector<double> numbers(const std::string& k, std::vector<double> v) {
        if (!has(k)) return v;
        const json& x = get(k);
        if (x.is_number()) return {x.get<double>()};
        if (!x.is_array()) fail(k, "expected a number or an array of numbers");
        v.clear();
        for (const auto& e : x) {
            if (!e.is_number()) fail(k, "expected an array of numbers");
            v.push_back(e.get<double>());
        }
        return v;
    }

    std::vector<int> integers(const std::string& k, std::vector<int> v) {
        if (!has(k)) return v;
        const json& x = get(k);
        if (x.is_number_integer()) return {x.get<int>()};
        if (!x.is_array()) fail(k, "expected an integer or an array of integers");
        v.clear();
        for (const auto& e : x) {
            if (!e.is_number_integer()) fail(k, "expected an array of integers");
            v.push_back(e.get<int>());
        }
        return v;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(it.key(), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class E, class P>
E parse_enum(Node& n, const std::string& k, E v, P parse) {
    if (!n.has(k)) return v;
    const std::string s = n.string(k, "");
    try {
        return parse(s);
    } catch (const ConfigError& e) {
        n.fail(k, std::string(e.what()).substr(std::string("ConfigError: ").size()));
    }
}

DirectionSel parse_direction(const std::string& s) {
    if (s == "ul") return DirectionSel::UL;
    if (s == "dl") return DirectionSel::DL;
    if (s == "both") return DirectionSel::Both;
    throw ConfigError("unknown direction '" + s + "' (ul, dl, both)");
}

Bound parse_bound(const std::string& s) {
    if (s == "capacity-lb") return Bound::CapacityLB;
    if (s == "uatf") return Bound::UatF;
    throw ConfigError("unknown bound '" + s + "' (capacity-lb, uatf)");
}

ExperimentKind parse_kind(const std::string& s) {
    if (s == "network") return ExperimentKind::Network;
    if (s == "spectrum") return ExperimentKind::Spectrum;
    if (s == "example1") return ExperimentKind::Example1;
    if (s == "example3") return ExperimentKind::Example3;
    throw ConfigError("unknown kind '" + s + "'");
}

IntercellSpacing parse_spacing(const std::string& s) {
    if (s == "evenly") return IntercellSpacing::Evenly;
    if (s == "uniform") return IntercellSpacing::Uniform;
    throw ConfigError("unknown spacing '" + s + "' (evenly, uniform)");
}

ZfBasis parse_basis(const std::string& s) {
    if (s == "same-pilot") return ZfBasis::SamePilot;
    if (s == "all-ues") return ZfBasis::AllUes;
    throw ConfigError("unknown zf basis '" + s + "' (same-pilot, all-ues)");
}

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void parse_scenario(Node& n, ExperimentConfig& c) {
    ScenarioConfig& s = c.scenario;
    s.L = n.integer("L", s.L);
    s.K = n.integer("K", s.K);
    c.m_grid = n.integers("M", c.m_grid);
    s.tau_c = n.integer("tau_c", s.tau_c);
    s.tau_p = n.integer("tau_p", s.tau_p);
    s.rho_tr = n.number("rho_tr", s.rho_tr);
    s.rho_ul = n.number("rho_ul", s.rho_ul);
    s.rho_dl = n.number("rho_dl", s.rho_dl);
    s.model = parse_enum(n, "model", s.model, parse_model_kind);
    s.r = n.number("r", s.r);
    s.sigma_db = n.number("sigma_db", s.sigma_db);
    c.sigma_grid = n.numbers("sigma_grid", c.sigma_grid);
    s.delta_deg = n.number("delta_deg", s.delta_deg);
    s.spacing = parse_enum(n, "spacing", s.spacing, parse_spacing);
    s.aoa_jitter_deg = n.number("aoa_jitter_deg", s.aoa_jitter_deg);
    s.aoa_offsets_deg = n.numbers("aoa_offsets_deg", s.aoa_offsets_deg);
    n.opt("snr", [&](const json& j) {
        Node t(j, n.key("snr"));
        s.snr.intracell_db = t.number("intracell_db", s.snr.intracell_db);
        const auto r = t.numbers("intercell_db", {s.snr.intercell_lo_db, s.snr.intercell_hi_db});
        if (r.size() != 2) t.fail("intercell_db", "expected [lo, hi]");
        s.snr.intercell_lo_db = r[0];
        s.snr.intercell_hi_db = r[1];
        if (r[0] > r[1]) t.fail("intercell_db", "lo > hi");
        t.finish();
    });
    n.finish();

    auto positive = [&](const char* k, double v) {
        if (!(v > 0.0)) n.fail(k, "must be > 0");
    };
    if (s.L < 1) n.fail("L", "must be >= 1");
    if (s.K < 1) n.fail("K", "must be >= 1");
    positive("rho_tr", s.rho_tr);
    positive("rho_ul", s.rho_ul);
    positive("rho_dl", s.rho_dl);
    if (s.tau_p < 0) n.fail("tau_p", "must be >= 0 (0 means K)");
    const int tp = s.tau_p > 0 ? s.tau_p : s.K;
    if (s.tau_c < tp) n.fail("tau_c", "must be >= tau_p");
    if (!(s.r >= 0.0 && s.r <= 1.0)) n.fail("r", "must lie in [0, 1]");
    if (!(s.sigma_db >= 0.0)) n.fail("sigma_db", "must be >= 0");
    for (double x : c.sigma_grid)
        if (!(x >= 0.0)) n.fail("sigma_grid", "entries must be >= 0");
    if (!(s.delta_deg > 0.0)) n.fail("delta_deg", "must be > 0");
    if (!(s.aoa_jitter_deg >= 0.0)) n.fail("aoa_jitter_deg", "must be >= 0");
    if (!s.aoa_offsets_deg.empty() && static_cast<int>(s.aoa_offsets_deg.size()) != s.L - 1)
        n.fail("aoa_offsets_deg", "must have L-1 entries");
    for (std::size_t i = 0; i < c.m_grid.size(); ++i) {
        if (c.m_grid[i] < 1) n.fail("M", "entries must be >= 1");
        if (i > 0 && c.m_grid[i] <= c.m_grid[i - 1]) n.fail("M", "grid must be strictly increasing");
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON at " + line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
    }
    Node n(root, "");
    ExperimentConfig c;
    const std::string preset = n.string("preset", "");
    if (!preset.empty()) {
        if (!has_preset(preset)) n.fail("preset", "unknown preset '" + preset + "'");
        c = preset_config(preset);
    }
    // label only; a manifest echo carries every field explicitly
    c.preset = n.string("preset_name", c.preset);
    c.kind = parse_enum(n, "kind", c.kind, parse_kind);
    if (n.has("seed")) {
        const json& s = n.get("seed");
        if (!s.is_number_unsigned() && !s.is_number_integer()) n.fail("seed", "expected a non-negative integer");
        if (s.is_number_integer() && s.get<std::int64_t>() < 0) n.fail("seed", "expected a non-negative integer");
        c.seed = s.get<std::uint64_t>();
    }
    c.trials = n.integer("trials", c.trials);
    c.theta_trials = n.integer("theta_trials", c.theta_trials);
    c.threads = n.integer("threads", c.threads);
    if (n.has("schemes")) {
        const json& a = n.get("schemes");
        if (!a.is_array()) n.fail("schemes", "expected an array of scheme names");
        c.schemes.clear();
        for (const auto& e : a) {
            if (!e.is_string()) n.fail("schemes", "expected an array of scheme names");
            try {
                c.schemes.push_back(parse_scheme(e.get<std::string>()));
            } catch (const ConfigError&) {
                n.fail("schemes", "unknown scheme '" + e.get<std::string>() + "'");
            }
        }
    }
    c.estimator = parse_enum(n, "estimator", c.estimator, parse_estimator);
    c.direction = parse_enum(n, "direction", c.direction, parse_direction);
    c.bound = parse_enum(n, "bound", c.bound, parse_bound);
    c.time_splitting = n.boolean("time_splitting", c.time_splitting);
    c.power_decomposition = n.boolean("power_decomposition", c.power_decomposition);
    c.per_ue = n.boolean("per_ue", c.per_ue);
    c.skip_rank_deficient = n.boolean("skip_rank_deficient", c.skip_rank_deficient);
    n.opt("zf", [&](const json& j) {
        Node z(j, "zf");
        c.zf.basis = parse_enum(z, "basis", c.zf.basis, parse_basis);
        c.zf.rank_reduce = z.boolean("rank_reduce", c.zf.rank_reduce);
        z.finish();
    });
    n.opt("scenario", [&](const json& j) {
        Node s(j, "scenario");
        parse_scenario(s, c);
    });
    n.opt("example1", [&](const json& j) {
        Node e(j, "example1");
        c.example1_n = e.integer("N", c.example1_n);
        e.finish();
    });
    n.opt("example3", [&](const json& j) {
        Node e(j, "example3");
        const auto b = e.numbers("b", {c.pcp_b[0][0], c.pcp_b[0][1], c.pcp_b[1][0], c.pcp_b[1][1]});
        if (b.size() != 4) e.fail("b", "expected [b11, b12, b21, b22]");
        for (double x : b)
            if (!(x > 0.0)) e.fail("b", "entries must be > 0");
        c.pcp_b[0][0] = b[0];
        c.pcp_b[0][1] = b[1];
        c.pcp_b[1][0] = b[2];
        c.pcp_b[1][1] = b[3];
        e.finish();
    });
    n.finish();

    if (c.trials < 1) n.fail("trials", "must be >= 1");
    if (c.theta_trials < 1) n.fail("theta_trials", "must be >= 1");
    if (c.threads < 0) n.fail("threads", "must be >= 0 (0 = auto)");
    if (c.m_grid.empty()) n.fail("scenario", "missing required field 'M'");
    if (c.kind == ExperimentKind::Network && c.schemes.empty()) n.fail("schemes", "missing required field");
    if (c.kind == ExperimentKind::Network &&
        std::find(c.schemes.begin(), c.schemes.end(), Scheme::PCP) != c.schemes.end())
        n.fail("schemes", "pcp only runs in the example3 experiment");
    if (c.kind == ExperimentKind::Example1) {
        for (int m : c.m_grid) {
            const int N = c.example1_n > 0 ? c.example1_n : m / 2;
            if (N < 1 || N >= m) n.fail("example1", "need 1 <= N < M");
        }
    }
    if (c.kind == ExperimentKind::Example3)
        for (int m : c.m_grid)
            if (m % 2 != 0) n.fail("scenario", "example3 needs even M");
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    const auto& s = c.scenario;
    json sc = {
        {"L", s.L},
        {"K", s.K},
        {"M", c.m_grid},
        {"tau_c", s.tau_c},
        {"tau_p", s.tau_p},
        {"rho_tr", s.rho_tr},
        {"rho_ul", s.rho_ul},
        {"rho_dl", s.rho_dl},
        {"model", model_kind_name(s.model)},
        {"r", s.r},
        {"sigma_db", s.sigma_db},
        {"sigma_grid", c.sigma_grid},
        {"delta_deg", s.delta_deg},
        {"spacing", s.spacing == IntercellSpacing::Evenly ? "evenly" : "uniform"},
        {"aoa_jitter_deg", s.aoa_jitter_deg},
        {"aoa_offsets_deg", s.aoa_offsets_deg},
        {"snr", {{"intracell_db", s.snr.intracell_db},
                 {"intercell_db", {s.snr.intercell_lo_db, s.snr.intercell_hi_db}}}},
    };
    std::vector<std::string> schemes;
    for (auto x : c.schemes) schemes.push_back(scheme_name(x));
    json j = {
        {"kind", kind_name(c.kind)},
        {"seed", c.seed},
        {"trials", c.trials},
        {"theta_trials", c.theta_trials},
        {"threads", c.threads},
        {"schemes", schemes},
        {"estimator", estimator_name(c.estimator)},
        {"direction", direction_sel_name(c.direction)},
        {"bound", bound_name(c.bound)},
        {"time_splitting", c.time_splitting},
        {"power_decomposition", c.power_decomposition},
        {"per_ue", c.per_ue},
        {"skip_rank_deficient", c.skip_rank_deficient},
        {"zf", {{"basis", c.zf.basis == ZfBasis::SamePilot ? "same-pilot" : "all-ues"},
                {"rank_reduce", c.zf.rank_reduce}}},
        {"scenario", sc},
        {"example1", {{"N", c.example1_n}}},
        {"example3", {{"b", {c.pcp_b[0][0], c.pcp_b[0][1], c.pcp_b[1][0], c.pcp_b[1][1]}}}},
    };
    // the preset name is informational in the echo; every field above is explicit
    if (!c.preset.empty()) j["preset_name"] = c.preset;
    return j.dump(2);
}

}  // namespace mimo
