#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "mimo/asymptotics.hpp"
#include "mimo/cli.hpp"
#include "mimo/errors.hpp"

namespace py = pybind11;
using namespace mimo;

namespace {

py::dict row_dict(const ResultRow& r) {
    py::dict d;
    d["preset"] = r.preset;
    d["scheme"] = r.scheme;
    d["estimator"] = r.estimator;
    d["direction"] = r.direction;
    d["M"] = r.M;
    d["ue"] = r.ue;
    d["se_mean"] = r.se_mean;
    d["se_stderr"] = r.se_stderr;
    d["sinr_over_M"] = r.sinr_over_M;
    d["delta_prediction"] = r.has_delta ? py::object(py::float_(r.delta_prediction)) : py::object(py::none());
    d["seed"] = r.seed;
    return d;
}

ExperimentConfig resolve(const std::optional<std::string>& preset, const std::optional<std::string>& config) {
    if (preset.has_value() == config.has_value()) throw ConfigError("give exactly one of preset or config");
    if (preset) {
        if (!has_preset(*preset)) throw ConfigError("unknown preset '" + *preset + "'");
        return preset_config(*preset);
    }
    return parse_config(*config);
}

NetworkScenario pair(const CMat& r1, const CMat& r2, double rho_tr, double rho_ul, double rho_dl) {
    return two_user_scenario(CovarianceMatrix(HermitianMatrix(r1)), CovarianceMatrix(HermitianMatrix(r2)), rho_tr,
                             rho_ul, rho_dl);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Massive MIMO spectral-efficiency simulator core";

    static py::exception<Error> numerical(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::ConfigError)
                PyErr_SetString(PyExc_ValueError, e.what());
            else
                py::set_error(numerical, e.what());
        }
    });

    m.def("list_presets", &list_presets);
    m.def("preset_names", [] {
        std::vector<std::string> v;
        for (const auto& p : preset_table()) v.push_back(p.name);
        return v;
    });
    m.def("preset_config", [](const std::string& name) {
        if (!has_preset(name)) throw ConfigError("unknown preset '" + name + "'");
        return config_to_json(preset_config(name));
    }, "full JSON config of a preset");
    m.def("normalize_config", [](const std::string& text) { return config_to_json(parse_config(text)); },
          "validate a JSON config and echo it with every default filled in");

    m.def(
        "run",
        [](std::optional<std::string> preset, std::optional<std::string> config, std::optional<int> trials,
           std::optional<std::uint64_t> seed, int threads, std::optional<std::string> out_dir) {
            ExperimentConfig c = resolve(preset, config);
            if (trials) c.trials = *trials;
            if (seed) c.seed = *seed;
            c.threads = threads;
            RunOutput out;
            {
                py::gil_scoped_release nogil;
                out = run_experiment(c);
                if (out_dir) write_outputs(out, *out_dir);
            }
            py::list rows;
            for (const auto& r : out.rows) rows.append(row_dict(r));
            py::dict d;
            d["rows"] = rows;
            d["csv"] = rows_to_csv(out.rows);
            d["asymptotics"] = out.asymptotics_json;
            d["manifest"] = out.manifest_json;
            d["summary"] = out.summary;
            return d;
        },
        py::kw_only(), py::arg("preset") = py::none(), py::arg("config") = py::none(), py::arg("trials") = py::none(),
        py::arg("seed") = py::none(), py::arg("threads") = 0, py::arg("out_dir") = py::none());

    m.def("exp_corr", [](double beta, double r, double theta, int M) { return exp_corr(ExpCorr{beta, r, theta}, M).mat(); },
          py::arg("beta"), py::arg("r"), py::arg("theta"), py::arg("M"));
    m.def("one_ring", [](double beta, double theta, double delta, int M) { return one_ring(OneRing{beta, theta, delta}, M).mat(); },
          py::arg("beta"), py::arg("theta"), py::arg("delta"), py::arg("M"));

    m.def("example1_zf", [](int M, int N) {
        const auto r = example1_zf(M, N);
        return py::make_tuple(r.sinr, r.closed_form);
    }, py::arg("M"), py::arg("N"), "M-ZF SINR of the fixed two-user fixture and its closed form");

    m.def(
        "two_user_delta",
        [](const CMat& r1, const CMat& r2, double rho_tr, double rho_ul) {
            const auto ctx = estimation_statistics(pair(r1, r2, rho_tr, rho_ul, 1.0));
            const auto t = two_user_delta(ctx);
            py::dict d;
            d["beta11"] = t.beta11;
            d["beta22"] = t.beta22;
            d["beta12"] = t.beta12;
            d["delta1"] = t.delta1;
            d["delta2"] = t.delta2;
            return d;
        },
        py::arg("R1"), py::arg("R2"), py::arg("rho_tr") = 1.0, py::arg("rho_ul") = 1.0);

    m.def(
        "two_user_ul",
        [](const CMat& r1, const CMat& r2, const std::string& scheme, int trials, double rho_tr, double rho_ul,
           std::uint64_t seed) {
            const auto ctx = estimation_statistics(pair(r1, r2, rho_tr, rho_ul, 1.0));
            RunOptions o;
            o.seed = seed;
            o.threads = 0;
            SeReport rep;
            {
                py::gil_scoped_release nogil;
                rep = ul_se(ctx, parse_scheme(scheme), trials, Estimator::MMSE, o);
            }
            return py::make_tuple(rep.se[0], rep.sinr[0]);
        },
        py::arg("R1"), py::arg("R2"), py::arg("scheme") = "m-mmse", py::arg("trials") = 200, py::arg("rho_tr") = 1.0,
        py::arg("rho_ul") = 1.0, py::arg("seed") = 1, "SE and mean SINR of UE 1 for a pilot-sharing pair");

    m.def(
        "independence_margin",
        [](const std::vector<CMat>& rs, int i) {
            const auto r = independence_minimizer(rs, i, NormMode::Frobenius);
            return py::make_tuple(r.margin, r.lambda);
        },
        py::arg("matrices"), py::arg("i") = 0);

    m.def(
        "pcp_deviation",
        [](int M, const Eigen::Matrix2d& b, int trials, std::uint64_t seed) {
            const double bb[2][2] = {{b(0, 0), b(0, 1)}, {b(1, 0), b(1, 1)}};
            PcpResult r;
            {
                py::gil_scoped_release nogil;
                r = pcp_deviation(M, bb, trials, seed, 0);
            }
            return py::make_tuple(r.deviation, r.deviation_stderr);
        },
        py::arg("M"), py::arg("b"), py::arg("trials") = 100, py::arg("seed") = 1);
}
