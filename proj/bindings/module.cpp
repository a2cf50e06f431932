#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lmsexact/classical.hpp"
#include "lmsexact/closure.hpp"
#include "lmsexact/io.hpp"
#include "lmsexact/montecarlo.hpp"
#include "lmsexact/numerics.hpp"

namespace py = pybind11;
using namespace lmsexact;

namespace {

std::vector<std::vector<double>> dense_transition(const StateSpaceModel& m,
                                                  double beta) {
    CSRMatrix a = evaluate_transition(m, beta);
    std::vector<std::vector<double>> d(a.n, std::vector<double>(a.n, 0.0));
    for (int i = 0; i < a.n; ++i)
        for (int k = a.ptr[i]; k < a.ptr[i + 1]; ++k) d[i][a.col[k]] += a.val[k];
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Exact and classical state-space moment models of the "
              "deficient-length LMS adaptive filter";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<MomentOrderError>(m, "MomentOrderError",
                                             PyExc_ValueError);
    py::register_exception<CapExceededError>(m, "CapExceededError");
    py::register_exception<UnstableError>(m, "UnstableError");
    py::register_exception<NumericsError>(m, "NumericsError");

    py::class_<MomentSpec>(m, "MomentSpec")
        .def_static("gaussian_unit", &MomentSpec::gaussian_unit,
                    py::arg("max_order"))
        .def_static("laplacian_unit", &MomentSpec::laplacian_unit,
                    py::arg("max_order"))
        .def_static("custom", &MomentSpec::custom, py::arg("even_moments"),
                    py::arg("tag") = "custom")
        .def("gamma", &MomentSpec::gamma, py::arg("n"))
        .def("has", &MomentSpec::has, py::arg("n"))
        .def_property_readonly("max_order", &MomentSpec::max_order)
        .def_property_readonly("tag",
                               [](const MomentSpec& s) { return s.tag(); })
        .def("__repr__", [](const MomentSpec& s) {
            return "MomentSpec(" + s.tag() + ", max_order=" +
                   std::to_string(s.max_order()) + ")";
        });
    m.def("moments_for", &moments_for, py::arg("tag"), py::arg("max_order"));
    m.def("required_moment_order", &required_moment_order,
          py::arg("n_adaptive"), py::arg("ma_order"), py::arg("p_excess"),
          py::arg("order"));

    py::class_<SystemConfig>(m, "SystemConfig")
        .def(py::init<>())
        .def_readwrite("n_adaptive", &SystemConfig::n_adaptive)
        .def_readwrite("p_excess", &SystemConfig::p_excess)
        .def_readwrite("ma_order", &SystemConfig::ma_order)
        .def_readwrite("b_coeffs", &SystemConfig::b_coeffs)
        .def_readwrite("w_star", &SystemConfig::w_star)
        .def_readwrite("beta", &SystemConfig::beta)
        .def_readwrite("noise_variance", &SystemConfig::noise_variance)
        .def_readwrite("moments", &SystemConfig::moments)
        .def_property_readonly("full_length", &SystemConfig::full_length)
        .def("w_bar_star", &SystemConfig::w_bar_star)
        .def("validate", &SystemConfig::validate)
        .def("__repr__", [](const SystemConfig& c) {
            return "SystemConfig(N=" + std::to_string(c.n_adaptive) +
                   ", M=" + std::to_string(c.ma_order) +
                   ", P=" + std::to_string(c.p_excess) + ", " +
                   c.moments.tag() + ")";
        });
    m.def("preset_scenario", &preset_scenario, py::arg("name"),
          py::arg("n_adaptive"), py::arg("ma_order"), py::arg("p_excess"),
          py::arg("dist_tag") = "gaussian-unit");

    py::class_<OutputFunctional>(m, "OutputFunctional")
        .def_readonly("name", &OutputFunctional::name)
        .def_readonly("coeffs", &OutputFunctional::coeffs)
        .def_readonly("constant", &OutputFunctional::constant)
        .def("value", &OutputFunctional::value, py::arg("state"));

    py::class_<StateSpaceModel>(m, "StateSpaceModel")
        .def_readonly("kind", &StateSpaceModel::kind)
        .def_readonly("order", &StateSpaceModel::order)
        .def_readonly("cfg", &StateSpaceModel::cfg)
        .def_property_readonly("dim", &StateSpaceModel::dim)
        .def_property_readonly(
            "nnz", [](const StateSpaceModel& s) { return s.stats.nnz; })
        .def("variable_names",
             [](const StateSpaceModel& s) {
                 std::vector<std::string> names;
                 names.reserve(s.variables.size());
                 for (const auto& v : s.variables) names.push_back(v.name());
                 return names;
             })
        .def("output_names", &StateSpaceModel::output_names)
        .def("output", &StateSpaceModel::output, py::arg("name"))
        .def("output_values", &StateSpaceModel::output_values, py::arg("state"))
        .def("transition_dense", &dense_transition, py::arg("beta"),
             "Transition matrix at a concrete step size, as nested lists")
        .def("forcing",
             [](const StateSpaceModel& s, double beta) {
                 return evaluate_forcing(s, beta);
             },
             py::arg("beta"))
        .def("__repr__", [](const StateSpaceModel& s) {
            return "StateSpaceModel(" + s.kind + ", dim=" +
                   std::to_string(s.dim()) + ")";
        });

    m.def("count_equations", &count_equations, py::arg("n_adaptive"),
          py::arg("ma_order"), py::arg("p_excess"), py::arg("order"),
          py::arg("cap") = 2'000'000,
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "derive_model",
        [](const SystemConfig& cfg, int order, long long cap) {
            DeriveOptions opts;
            opts.cap = cap;
            return derive_model(cfg, order, opts);
        },
        py::arg("cfg"), py::arg("order"), py::arg("cap") = 2'000'000,
        py::call_guard<py::gil_scoped_release>());
    m.def("initial_state", &initial_state, py::arg("model"));

    m.def("ia_first_order", &ia_first_order, py::arg("cfg"));
    m.def("ia_second_order", &ia_second_order, py::arg("cfg"),
          py::call_guard<py::gil_scoped_release>());
    m.def("ia_beta_bound_mean", &ia_beta_bound_mean, py::arg("cfg"));

    m.def(
        "spectral_radius",
        [](const StateSpaceModel& model, double beta) {
            return spectral_radius(model, beta);
        },
        py::arg("model"), py::arg("beta"),
        py::call_guard<py::gil_scoped_release>());
    m.def("steady_state", &steady_state, py::arg("model"), py::arg("beta"),
          py::arg("check_stability") = true,
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "steady_outputs",
        [](const StateSpaceModel& model, double beta, bool check_stability) {
            std::vector<double> y;
            {
                py::gil_scoped_release release;
                y = steady_state(model, beta, check_stability);
            }
            py::dict d;
            std::vector<std::string> names = model.output_names();
            std::vector<double> vals = model.output_values(y);
            for (std::size_t i = 0; i < names.size(); ++i)
                d[py::str(names[i])] = vals[i];
            return d;
        },
        py::arg("model"), py::arg("beta"), py::arg("check_stability") = true,
        "Fixed-point outputs by name");

    m.def(
        "iterate",
        [](const StateSpaceModel& model, double beta, long long k_max,
           long long record_stride, double divergence_norm,
           bool fast_forward) {
            IterateOptions opts;
            opts.k_max = k_max;
            opts.record_stride = record_stride;
            opts.divergence_norm = divergence_norm;
            opts.fast_forward = fast_forward;
            IterateResult r;
            {
                py::gil_scoped_release release;
                r = iterate(model, beta, opts);
            }
            py::dict d;
            d["output_names"] = r.output_names;
            d["ks"] = r.ks;
            d["curve"] = r.curve;
            d["final_state"] = r.final_state;
            d["final_outputs"] = r.final_outputs;
            d["diverged"] = r.diverged;
            d["diverged_at"] = r.diverged_at;
            d["fixed_point_at"] = r.fixed_point_at;
            return d;
        },
        py::arg("model"), py::arg("beta"), py::arg("k_max") = 1000,
        py::arg("record_stride") = 1, py::arg("divergence_norm") = 1e12,
        py::arg("fast_forward") = true);

    py::class_<StabilityReport>(m, "StabilityReport")
        .def_readonly("model_kind", &StabilityReport::model_kind)
        .def_readonly("beta_max", &StabilityReport::beta_max)
        .def_readonly("bracket_lo", &StabilityReport::bracket_lo)
        .def_readonly("bracket_hi", &StabilityReport::bracket_hi)
        .def_readonly("tolerance", &StabilityReport::tolerance)
        .def_readonly("found", &StabilityReport::found)
        .def_readonly("samples", &StabilityReport::samples)
        .def("__repr__", [](const StabilityReport& r) {
            return "StabilityReport(" + r.model_kind + ", beta_max=" +
                   format_double(r.beta_max) + ", found=" +
                   (r.found ? "True" : "False") + ")";
        });
    m.def(
        "find_beta_max",
        [](const StateSpaceModel& model, double lo, double hi, int scan_points,
           double tol) { return find_beta_max(model, lo, hi, scan_points, tol); },
        py::arg("model"), py::arg("lo"), py::arg("hi"),
        py::arg("scan_points") = 64, py::arg("tol") = 1e-5,
        py::call_guard<py::gil_scoped_release>());

    py::class_<TrialPlan>(m, "TrialPlan")
        .def(py::init<>())
        .def_readwrite("cfg", &TrialPlan::cfg)
        .def_readwrite("trials", &TrialPlan::trials)
        .def_readwrite("iterations", &TrialPlan::iterations)
        .def_readwrite("seed", &TrialPlan::seed)
        .def_readwrite("divergence_threshold", &TrialPlan::divergence_threshold)
        .def_readwrite("threads", &TrialPlan::threads)
        .def_readwrite("block_size", &TrialPlan::block_size);
    py::class_<SimulationResult>(m, "SimulationResult")
        .def_readonly("trials", &SimulationResult::trials)
        .def_readonly("iterations", &SimulationResult::iterations)
        .def_readonly("seed", &SimulationResult::seed)
        .def_readonly("diverged_trials", &SimulationResult::diverged_trials)
        .def_readonly("trials_completed", &SimulationResult::trials_completed)
        .def_readonly("mean_w", &SimulationResult::mean_w)
        .def_readonly("stderr_w", &SimulationResult::stderr_w)
        .def_readonly("mse", &SimulationResult::mse)
        .def_readonly("stderr_mse", &SimulationResult::stderr_mse);
    m.def("run_simulation", &run, py::arg("plan"),
          py::call_guard<py::gil_scoped_release>());
    m.def("divergence_probability", &divergence_probability, py::arg("cfg"),
          py::arg("betas"), py::arg("trials"), py::arg("iterations"),
          py::arg("seed"), py::arg("threshold") = 10.0,
          py::call_guard<py::gil_scoped_release>());

    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));
    m.def("load_config_file", &load_config_file, py::arg("path"));
    m.def("config_to_json_text", [](const SystemConfig& cfg) {
        return config_to_json(cfg).dump(2) + "\n";
    });
    m.def("format_double", &format_double, py::arg("value"));
}
