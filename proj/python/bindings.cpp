#include "flexlink/beam.hpp"
#include "flexlink/canonical.hpp"
#include "flexlink/controller.hpp"
#include "flexlink/errors.hpp"
#include "flexlink/metrics.hpp"
#include "flexlink/observer.hpp"
#include "flexlink/scenario.hpp"
#include "flexlink/simulation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>

namespace py = pybind11;
using namespace pybind11::literals;
using namespace flexlink;

namespace {

SimTrace run_prepared(const PreparedScenario& prep, double dt, double t_end,
                      const std::string& controller, bool theory_mode) {
    SimConfig cfg = prep.scenario.sim;
    if (dt > 0.0) cfg.dt = dt;
    if (t_end > 0.0) cfg.t_end = t_end;
    if (!controller.empty())
        cfg.controller = (controller == "pd") ? ControllerSelect::pd
                                              : ControllerSelect::proposed;
    if (theory_mode) cfg.theory_mode = true;
    return run_scenario(cfg, prep.systems, prep.gains);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Flexible-link manipulator control core";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DivergedError>(m, "DivergedError");
    py::register_exception<SolverError>(m, "SolverError");

    py::class_<BeamParams>(m, "BeamParams")
        .def(py::init([](double rho, double length, double EI, double payload_mass,
                         double payload_inertia, double hub_inertia, double damping_ratio) {
                 BeamParams beam{rho, length, EI, payload_mass, payload_inertia,
                                 hub_inertia, damping_ratio};
                 beam.validate();
                 return beam;
             }),
             "rho"_a, "length"_a, "EI"_a, "payload_mass"_a = 0.0,
             "payload_inertia"_a = 0.0, "hub_inertia"_a = 0.002,
             "damping_ratio"_a = 0.01)
        .def_readwrite("rho", &BeamParams::rho)
        .def_readwrite("length", &BeamParams::length)
        .def_readwrite("EI", &BeamParams::EI)
        .def_readwrite("payload_mass", &BeamParams::payload_mass)
        .def_readwrite("payload_inertia", &BeamParams::payload_inertia)
        .def_readwrite("hub_inertia", &BeamParams::hub_inertia)
        .def_readwrite("damping_ratio", &BeamParams::damping_ratio);

    py::class_<ModeData>(m, "ModeData")
        .def(py::init<double, double, double>(), "omega"_a, "phi_l"_a, "phi_prime_0"_a)
        .def_readwrite("omega", &ModeData::omega)
        .def_readwrite("phi_l", &ModeData::phi_l)
        .def_readwrite("phi_prime_0", &ModeData::phi_prime_0);

    py::class_<StateSpacePlant>(m, "StateSpacePlant")
        .def_readonly("n_modes", &StateSpacePlant::n_modes)
        .def_readonly("A", &StateSpacePlant::A)
        .def_readonly("B", &StateSpacePlant::B)
        .def_readonly("C", &StateSpacePlant::C)
        .def_readonly("total_inertia", &StateSpacePlant::total_inertia)
        .def("dim", &StateSpacePlant::dim);

    m.def("total_inertia", &total_inertia, "beam"_a);
    m.def("solve_mode_frequencies", &solve_mode_frequencies, "beam"_a, "n_modes"_a);
    m.def("mode_shape_boundary_values", &mode_shape_boundary_values, "beam"_a,
          "mode_index"_a);
    m.def("solve_modal_data",
          [](const BeamParams& beam, int n, const std::vector<ModeData>& overrides) {
              return overrides.empty() ? solve_modal_data(beam, n)
                                       : solve_modal_data(beam, n, &overrides);
          },
          "beam"_a, "n_modes"_a, "overrides"_a = std::vector<ModeData>{});
    m.def("build_plant", &build_plant, "beam"_a, "modes"_a, "n_modes"_a);
    m.def("output_map", &output_map, "plant"_a, "psi"_a);

    py::class_<CanonicalSystem>(m, "CanonicalSystem")
        .def_readonly("T", &CanonicalSystem::T)
        .def_readonly("T_inv", &CanonicalSystem::T_inv)
        .def_readonly("A_C", &CanonicalSystem::A_C)
        .def_readonly("B_C", &CanonicalSystem::B_C)
        .def_readonly("C_C", &CanonicalSystem::C_C)
        .def_readonly("f", &CanonicalSystem::f)
        .def_readonly("t_condition", &CanonicalSystem::t_condition);

    m.def("characteristic_coefficients", &characteristic_coefficients, "A"_a);
    m.def("to_canonical",
          py::overload_cast<const Eigen::MatrixXd&, const Eigen::VectorXd&,
                            const Eigen::MatrixXd&>(&to_canonical),
          "A"_a, "B"_a, "C"_a);
    m.def("to_canonical", py::overload_cast<const StateSpacePlant&>(&to_canonical),
          "plant"_a);
    m.def("transform_desired", &transform_desired, "sys"_a, "psi_d"_a);
    m.def("inverse_transform", &inverse_transform, "sys"_a, "z"_a);

    py::class_<ControllerGains>(m, "ControllerGains")
        .def(py::init<>())
        .def_readwrite("alpha", &ControllerGains::alpha)
        .def_readwrite("kappa1", &ControllerGains::kappa1)
        .def_readwrite("kappa2", &ControllerGains::kappa2)
        .def_readwrite("gamma1", &ControllerGains::gamma1)
        .def_readwrite("gamma2", &ControllerGains::gamma2)
        .def_readwrite("eps", &ControllerGains::eps)
        .def_readwrite("c1", &ControllerGains::c1)
        .def_readwrite("c2", &ControllerGains::c2)
        .def_readwrite("p", &ControllerGains::p)
        .def_readwrite("q", &ControllerGains::q)
        .def_readwrite("eta", &ControllerGains::eta)
        .def_readwrite("dist_bound", &ControllerGains::dist_bound)
        .def_readwrite("boundary_layer", &ControllerGains::boundary_layer)
        .def_readwrite("saturation", &ControllerGains::saturation)
        .def("validate", &ControllerGains::validate);

    m.def("phi_eps", &phi_eps, "x"_a, "gamma1"_a, "eps"_a);
    m.def("phi_eps_derivative", &phi_eps_derivative, "x"_a, "gamma1"_a, "eps"_a,
          "order"_a);
    m.def("build_surfaces",
          [](const Eigen::Vector4d& z, const Eigen::Vector4d& z_d,
             const ControllerGains& gains) {
              const SurfaceStack st = build_surfaces(z, z_d, gains);
              return py::make_tuple(st.s, st.s3_dot_partial);
          },
          "z"_a, "z_d"_a, "gains"_a);
    m.def("feedforward_phi", &feedforward_phi, "z"_a, "z_d"_a, "gains"_a);
    m.def("control_law", &control_law, "z_hat"_a, "z_d"_a, "gains"_a, "f_coeffs"_a);
    m.def("pd_baseline", &pd_baseline, "theta_t"_a, "theta_t_dot_est"_a, "theta_d"_a,
          "kp"_a, "kd"_a);

    py::class_<SettlingBounds>(m, "SettlingBounds")
        .def_readonly("stage", &SettlingBounds::stage)
        .def_readonly("stage_lyapunov", &SettlingBounds::stage_lyapunov)
        .def_readonly("total", &SettlingBounds::total)
        .def_readonly("total_lyapunov", &SettlingBounds::total_lyapunov);
    m.def("settling_bound_controller", &settling_bound_controller, "gains"_a);

    py::class_<ObserverGains>(m, "ObserverGains")
        .def(py::init<>())
        .def_readwrite("L", &ObserverGains::L)
        .def_readwrite("K1", &ObserverGains::K1)
        .def_readwrite("K2", &ObserverGains::K2)
        .def_readwrite("mu1", &ObserverGains::mu1)
        .def_readwrite("mu2", &ObserverGains::mu2)
        .def_readwrite("boundary_layer", &ObserverGains::boundary_layer);

    py::class_<QReport>(m, "QReport")
        .def_readonly("q_eigenvalues", &QReport::q_eigenvalues)
        .def_readonly("q_positive_semidefinite", &QReport::q_positive_semidefinite)
        .def_readonly("q_definite_on_output_subspace",
                      &QReport::q_definite_on_output_subspace)
        .def_readonly("observability_rank", &QReport::observability_rank)
        .def_readonly("observability_smallest_sv", &QReport::observability_smallest_sv)
        .def_readonly("closed_loop_hurwitz", &QReport::closed_loop_hurwitz)
        .def("gains_ok", &QReport::gains_ok);

    m.def("signed_power_vector", &signed_power_vector, "e_y"_a, "mu"_a);
    m.def("design_observer_gains", &design_observer_gains, "sys"_a, "poles"_a,
          "k1_scale"_a, "k2_scale"_a, "mu1"_a, "mu2"_a, "boundary_layer"_a = 1e-3);
    m.def("validate_gains", &validate_gains, "sys"_a, "gains"_a);
    m.def("settling_bound_observer", &settling_bound_observer, "sys"_a, "gains"_a);

    py::class_<HierarchyCheck>(m, "HierarchyCheck")
        .def_readonly("ok", &HierarchyCheck::ok)
        .def_readonly("t_total", &HierarchyCheck::t_total);
    m.def("check_time_hierarchy", &check_time_hierarchy, "t_observer"_a,
          "t_controller"_a);

    py::class_<DisturbanceSpec>(m, "DisturbanceSpec")
        .def(py::init([](const std::string& kind, double bound, double frequency,
                         double start_time, unsigned seed) {
                 DisturbanceSpec spec;
                 if (kind == "none") spec.kind = DisturbanceKind::none;
                 else if (kind == "sine") spec.kind = DisturbanceKind::sine;
                 else if (kind == "step") spec.kind = DisturbanceKind::step;
                 else if (kind == "band-limited-noise") spec.kind = DisturbanceKind::noise;
                 else throw std::invalid_argument("unknown disturbance kind: " + kind);
                 spec.bound = bound;
                 spec.frequency = frequency;
                 spec.start_time = start_time;
                 spec.seed = seed;
                 spec.validate();
                 return spec;
             }),
             "kind"_a, "bound"_a = 0.0, "frequency"_a = 2.0, "start_time"_a = 1.0,
             "seed"_a = 1234u)
        .def_readonly("bound", &DisturbanceSpec::bound);
    m.def("disturbance_signal", &disturbance_signal, "spec"_a, "t"_a);

    py::class_<SimTrace>(m, "SimTrace")
        .def_readonly("t", &SimTrace::t)
        .def_readonly("theta", &SimTrace::theta)
        .def_readonly("theta_dot", &SimTrace::theta_dot)
        .def_readonly("p1", &SimTrace::p1)
        .def_readonly("p1_dot", &SimTrace::p1_dot)
        .def_readonly("p2", &SimTrace::p2)
        .def_readonly("p2_dot", &SimTrace::p2_dot)
        .def_readonly("z", &SimTrace::z)
        .def_readonly("z_hat", &SimTrace::z_hat)
        .def_readonly("s", &SimTrace::s)
        .def_readonly("u_raw", &SimTrace::u_raw)
        .def_readonly("u_sat", &SimTrace::u_sat)
        .def_readonly("theta_t", &SimTrace::theta_t)
        .def_readonly("theta_c", &SimTrace::theta_c)
        .def_readonly("xi", &SimTrace::xi)
        .def_readonly("ey_norm", &SimTrace::ey_norm)
        .def_readonly("saturation_steps", &SimTrace::saturation_steps)
        .def_readonly("boundary_dwell_fraction", &SimTrace::boundary_dwell_fraction)
        .def("__len__", &SimTrace::size);

    py::class_<SweepReport>(m, "SweepReport")
        .def_readonly("t_total_bound", &SweepReport::t_total_bound)
        .def_readonly("all_within_bound", &SweepReport::all_within_bound)
        .def("rows", [](const SweepReport& r) {
            py::list rows;
            for (const auto& row : r.rows) {
                rows.append(py::dict("scale"_a = row.scale, "mirrored"_a = row.mirrored,
                                     "diverged"_a = row.diverged, "settled"_a = row.settled,
                                     "settling_tip"_a = row.settling_tip,
                                     "within_bound"_a = row.within_bound));
            }
            return rows;
        });

    py::class_<PreparedScenario>(m, "PreparedScenario")
        .def_readonly("hash", &PreparedScenario::hash)
        .def_readonly("controller_bounds", &PreparedScenario::controller_bounds)
        .def_readonly("observer_bound", &PreparedScenario::observer_bound)
        .def_readonly("hierarchy", &PreparedScenario::hierarchy)
        .def_readonly("q_report", &PreparedScenario::q_report)
        .def_property_readonly("canonical",
                               [](const PreparedScenario& p) { return p.systems.canon; })
        .def_property_readonly("truth_plant",
                               [](const PreparedScenario& p) { return p.systems.truth; })
        .def_property_readonly("design_plant",
                               [](const PreparedScenario& p) { return p.systems.design; });

    m.def("load_scenario", &load_scenario_file, "path"_a);
    m.def("prepare_scenario_json",
          [](const std::string& text) {
              const auto j = nlohmann::json::parse(text);
              return prepare_scenario(scenario_from_json(j), fnv1a_hex(text));
          },
          "json_text"_a);
    m.def("run_scenario", &run_prepared, "prepared"_a, "dt"_a = 0.0, "t_end"_a = 0.0,
          "controller"_a = std::string(), "theory_mode"_a = false);
    m.def("sweep_initial_conditions",
          [](const PreparedScenario& prep, const std::vector<double>& scales) {
              return sweep_initial_conditions(prep.scenario.sim, prep.systems, prep.gains,
                                              scales);
          },
          "prepared"_a, "scales"_a);
    m.def("summarize_run_json",
          [](const PreparedScenario& prep, const SimTrace& trace,
             const std::string& which) {
              return summarize_run(prep, trace,
                                   which == "pd" ? ControllerSelect::pd
                                                 : ControllerSelect::proposed)
                  .dump();
          },
          "prepared"_a, "trace"_a, "which"_a = "proposed");

    m.def("settling_time",
          [](const std::vector<double>& t, const std::vector<double>& y, double target,
             double band_fraction) {
              const SettlingResult r = settling_time(t, y, target, band_fraction);
              return py::make_tuple(r.settled, r.time);
          },
          "t"_a, "y"_a, "target"_a, "band_fraction"_a = 0.02);
    m.def("integral_indices",
          [](const std::vector<double>& t, const std::vector<double>& e) {
              const IntegralIndices idx = integral_indices(t, e);
              return py::make_tuple(idx.ise, idx.iae, idx.itse, idx.itae);
          },
          "t"_a, "e"_a);
    m.def("overshoot",
          [](const std::vector<double>& y, double target) {
              const OvershootResult r = overshoot(y, target);
              return py::make_tuple(r.percent, r.absolute);
          },
          "y"_a, "target"_a);
    m.def("steady_state_norm", &steady_state_norm, "t"_a, "e"_a, "window"_a = 1.0);
}
