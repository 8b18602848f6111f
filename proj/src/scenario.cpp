#include "flexlink/scenario.hpp"

#include "flexlink/errors.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace flexlink {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

const json& member(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "/" + key, "missing required field");
    return *it;
}

double num(const json& j, const char* key, const std::string& path) {
    const json& v = member(j, key, path);
    if (!v.is_number()) fail(path + "/" + key, "expected a number");
    return v.get<double>();
}

double num_or(const json& j, const char* key, const std::string& path, double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) fail(path + "/" + key, "expected a number");
    return v.get<double>();
}

bool flag_or(const json& j, const char* key, const std::string& path, bool fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) fail(path + "/" + key, "expected a boolean");
    return v.get<bool>();
}

std::array<double, 3> triple(const json& j, const char* key, const std::string& path) {
    const json& v = member(j, key, path);
    if (!v.is_array() || v.size() != 3) fail(path + "/" + key, "expected an array of 3 numbers");
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) {
        if (!v[i].is_number()) fail(path + "/" + key, "expected an array of 3 numbers");
        out[i] = v[i].get<double>();
    }
    return out;
}

Eigen::MatrixXd matrix_4x2(const json& j, const char* key, const std::string& path) {
    const json& v = member(j, key, path);
    if (!v.is_array() || v.size() != 4) fail(path + "/" + key, "expected a 4x2 matrix");
    Eigen::MatrixXd mat(4, 2);
    for (int i = 0; i < 4; ++i) {
        if (!v[i].is_array() || v[i].size() != 2)
            fail(path + "/" + key, "expected a 4x2 matrix");
        for (int k = 0; k < 2; ++k) mat(i, k) = v[i][k].get<double>();
    }
    return mat;
}

double first_crossing(const std::vector<double>& t, const std::vector<double>& values,
                      double threshold) {
    for (size_t i = 0; i < values.size(); ++i)
        if (std::abs(values[i]) <= threshold) return t[i];
    return -1.0;
}

double first_norm_crossing(const std::vector<double>& t, const std::vector<double>& norms,
                           double threshold) {
    for (size_t i = 0; i < norms.size(); ++i)
        if (norms[i] <= threshold) return t[i];
    return -1.0;
}

json metrics_json(const SignalMetrics& m) {
    return json{{"settled", m.settling.settled},
                {"settling_time", m.settling.time},
                {"overshoot_pct", m.overshoot.percent},
                {"overshoot_absolute", m.overshoot.absolute},
                {"steady_state_rms", m.steady_state_rms},
                {"ise", m.indices.ise},
                {"iae", m.indices.iae},
                {"itse", m.indices.itse},
                {"itae", m.indices.itae}};
}

}  // namespace

Scenario scenario_from_json(const json& j) {
    Scenario sc;

    const json& jb = member(j, "beam", "");
    sc.beam.rho = num(jb, "rho", "/beam");
    sc.beam.length = num(jb, "length", "/beam");
    sc.beam.EI = num(jb, "EI", "/beam");
    sc.beam.payload_mass = num_or(jb, "payload_mass", "/beam", 0.0);
    sc.beam.payload_inertia = num_or(jb, "payload_inertia", "/beam", 0.0);
    sc.beam.hub_inertia = num(jb, "hub_inertia", "/beam");
    sc.beam.damping_ratio = num_or(jb, "damping_ratio", "/beam", 0.01);
    try {
        sc.beam.validate();
    } catch (const std::invalid_argument& e) {
        fail("/beam", e.what());
    }

    if (j.contains("modal_overrides")) {
        const json& jm = j.at("modal_overrides");
        if (!jm.is_array()) fail("/modal_overrides", "expected an array");
        int idx = 0;
        for (const auto& entry : jm) {
            const std::string path = "/modal_overrides/" + std::to_string(idx++);
            ModeData mode;
            mode.omega = num(entry, "omega", path);
            mode.phi_l = num(entry, "phi_l", path);
            mode.phi_prime_0 = num(entry, "phi_prime_0", path);
            sc.modal_overrides.push_back(mode);
        }
    }

    const json& jc = member(j, "controller", "");
    sc.controller.alpha = triple(jc, "alpha", "/controller");
    sc.controller.kappa1 = triple(jc, "kappa1", "/controller");
    sc.controller.kappa2 = triple(jc, "kappa2", "/controller");
    sc.controller.gamma1 = num(jc, "gamma1", "/controller");
    sc.controller.gamma2 = num(jc, "gamma2", "/controller");
    sc.controller.eps = num(jc, "eps", "/controller");
    sc.controller.c1 = num(jc, "c1", "/controller");
    sc.controller.c2 = num(jc, "c2", "/controller");
    sc.controller.p = num(jc, "p", "/controller");
    sc.controller.q = num(jc, "q", "/controller");
    sc.controller.eta = num(jc, "eta", "/controller");
    sc.controller.dist_bound = num(jc, "dist_bound", "/controller");
    sc.controller.boundary_layer = num_or(jc, "boundary_layer", "/controller", 1e-3);
    sc.controller.saturation = num_or(jc, "saturation", "/controller", 50.0);
    try {
        sc.controller.validate();
    } catch (const std::invalid_argument& e) {
        fail("/controller", e.what());
    }

    const json& jo = member(j, "observer", "");
    sc.observer.mu1 = num(jo, "mu1", "/observer");
    sc.observer.mu2 = num(jo, "mu2", "/observer");
    sc.observer.boundary_layer = num_or(jo, "boundary_layer", "/observer", 1e-3);
    if (jo.contains("L")) {
        sc.observer.explicit_gains = true;
        sc.observer.gains.L = matrix_4x2(jo, "L", "/observer");
        sc.observer.gains.K1 = matrix_4x2(jo, "K1", "/observer");
        sc.observer.gains.K2 = matrix_4x2(jo, "K2", "/observer");
        sc.observer.gains.mu1 = sc.observer.mu1;
        sc.observer.gains.mu2 = sc.observer.mu2;
        sc.observer.gains.boundary_layer = sc.observer.boundary_layer;
    } else {
        const json& jp = member(jo, "poles", "/observer");
        if (!jp.is_array() || jp.size() != 4)
            fail("/observer/poles", "expected an array of 4 numbers");
        for (int i = 0; i < 4; ++i) sc.observer.poles[i] = jp[i].get<double>();
        sc.observer.k1_scale = num(jo, "k1_scale", "/observer");
        sc.observer.k2_scale = num(jo, "k2_scale", "/observer");
        if (!(sc.observer.k1_scale > 0.0) || !(sc.observer.k2_scale > 0.0))
            fail("/observer", "k1_scale and k2_scale must be > 0");
    }

    const json& jpd = member(j, "pd", "");
    sc.pd.kp = num(jpd, "kp", "/pd");
    sc.pd.kd = num(jpd, "kd", "/pd");
    sc.pd.filter_tau = num_or(jpd, "filter_tau", "/pd", 0.05);
    try {
        sc.pd.validate();
    } catch (const std::invalid_argument& e) {
        fail("/pd", e.what());
    }

    const json& js = member(j, "sim", "");
    sc.sim.dt = num(js, "dt", "/sim");
    sc.sim.t_end = num(js, "t_end", "/sim");
    sc.sim.theta_d = num(js, "theta_d", "/sim");
    if (!(sc.sim.dt > 0.0)) fail("/sim/dt", "must be > 0");
    if (!(sc.sim.t_end > sc.sim.dt)) fail("/sim/t_end", "must be > dt");
    const int truth_modes_raw = static_cast<int>(num_or(js, "truth_modes", "/sim", 2.0));
    if (truth_modes_raw != 1 && truth_modes_raw != 2) fail("/sim/truth_modes", "must be 1 or 2");
    sc.sim.truth_modes = truth_modes_raw;
    sc.sim.theory_mode = flag_or(js, "theory_mode", "/sim", false);

    const int truth_dim = 2 * sc.sim.truth_modes + 2;
    sc.sim.plant_ic = Eigen::VectorXd::Zero(truth_dim);
    if (js.contains("plant_ic")) {
        const json& jic = js.at("plant_ic");
        if (!jic.is_array() || (int)jic.size() != truth_dim)
            fail("/sim/plant_ic", "expected an array of length " + std::to_string(truth_dim));
        for (int i = 0; i < truth_dim; ++i) sc.sim.plant_ic(i) = jic[i].get<double>();
    }
    if (js.contains("observer_ic")) {
        const json& jic = js.at("observer_ic");
        if (!jic.is_array() || jic.size() != 4)
            fail("/sim/observer_ic", "expected an array of length 4");
        for (int i = 0; i < 4; ++i) sc.sim.observer_ic(i) = jic[i].get<double>();
    }

    if (js.contains("controller")) {
        const std::string which = js.at("controller").get<std::string>();
        if (which == "proposed") sc.sim.controller = ControllerSelect::proposed;
        else if (which == "pd") sc.sim.controller = ControllerSelect::pd;
        else fail("/sim/controller", "must be \"proposed\" or \"pd\"");
    }

    if (js.contains("disturbance")) {
        const json& jd = js.at("disturbance");
        const std::string kind = member(jd, "kind", "/sim/disturbance").get<std::string>();
        if (kind == "none") sc.sim.disturbance.kind = DisturbanceKind::none;
        else if (kind == "sine") sc.sim.disturbance.kind = DisturbanceKind::sine;
        else if (kind == "step") sc.sim.disturbance.kind = DisturbanceKind::step;
        else if (kind == "band-limited-noise") sc.sim.disturbance.kind = DisturbanceKind::noise;
        else fail("/sim/disturbance/kind", "must be none|sine|step|band-limited-noise");
        sc.sim.disturbance.bound = num_or(jd, "bound", "/sim/disturbance", 0.0);
        sc.sim.disturbance.frequency = num_or(jd, "frequency", "/sim/disturbance", 2.0);
        sc.sim.disturbance.start_time = num_or(jd, "start_time", "/sim/disturbance", 1.0);
        sc.sim.disturbance.seed =
            static_cast<unsigned>(num_or(jd, "seed", "/sim/disturbance", 1234.0));
        try {
            sc.sim.disturbance.validate();
        } catch (const std::invalid_argument& e) {
            fail("/sim/disturbance", e.what());
        }
    }

    if (j.contains("metrics")) {
        const json& jm = j.at("metrics");
        sc.metrics.band_fraction = num_or(jm, "band_fraction", "/metrics", 0.02);
        sc.metrics.ss_window = num_or(jm, "ss_window", "/metrics", 1.0);
        if (!(sc.metrics.band_fraction > 0.0)) fail("/metrics/band_fraction", "must be > 0");
        if (!(sc.metrics.ss_window > 0.0)) fail("/metrics/ss_window", "must be > 0");
    }

    return sc;
}

PreparedScenario prepare_scenario(const Scenario& scenario, const std::string& hash) {
    PreparedScenario prep;
    prep.scenario = scenario;
    prep.hash = hash;

    const int modes_needed = std::max(scenario.sim.truth_modes, 1);
    const ModalData modal =
        solve_modal_data(scenario.beam, modes_needed,
                         scenario.modal_overrides.empty() ? nullptr : &scenario.modal_overrides);

    prep.systems.truth = build_plant(scenario.beam, modal, scenario.sim.truth_modes);
    prep.systems.design = build_plant(scenario.beam, modal, 1);
    prep.systems.canon = to_canonical(prep.systems.design);

    prep.gains.controller = scenario.controller;
    prep.gains.pd = scenario.pd;
    if (scenario.observer.explicit_gains) {
        prep.gains.observer = scenario.observer.gains;
    } else {
        prep.gains.observer = design_observer_gains(
            prep.systems.canon, scenario.observer.poles, scenario.observer.k1_scale,
            scenario.observer.k2_scale, scenario.observer.mu1, scenario.observer.mu2,
            scenario.observer.boundary_layer);
    }
    prep.gains.observer.validate(prep.systems.canon.dim());
    prep.q_report = validate_gains(prep.systems.canon, prep.gains.observer);

    if (scenario.sim.disturbance.bound > scenario.controller.dist_bound)
        throw ConfigError("/sim/disturbance/bound: exceeds /controller/dist_bound; "
                          "eta > dist_bound >= disturbance bound is required");

    prep.controller_bounds = settling_bound_controller(prep.gains.controller);
    prep.observer_bound = settling_bound_observer(prep.systems.canon, prep.gains.observer);
    prep.hierarchy = check_time_hierarchy(prep.observer_bound, prep.controller_bounds.total);
    if (!prep.hierarchy.ok)
        throw ConfigError("/observer: settling bound " + std::to_string(prep.observer_bound) +
                          " s is not strictly below the controller bound " +
                          std::to_string(prep.controller_bounds.total) +
                          " s; the time-scale separation is violated");

    scenario.sim.validate();
    if (scenario.sim.plant_ic.size() != prep.systems.truth.dim())
        throw ConfigError("/sim/plant_ic: dimension does not match the truth plant");
    return prep;
}

PreparedScenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();

    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
    }
    return prepare_scenario(scenario_from_json(j), fnv1a_hex(bytes));
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string trace_csv_header() {
    return "t,theta,theta_dot,p1,p1_dot,p2,p2_dot,"
           "z1,z2,z3,z4,zhat1,zhat2,zhat3,zhat4,"
           "s0,s1,s2,s3,u_raw,u_sat,theta_t,theta_c,xi,ey_norm";
}

void write_trace_csv(const std::string& path, const SimTrace& trace,
                     const std::string& hash) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot open for writing: " + path);
    std::fprintf(fp, "# flexlink trace, scenario_hash=%s\n%s\n", hash.c_str(),
                 trace_csv_header().c_str());
    for (size_t i = 0; i < trace.size(); ++i) {
        std::fprintf(fp,
                     "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                     "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                     "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                     trace.t[i], trace.theta[i], trace.theta_dot[i], trace.p1[i],
                     trace.p1_dot[i], trace.p2[i], trace.p2_dot[i], trace.z[0][i],
                     trace.z[1][i], trace.z[2][i], trace.z[3][i], trace.z_hat[0][i],
                     trace.z_hat[1][i], trace.z_hat[2][i], trace.z_hat[3][i], trace.s[0][i],
                     trace.s[1][i], trace.s[2][i], trace.s[3][i], trace.u_raw[i],
                     trace.u_sat[i], trace.theta_t[i], trace.theta_c[i], trace.xi[i],
                     trace.ey_norm[i]);
    }
    std::fclose(fp);
}

SignalMetrics signal_metrics(const std::vector<double>& t, const std::vector<double>& y,
                             double target, const MetricsConfig& cfg) {
    SignalMetrics m;
    m.settling = settling_time(t, y, target, cfg.band_fraction);
    m.overshoot = overshoot(y, target);
    std::vector<double> err(y.size());
    for (size_t i = 0; i < y.size(); ++i) err[i] = y[i] - target;
    m.steady_state_rms = steady_state_norm(t, err, cfg.ss_window);
    m.indices = integral_indices(t, err);
    return m;
}

nlohmann::json summarize_run(const PreparedScenario& prepared, const SimTrace& trace,
                             ControllerSelect which) {
    const Scenario& sc = prepared.scenario;
    const SignalMetrics tip = signal_metrics(trace.t, trace.theta_t, sc.sim.theta_d, sc.metrics);
    const SignalMetrics joint =
        signal_metrics(trace.t, trace.theta_c, sc.sim.theta_d, sc.metrics);

    double ey_max_tail = 0.0;
    const size_t tail_start = trace.size() - trace.size() / 5;
    for (size_t i = tail_start; i < trace.size(); ++i)
        ey_max_tail = std::max(ey_max_tail, trace.ey_norm[i]);

    json out;
    out["scenario_hash"] = prepared.hash;
    out["controller"] = (which == ControllerSelect::proposed) ? "proposed" : "pd";
    out["status"] = tip.settling.settled ? "settled" : "unsettled";
    out["metrics"] = {{"tip", metrics_json(tip)}, {"joint", metrics_json(joint)}};
    out["bounds"] = {
        {"T_stage", prepared.controller_bounds.stage},
        {"T_stage_lyapunov", prepared.controller_bounds.stage_lyapunov},
        {"T_ctrl", prepared.controller_bounds.total},
        {"T_ctrl_lyapunov", prepared.controller_bounds.total_lyapunov},
        {"T_ftsmo", prepared.observer_bound},
        {"T_total", prepared.hierarchy.t_total},
        {"hierarchy_ok", prepared.hierarchy.ok}};
    out["events"] = {
        {"saturation_steps", trace.saturation_steps},
        {"boundary_dwell_fraction", trace.boundary_dwell_fraction},
        {"s3_entry_time_1e-3", first_crossing(trace.t, trace.s[3], 1e-3)},
        {"ey_entry_time_1e-4", first_norm_crossing(trace.t, trace.ey_norm, 1e-4)},
        {"ey_max_tail", ey_max_tail}};
    out["sim"] = {{"dt", sc.sim.dt},
                  {"t_end", sc.sim.t_end},
                  {"theta_d", sc.sim.theta_d},
                  {"truth_modes", sc.sim.truth_modes},
                  {"theory_mode", sc.sim.theory_mode},
                  {"seed", sc.sim.disturbance.seed}};
    return out;
}

nlohmann::json sweep_to_json(const SweepReport& report, const std::string& hash) {
    json rows = json::array();
    for (const auto& row : report.rows) {
        rows.push_back({{"scale", row.scale},
                        {"mirrored", row.mirrored},
                        {"diverged", row.diverged},
                        {"settled", row.settled},
                        {"settling_tip", row.settling_tip},
                        {"within_bound", row.within_bound}});
    }
    return json{{"scenario_hash", hash},
                {"t_total_bound", report.t_total_bound},
                {"all_within_bound", report.all_within_bound},
                {"runs", rows}};
}

void write_plot_script(const std::string& path, const std::string& csv_name,
                       const std::string& hash) {
    std::ostringstream os;
    os << "# flexlink plots, scenario_hash=" << hash << "\n"
       << "set datafile separator ','\n"
       << "csv = '" << csv_name << "'\n"
       << "set terminal pngcairo size 1400,900\n"
       << "set output 'trace.png'\n"
       << "set multiplot layout 2,3\n"
       << "set key top right\n"
       << "set xlabel 't [s]'\n"
       << "set title 'outputs'\n"
       << "plot csv using 1:22 with lines title 'theta_t', \\\n"
       << "     csv using 1:23 with lines title 'theta_c'\n"
       << "set title 'plant states'\n"
       << "plot csv using 1:2 with lines title 'theta', \\\n"
       << "     csv using 1:4 with lines title 'p1', \\\n"
       << "     csv using 1:6 with lines title 'p2'\n"
       << "set title 'canonical state vs estimate'\n"
       << "plot csv using 1:8 with lines title 'z1', \\\n"
       << "     csv using 1:12 with lines dashtype 2 title 'zhat1', \\\n"
       << "     csv using 1:9 with lines title 'z2', \\\n"
       << "     csv using 1:13 with lines dashtype 2 title 'zhat2'\n"
       << "set title 'sliding variables'\n"
       << "plot csv using 1:16 with lines title 's0', \\\n"
       << "     csv using 1:17 with lines title 's1', \\\n"
       << "     csv using 1:18 with lines title 's2', \\\n"
       << "     csv using 1:19 with lines title 's3'\n"
       << "set title 'control input'\n"
       << "plot csv using 1:21 with lines title 'u'\n"
       << "set title 'output estimation error'\n"
       << "set logscale y\n"
       << "plot csv using 1:($25 > 1e-18 ? $25 : 1e-18) with lines title '|e_y|'\n"
       << "unset logscale y\n"
       << "unset multiplot\n";
    write_text_file(path, os.str());
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << contents;
}

}  // namespace flexlink
