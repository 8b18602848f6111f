#include "flexlink/simulation.hpp"

#include "flexlink/errors.hpp"
#include "flexlink/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <stdexcept>

namespace flexlink {

namespace {

constexpr double kDivergenceLimit = 1e6;

// Uniform in [0, 1) straight from the raw engine words; keeps realizations
// independent of library distribution internals.
double uniform01(std::mt19937_64& rng) {
    return (rng() >> 11) * (1.0 / 9007199254740992.0);
}

ControllerGains adjusted_controller(const ControllerGains& g, bool theory_mode) {
    ControllerGains out = g;
    if (theory_mode) out.boundary_layer = 0.0;
    return out;
}

ObserverGains adjusted_observer(const ObserverGains& g, bool theory_mode) {
    ObserverGains out = g;
    if (theory_mode) out.boundary_layer = 0.0;
    return out;
}

Eigen::Vector4d desired_canonical(const SimConfig& cfg, const SimSystems& sys) {
    Eigen::VectorXd psi_d = Eigen::VectorXd::Zero(4);
    psi_d(0) = cfg.theta_d;
    return sys.canon.T * psi_d;
}

struct StepCore {
    Eigen::VectorXd psi_next;
    Eigen::Vector4d z_hat_next;
    double u_raw, u_sat;
    bool saturated;
};

StepCore rk4_step(const LoopState& state, const SimConfig& cfg, const SimSystems& sys,
                  const ControllerGains& cg, const ObserverGains& og, const PdGains& pd,
                  FilteredDerivative& pd_filter, const DisturbanceSource& source) {
    const int nt = sys.truth.dim();
    if (state.psi.size() != nt)
        throw std::invalid_argument("plant state dimension does not match truth plant");

    const Eigen::Vector4d z_d = desired_canonical(cfg, sys);

    // Control sampled at the step start and held.
    double u_raw;
    if (cfg.controller == ControllerSelect::proposed) {
        u_raw = control_law(state.z_hat, z_d, cg, sys.canon.f);
    } else {
        const double theta_t = (sys.truth.C * state.psi)(0);
        const double rate = pd_filter.step(theta_t, cfg.dt);
        u_raw = pd_baseline(theta_t, rate, cfg.theta_d, pd.kp, pd.kd);
    }
    double u_sat = u_raw;
    bool saturated = false;
    if (!cfg.theory_mode && std::abs(u_raw) > cg.saturation) {
        u_sat = std::copysign(cg.saturation, u_raw);
        saturated = true;
    }

    auto rhs = [&](double t, const Eigen::VectorXd& psi, const Eigen::Vector4d& z_hat,
                   Eigen::VectorXd& dpsi, Eigen::Vector4d& dz_hat) {
        const double x = source(t);
        dpsi = sys.truth.A * psi + sys.truth.B * (u_sat + x);
        const Eigen::Vector2d g = sys.truth.C * psi;
        dz_hat = observer_rhs(z_hat, g, u_sat, sys.canon, og);
    };

    const double h = cfg.dt;
    Eigen::VectorXd k1p(nt), k2p(nt), k3p(nt), k4p(nt);
    Eigen::Vector4d k1z, k2z, k3z, k4z;
    rhs(state.t, state.psi, state.z_hat, k1p, k1z);
    rhs(state.t + 0.5 * h, state.psi + 0.5 * h * k1p,
        (state.z_hat + 0.5 * h * k1z).eval(), k2p, k2z);
    rhs(state.t + 0.5 * h, state.psi + 0.5 * h * k2p,
        (state.z_hat + 0.5 * h * k2z).eval(), k3p, k3z);
    rhs(state.t + h, state.psi + h * k3p, (state.z_hat + h * k3z).eval(), k4p, k4z);

    StepCore out;
    out.psi_next = state.psi + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    out.z_hat_next = state.z_hat + (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    out.u_raw = u_raw;
    out.u_sat = u_sat;
    out.saturated = saturated;

    const double t_next = state.t + h;
    if (!out.psi_next.allFinite() || !out.z_hat_next.allFinite() ||
        out.psi_next.cwiseAbs().maxCoeff() > kDivergenceLimit ||
        out.z_hat_next.cwiseAbs().maxCoeff() > kDivergenceLimit) {
        throw DivergedError(t_next, "simulation diverged at t = " + std::to_string(t_next));
    }
    return out;
}

}  // namespace

void DisturbanceSpec::validate() const {
    if (!(bound >= 0.0)) throw std::invalid_argument("DisturbanceSpec.bound must be >= 0");
    if (kind == DisturbanceKind::sine || kind == DisturbanceKind::noise) {
        if (!(frequency > 0.0))
            throw std::invalid_argument("DisturbanceSpec.frequency must be > 0");
    }
    if (kind == DisturbanceKind::step && !(start_time >= 0.0))
        throw std::invalid_argument("DisturbanceSpec.start_time must be >= 0");
}

DisturbanceSource::DisturbanceSource(const DisturbanceSpec& spec) : spec_(spec) {
    spec.validate();
    if (spec.kind == DisturbanceKind::noise) {
        constexpr int n = 16;
        std::mt19937_64 rng(spec.seed);
        components_.reserve(n);
        for (int i = 0; i < n; ++i) {
            Component comp;
            comp.amplitude = spec.bound / n;
            comp.omega = (0.1 + 0.9 * uniform01(rng)) * spec.frequency;
            comp.phase = 2.0 * M_PI * uniform01(rng);
            components_.push_back(comp);
        }
    }
}

double DisturbanceSource::operator()(double t) const {
    switch (spec_.kind) {
        case DisturbanceKind::none:
            return 0.0;
        case DisturbanceKind::sine:
            return spec_.bound * std::sin(spec_.frequency * t);
        case DisturbanceKind::step:
            return t >= spec_.start_time ? spec_.bound : 0.0;
        case DisturbanceKind::noise: {
            double sum = 0.0;
            for (const auto& comp : components_)
                sum += comp.amplitude * std::sin(comp.omega * t + comp.phase);
            return sum;
        }
    }
    return 0.0;
}

double disturbance_signal(const DisturbanceSpec& spec, double t) {
    return DisturbanceSource(spec)(t);
}

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("SimConfig.dt must be > 0");
    if (!(t_end >= 0.0)) throw std::invalid_argument("SimConfig.t_end must be >= 0");
    if (!std::isfinite(theta_d)) throw std::invalid_argument("SimConfig.theta_d must be finite");
    if (truth_modes != 1 && truth_modes != 2)
        throw std::invalid_argument("SimConfig.truth_modes must be 1 or 2");
    disturbance.validate();
}

StepOutput step_closed_loop(const LoopState& state, const SimConfig& config,
                            const SimSystems& systems, const GainSet& gains,
                            const DisturbanceSource& source) {
    config.validate();
    const ControllerGains cg = adjusted_controller(gains.controller, config.theory_mode);
    const ObserverGains og = adjusted_observer(gains.observer, config.theory_mode);

    StepOutput out;
    out.state = state;
    const StepCore core = rk4_step(state, config, systems, cg, og, gains.pd,
                                   out.state.pd_filter, source);
    out.state.t = state.t + config.dt;
    out.state.psi = core.psi_next;
    out.state.z_hat = core.z_hat_next;
    out.u_raw = core.u_raw;
    out.u_sat = core.u_sat;
    out.saturated = core.saturated;
    return out;
}

StepOutput step_closed_loop(const LoopState& state, const SimConfig& config,
                            const SimSystems& systems, const GainSet& gains) {
    return step_closed_loop(state, config, systems, gains,
                            DisturbanceSource(config.disturbance));
}

SimTrace run_scenario(const SimConfig& config, const SimSystems& systems,
                      const GainSet& gains) {
    config.validate();
    const int nt = systems.truth.dim();
    if (config.plant_ic.size() != nt)
        throw std::invalid_argument("plant_ic dimension does not match truth plant");

    const ControllerGains cg = adjusted_controller(gains.controller, config.theory_mode);
    const ObserverGains og = adjusted_observer(gains.observer, config.theory_mode);
    const DisturbanceSource source(config.disturbance);
    const Eigen::Vector4d z_d = desired_canonical(config, systems);

    const auto n_steps = static_cast<size_t>(std::llround(config.t_end / config.dt));
    SimTrace trace;
    auto reserve_all = [&](size_t n) {
        trace.t.reserve(n);
        trace.theta.reserve(n); trace.theta_dot.reserve(n);
        trace.p1.reserve(n); trace.p1_dot.reserve(n);
        trace.p2.reserve(n); trace.p2_dot.reserve(n);
        for (auto& v : trace.z) v.reserve(n);
        for (auto& v : trace.z_hat) v.reserve(n);
        for (auto& v : trace.s) v.reserve(n);
        trace.u_raw.reserve(n); trace.u_sat.reserve(n);
        trace.theta_t.reserve(n); trace.theta_c.reserve(n);
        trace.xi.reserve(n); trace.ey_norm.reserve(n);
    };
    reserve_all(n_steps + 1);

    LoopState state;
    state.t = 0.0;
    state.psi = config.plant_ic;
    state.z_hat = config.observer_ic;
    state.pd_filter = FilteredDerivative(gains.pd.filter_tau);

    size_t dwell_count = 0;

    auto record = [&](const LoopState& st, double u_raw, double u_sat) {
        trace.t.push_back(st.t);
        trace.theta.push_back(st.psi(0));
        trace.theta_dot.push_back(st.psi(1));
        trace.p1.push_back(st.psi(2));
        trace.p1_dot.push_back(st.psi(3));
        trace.p2.push_back(nt > 4 ? st.psi(4) : 0.0);
        trace.p2_dot.push_back(nt > 4 ? st.psi(5) : 0.0);

        const Eigen::Vector4d z_true = systems.canon.T * st.psi.head(4);
        const SurfaceStack stack = build_surfaces(st.z_hat, z_d, cg);
        const Eigen::Vector2d g = systems.truth.C * st.psi;
        const Eigen::Vector2d e_y = g - systems.canon.C_C * st.z_hat;
        for (int k = 0; k < 4; ++k) {
            trace.z[k].push_back(z_true(k));
            trace.z_hat[k].push_back(st.z_hat(k));
            trace.s[k].push_back(stack.s[k]);
        }
        trace.u_raw.push_back(u_raw);
        trace.u_sat.push_back(u_sat);
        trace.theta_t.push_back(g(0));
        trace.theta_c.push_back(g(1));
        trace.xi.push_back(source(st.t));
        trace.ey_norm.push_back(e_y.norm());
        if (cg.boundary_layer > 0.0 && std::abs(stack.s[3]) < cg.boundary_layer)
            ++dwell_count;
    };

    for (size_t i = 0; i < n_steps; ++i) {
        StepOutput out = step_closed_loop(state, config, systems, gains, source);
        record(state, out.u_raw, out.u_sat);
        if (out.saturated) ++trace.saturation_steps;
        state = std::move(out.state);
    }
    // Final sample: evaluate the control on a scratch copy so the PD filter
    // is not advanced twice.
    {
        LoopState probe = state;
        double u_raw, u_sat;
        if (config.controller == ControllerSelect::proposed) {
            u_raw = control_law(state.z_hat, z_d, cg, systems.canon.f);
        } else {
            const double theta_t = (systems.truth.C * state.psi)(0);
            const double rate = probe.pd_filter.step(theta_t, config.dt);
            u_raw = pd_baseline(theta_t, rate, config.theta_d, gains.pd.kp, gains.pd.kd);
        }
        u_sat = u_raw;
        if (!config.theory_mode && std::abs(u_raw) > cg.saturation)
            u_sat = std::copysign(cg.saturation, u_raw);
        record(state, u_raw, u_sat);
    }

    trace.boundary_dwell_fraction =
        trace.size() ? static_cast<double>(dwell_count) / trace.size() : 0.0;
    return trace;
}

SweepReport sweep_initial_conditions(const SimConfig& config, const SimSystems& systems,
                                     const GainSet& gains,
                                     const std::vector<double>& scales) {
    if (scales.empty())
        throw std::invalid_argument("sweep_initial_conditions: scales must be non-empty");

    const SettlingBounds ctrl_bounds = settling_bound_controller(gains.controller);
    const double t_obs = settling_bound_observer(systems.canon, gains.observer);
    const HierarchyCheck hierarchy = check_time_hierarchy(t_obs, ctrl_bounds.total);

    auto run_one = [&](double scale) {
        SweepRow row;
        row.scale = scale;
        row.mirrored = scale < 0.0;
        SimConfig cfg = config;
        cfg.plant_ic = config.plant_ic * scale;
        try {
            const SimTrace trace = run_scenario(cfg, systems, gains);
            const SettlingResult settling =
                settling_time(trace.t, trace.theta_t, cfg.theta_d, 0.02);
            row.settled = settling.settled;
            row.settling_tip = settling.time;
            row.within_bound = settling.settled && settling.time <= hierarchy.t_total;
        } catch (const DivergedError&) {
            row.diverged = true;
        }
        return row;
    };

    SweepReport report;
    report.t_total_bound = hierarchy.t_total;
    report.rows.resize(scales.size());
    if (scales.size() == 1) {
        report.rows[0] = run_one(scales[0]);
    } else {
        std::vector<std::future<SweepRow>> futures;
        futures.reserve(scales.size());
        for (double scale : scales)
            futures.push_back(std::async(std::launch::async, run_one, scale));
        for (size_t i = 0; i < futures.size(); ++i) report.rows[i] = futures[i].get();
    }
    report.all_within_bound = std::all_of(report.rows.begin(), report.rows.end(),
                                          [](const SweepRow& r) { return r.within_bound; });
    return report;
}

}  // namespace flexlink
