#pragma once

#include "flexlink/beam.hpp"
#include "flexlink/canonical.hpp"
#include "flexlink/controller.hpp"
#include "flexlink/observer.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace flexlink {

enum class DisturbanceKind { none, sine, step, noise };

/// Matched input disturbance with a hard amplitude bound.
struct DisturbanceSpec {
    DisturbanceKind kind = DisturbanceKind::none;
    double bound = 0.0;      ///< sup |xi(t)|
    double frequency = 2.0;  ///< sine frequency / noise band edge [rad/s]
    double start_time = 1.0; ///< step onset [s]
    unsigned seed = 1234;    ///< noise realization seed

    void validate() const;
};

/// Deterministic realization of a disturbance spec; for band-limited noise
/// the amplitudes of the seeded sinusoid bank sum to the bound, so the
/// realized signal respects it by construction.
class DisturbanceSource {
  public:
    explicit DisturbanceSource(const DisturbanceSpec& spec);
    double operator()(double t) const;

  private:
    DisturbanceSpec spec_;
    struct Component { double amplitude, omega, phase; };
    std::vector<Component> components_;
};

/// Convenience single-shot evaluation (builds a realization per call).
double disturbance_signal(const DisturbanceSpec& spec, double t);

enum class ControllerSelect { proposed, pd };

struct SimConfig {
    double dt = 1e-4;
    double t_end = 8.0;
    double theta_d = 0.0;                      ///< set-point [rad]
    Eigen::VectorXd plant_ic;                  ///< truth-plant initial state
    Eigen::Vector4d observer_ic = Eigen::Vector4d::Zero();
    DisturbanceSpec disturbance;
    ControllerSelect controller = ControllerSelect::proposed;
    int truth_modes = 2;
    bool theory_mode = false;  ///< pure sign functions, no saturation

    void validate() const;
};

/// Truth plant (1 or 2 modes), the one-mode design plant, and its canonical
/// form used by controller and observer.
struct SimSystems {
    StateSpacePlant truth;
    StateSpacePlant design;
    CanonicalSystem canon;
};

struct GainSet {
    ControllerGains controller;
    ObserverGains observer;
    PdGains pd;
};

/// Mutable per-run state advanced by step_closed_loop.
struct LoopState {
    double t = 0.0;
    Eigen::VectorXd psi;
    Eigen::Vector4d z_hat = Eigen::Vector4d::Zero();
    FilteredDerivative pd_filter{0.05};
};

struct StepOutput {
    LoopState state;      ///< state at t + dt
    double u_raw = 0.0;   ///< control before saturation
    double u_sat = 0.0;   ///< control as applied
    bool saturated = false;
};

/// One fixed-step RK4 step of the coupled truth-plant/observer ODE with the
/// control held constant across the step. Throws DivergedError when the state
/// leaves the admissible region.
StepOutput step_closed_loop(const LoopState& state, const SimConfig& config,
                            const SimSystems& systems, const GainSet& gains);
StepOutput step_closed_loop(const LoopState& state, const SimConfig& config,
                            const SimSystems& systems, const GainSet& gains,
                            const DisturbanceSource& source);

/// Uniform-grid record of one closed-loop run. p2 columns are zero for a
/// one-mode truth plant.
struct SimTrace {
    std::vector<double> t;
    std::vector<double> theta, theta_dot, p1, p1_dot, p2, p2_dot;
    std::array<std::vector<double>, 4> z;      ///< reduced true canonical state
    std::array<std::vector<double>, 4> z_hat;  ///< observer estimate
    std::array<std::vector<double>, 4> s;      ///< surfaces evaluated at z_hat
    std::vector<double> u_raw, u_sat, theta_t, theta_c, xi, ey_norm;
    int saturation_steps = 0;
    double boundary_dwell_fraction = 0.0;

    size_t size() const { return t.size(); }
};

SimTrace run_scenario(const SimConfig& config, const SimSystems& systems,
                      const GainSet& gains);

struct SweepRow {
    double scale = 1.0;
    bool mirrored = false;  ///< negative scale (symmetric dynamics)
    bool diverged = false;
    bool settled = false;
    double settling_tip = 0.0;
    bool within_bound = false;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    double t_total_bound = 0.0;  ///< T_observer + T_controller
    bool all_within_bound = false;
};

/// Runs the scenario once per initial-condition scale (plant_ic * scale),
/// concurrently when there is more than one scale. Diverged runs are flagged,
/// not propagated.
SweepReport sweep_initial_conditions(const SimConfig& config, const SimSystems& systems,
                                     const GainSet& gains,
                                     const std::vector<double>& scales);

}  // namespace flexlink
