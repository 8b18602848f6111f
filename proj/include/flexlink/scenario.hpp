#pragma once

#include "flexlink/beam.hpp"
#include "flexlink/canonical.hpp"
#include "flexlink/controller.hpp"
#include "flexlink/metrics.hpp"
#include "flexlink/observer.hpp"
#include "flexlink/simulation.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <string>

namespace flexlink {

/// Observer block of a scenario: either explicit injection matrices or the
/// deterministic pole-placement design recipe.
struct ObserverSettings {
    bool explicit_gains = false;
    ObserverGains gains;  ///< used when explicit_gains
    std::array<double, 4> poles{-20.0, -22.0, -24.0, -26.0};
    double k1_scale = 9.0;
    double k2_scale = 3.0;
    double mu1 = 0.6;
    double mu2 = 1.4;
    double boundary_layer = 1e-3;
};

/// Complete scenario file contents.
struct Scenario {
    BeamParams beam;
    ModalData modal_overrides;
    ControllerGains controller;
    ObserverSettings observer;
    PdGains pd;
    SimConfig sim;
    MetricsConfig metrics;
};

/// Parses and validates a scenario document; ConfigError messages carry the
/// offending field path.
Scenario scenario_from_json(const nlohmann::json& j);

/// Scenario plus everything derived from it, ready to simulate. Construction
/// enforces the load-time gates: gain invariants, disturbance bound below the
/// assumed bound below eta, and the observer/controller time hierarchy.
struct PreparedScenario {
    Scenario scenario;
    SimSystems systems;
    GainSet gains;
    SettlingBounds controller_bounds;
    double observer_bound = 0.0;
    HierarchyCheck hierarchy;
    QReport q_report;
    std::string hash;  ///< FNV-1a of the source document bytes
};

PreparedScenario prepare_scenario(const Scenario& scenario, const std::string& hash = "");
PreparedScenario load_scenario_file(const std::string& path);

/// FNV-1a 64-bit hash, hex encoded; used to stamp artifacts.
std::string fnv1a_hex(const std::string& bytes);

void write_trace_csv(const std::string& path, const SimTrace& trace,
                     const std::string& hash);

/// Frozen column header of the trace CSV.
std::string trace_csv_header();

/// Settling/overshoot/steady-state/integral metrics for one output signal.
SignalMetrics signal_metrics(const std::vector<double>& t, const std::vector<double>& y,
                             double target, const MetricsConfig& cfg);

/// Summary document for one run: metrics for tip and joint, analytic bounds,
/// and event diagnostics. All values come from library calls.
nlohmann::json summarize_run(const PreparedScenario& prepared, const SimTrace& trace,
                             ControllerSelect which);

nlohmann::json sweep_to_json(const SweepReport& report, const std::string& hash);

void write_plot_script(const std::string& path, const std::string& csv_name,
                       const std::string& hash);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace flexlink
