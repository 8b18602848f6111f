"""Control library for a single-link flexible manipulator.

Thin wrapper around the C++ core: modal plant construction, the controllable
canonical transform, the nested terminal sliding-mode controller, the
fixed-time sliding-mode observer, closed-loop simulation, and regulation
metrics.
"""

from flexlink._core import (  # noqa: F401
    BeamParams,
    CanonicalSystem,
    ControllerGains,
    DisturbanceSpec,
    HierarchyCheck,
    ModeData,
    ObserverGains,
    PreparedScenario,
    QReport,
    SettlingBounds,
    SimTrace,
    StateSpacePlant,
    SweepReport,
    build_plant,
    build_surfaces,
    characteristic_coefficients,
    check_time_hierarchy,
    control_law,
    design_observer_gains,
    disturbance_signal,
    feedforward_phi,
    integral_indices,
    inverse_transform,
    load_scenario,
    mode_shape_boundary_values,
    output_map,
    overshoot,
    pd_baseline,
    phi_eps,
    phi_eps_derivative,
    prepare_scenario_json,
    run_scenario,
    settling_bound_controller,
    settling_bound_observer,
    settling_time,
    signed_power_vector,
    solve_modal_data,
    solve_mode_frequencies,
    steady_state_norm,
    summarize_run_json,
    sweep_initial_conditions,
    to_canonical,
    total_inertia,
    transform_desired,
    validate_gains,
)

__version__ = "0.1.0"
