#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <iosfwd>
#include <utility>
#include <vector>

namespace flexlink {

/// Physical parameters of a hub-actuated flexible link with optional payload.
struct BeamParams {
    double rho = 0.5;             ///< linear mass density [kg/m]
    double length = 1.0;          ///< link length [m]
    double EI = 1.0;              ///< flexural rigidity [N m^2]
    double payload_mass = 0.0;    ///< tip payload mass [kg]
    double payload_inertia = 0.0; ///< tip payload inertia [kg m^2]
    double hub_inertia = 0.002;   ///< hub/motor inertia [kg m^2]
    double damping_ratio = 0.01;  ///< modal damping ratio, shared across modes

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Per-mode eigendata entering the state-space model.
struct ModeData {
    double omega = 0.0;        ///< natural frequency [rad/s]
    double phi_l = 0.0;        ///< mode-shape value at the tip
    double phi_prime_0 = 0.0;  ///< mode-shape slope at the base [1/m]
};

using ModalData = std::vector<ModeData>;

/// Analytic mode shape of the hinged-free link with hub inertia,
/// phi(x) = a sin(bx) + b_ cos(bx) + c sinh(bx) + d cosh(bx), mass-normalized.
struct ModeShape {
    double beta = 0.0;   ///< spatial eigenvalue [1/m]
    double omega = 0.0;  ///< natural frequency [rad/s]
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    double value(double x) const;
    double slope(double x) const;
};

/// Linear state-space model psi' = A psi + B (u + xi), g = C psi with
/// psi = [theta, theta', p_1, p_1', ..., p_n, p_n'].
struct StateSpacePlant {
    int n_modes = 0;
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::MatrixXd C;
    double total_inertia = 0.0;

    int dim() const { return 2 * n_modes + 2; }
};

/// Hub-referred rigid inertia: hub + rho*l^3/3 + M_p*l^2 + I_p.
double total_inertia(const BeamParams& beam);

/// First n positive roots of the link frequency equation, ascending [rad/s].
/// Throws SolverError if bracketing exhausts its search interval.
std::vector<double> solve_mode_frequencies(const BeamParams& beam, int n_modes);

/// Full normalized mode shape for a 1-based mode index.
ModeShape solve_mode_shape(const BeamParams& beam, int mode_index);

/// (phi(l), phi'(0)) of the mass-normalized mode shape.
std::pair<double, double> mode_shape_boundary_values(const BeamParams& beam, int mode_index);

/// Normalizes a raw shape so that integral(rho * phi^2) = 1 over the link and
/// phi'(0) > 0. Throws std::invalid_argument on a degenerate (zero-norm) shape.
void normalize_mode_shape(ModeShape& shape, const BeamParams& beam);

/// Eigendata for the first n modes; entries of `overrides` (when non-null and
/// long enough) take precedence over the boundary-model solver, per mode.
ModalData solve_modal_data(const BeamParams& beam, int n_modes,
                           const ModalData* overrides = nullptr);

/// Assembles the (2n+2)-state plant from beam constants and modal data.
StateSpacePlant build_plant(const BeamParams& beam, const ModalData& modes, int n_modes);

/// g = C psi, rows (theta_t, theta_c).
Eigen::Vector2d output_map(const StateSpacePlant& plant, const Eigen::VectorXd& psi);

BeamParams beam_from_json(const nlohmann::json& j);
nlohmann::json beam_to_json(const BeamParams& beam);
ModalData modal_overrides_from_json(const nlohmann::json& j);
nlohmann::json modal_overrides_to_json(const ModalData& modes);

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& mat);

}  // namespace flexlink
