#pragma once

#include "flexlink/canonical.hpp"

#include <Eigen/Dense>

#include <array>

namespace flexlink {

/// Gains of the fixed-time sliding-mode observer
/// zhat' = A_C zhat + B_C u + L ey + K1 |ey|^mu1 sgn ey + K2 |ey|^mu2 sgn ey.
struct ObserverGains {
    Eigen::MatrixXd L;   ///< linear output injection, m x 2
    Eigen::MatrixXd K1;  ///< low-power injection, m x 2
    Eigen::MatrixXd K2;  ///< high-power injection, m x 2
    double mu1 = 0.6;    ///< in (0, 1)
    double mu2 = 1.4;    ///< > 1
    double boundary_layer = 1e-3;  ///< signed-power regularization; 0 = pure

    void validate(int dim) const;
};

/// Estimated canonical state plus the last output estimation error.
struct ObserverState {
    Eigen::Vector4d z_hat = Eigen::Vector4d::Zero();
    Eigen::Vector2d e_y = Eigen::Vector2d::Zero();
};

/// Gain-validity report from the injected-Lyapunov condition. Q is evaluated
/// on the full state space and on the output subspace range(C_C^T); the
/// observability rank is what forces full-state convergence. Norms are
/// spectral throughout.
struct QReport {
    Eigen::VectorXd q_eigenvalues;
    bool q_positive_semidefinite = false;
    bool q_definite_on_output_subspace = false;
    int observability_rank = 0;
    double observability_smallest_sv = 0.0;
    bool closed_loop_hurwitz = false;

    bool gains_ok() const {
        return q_definite_on_output_subspace && observability_rank > 0 &&
               closed_loop_hurwitz;
    }
};

/// Componentwise |x|^mu sgn(x).
Eigen::Vector2d signed_power_vector(const Eigen::Vector2d& e_y, double mu);

/// Componentwise smooth variant x (x^2 + width^2)^((mu-1)/2); pure power when
/// width == 0.
Eigen::Vector2d signed_power_vector_regularized(const Eigen::Vector2d& e_y, double mu,
                                                double width);

/// Observer right-hand side given the measured output g and held input u.
Eigen::Vector4d observer_rhs(const Eigen::Vector4d& z_hat, const Eigen::Vector2d& g,
                             double u, const CanonicalSystem& sys,
                             const ObserverGains& gains);

/// Never throws; reports eigenvalues of Q, semi/definiteness, and the
/// observability rank of (A_C, C_C).
QReport validate_gains(const CanonicalSystem& sys, const ObserverGains& gains);

/// T_FTSMO <= 2/(eps1 (1-mu1)) + 2/(eps2 (mu2-1)) with eps_i = |C_C| |K_i|
/// (spectral norms).
double settling_bound_observer(const CanonicalSystem& sys, const ObserverGains& gains);

struct HierarchyCheck {
    bool ok = false;      ///< true iff t_observer < t_controller strictly
    double t_total = 0.0; ///< t_observer + t_controller
};

HierarchyCheck check_time_hierarchy(double t_observer, double t_controller);

/// Deterministic default design: single-channel output-injection placement of
/// eig(A_C - L C_C) at `poles`, with K1/K2 along the normalized L direction
/// scaled so that |C_C||K1| = k1_scale and |C_C||K2| = k2_scale exactly.
ObserverGains design_observer_gains(const CanonicalSystem& sys,
                                    const std::array<double, 4>& poles,
                                    double k1_scale, double k2_scale,
                                    double mu1, double mu2,
                                    double boundary_layer = 1e-3);

}  // namespace flexlink
