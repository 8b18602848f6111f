#pragma once

#include "flexlink/beam.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace flexlink {

/// Controllable canonical (chain-of-integrators) realization z = T psi with
/// z' = A_C z + B_C u, g = C_C z and characteristic coefficients f
/// (constant term first, leading coefficient 1 implied).
struct CanonicalSystem {
    Eigen::MatrixXd T;
    Eigen::MatrixXd T_inv;
    Eigen::MatrixXd A_C;
    Eigen::VectorXd B_C;
    Eigen::MatrixXd C_C;
    Eigen::VectorXd f;
    double t_condition = 0.0;  ///< spectral condition number of T

    int dim() const { return static_cast<int>(T.rows()); }
};

/// Condition number above which downstream consumers should warn.
inline constexpr double kTransformConditionWarn = 1e8;

/// Monic characteristic polynomial coefficients of a square matrix, constant
/// term first, via the Faddeev-LeVerrier recursion.
Eigen::VectorXd characteristic_coefficients(const Eigen::MatrixXd& A);

/// Transform a controllable (A, B, C) triple to companion form. Throws
/// SolverError naming the deficient rank when (A, B) is not controllable.
CanonicalSystem to_canonical(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                             const Eigen::MatrixXd& C);
CanonicalSystem to_canonical(const StateSpacePlant& plant);

Eigen::VectorXd transform_state(const CanonicalSystem& sys, const Eigen::VectorXd& psi);
Eigen::VectorXd transform_desired(const CanonicalSystem& sys, const Eigen::VectorXd& psi_d);
Eigen::VectorXd inverse_transform(const CanonicalSystem& sys, const Eigen::VectorXd& z);

/// Matrices as row-major arrays for external verification.
nlohmann::json canonical_to_json(const CanonicalSystem& sys);

}  // namespace flexlink
