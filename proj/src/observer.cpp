#include "flexlink/observer.hpp"

#include "flexlink/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace flexlink {

void ObserverGains::validate(int dim) const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("ObserverGains: ") + what);
    };
    require(L.rows() == dim && L.cols() == 2, "L must be dim x 2");
    require(K1.rows() == dim && K1.cols() == 2, "K1 must be dim x 2");
    require(K2.rows() == dim && K2.cols() == 2, "K2 must be dim x 2");
    require(L.allFinite() && K1.allFinite() && K2.allFinite(), "gains must be finite");
    require(mu1 > 0.0 && mu1 < 1.0, "mu1 must be in (0, 1)");
    require(mu2 > 1.0, "mu2 must be > 1");
    require(boundary_layer >= 0.0, "boundary_layer must be >= 0");
}

Eigen::Vector2d signed_power_vector(const Eigen::Vector2d& e_y, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("signed_power_vector: mu must be > 0");
    Eigen::Vector2d out;
    for (int i = 0; i < 2; ++i) {
        const double x = e_y(i);
        out(i) = (x == 0.0) ? 0.0 : std::copysign(std::pow(std::abs(x), mu), x);
    }
    return out;
}

Eigen::Vector2d signed_power_vector_regularized(const Eigen::Vector2d& e_y, double mu,
                                                double width) {
    if (width <= 0.0) return signed_power_vector(e_y, mu);
    Eigen::Vector2d out;
    for (int i = 0; i < 2; ++i) {
        const double x = e_y(i);
        out(i) = x * std::pow(x * x + width * width, 0.5 * (mu - 1.0));
    }
    return out;
}

Eigen::Vector4d observer_rhs(const Eigen::Vector4d& z_hat, const Eigen::Vector2d& g,
                             double u, const CanonicalSystem& sys,
                             const ObserverGains& gains) {
    if (!z_hat.allFinite() || !g.allFinite() || !std::isfinite(u))
        throw std::invalid_argument("observer_rhs: non-finite inputs");
    const Eigen::Vector2d e_y = g - sys.C_C * z_hat;
    return sys.A_C * z_hat + sys.B_C * u + gains.L * e_y +
           gains.K1 * signed_power_vector_regularized(e_y, gains.mu1, gains.boundary_layer) +
           gains.K2 * signed_power_vector_regularized(e_y, gains.mu2, gains.boundary_layer);
}

QReport validate_gains(const CanonicalSystem& sys, const ObserverGains& gains) {
    QReport report;
    const int m = sys.dim();
    const Eigen::MatrixXd A_cl = sys.A_C - gains.L * sys.C_C;
    const Eigen::MatrixXd CtC = sys.C_C.transpose() * sys.C_C;
    Eigen::MatrixXd Q = -(CtC * A_cl + A_cl.transpose() * CtC);
    Q = 0.5 * (Q + Q.transpose().eval());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    report.q_eigenvalues = es.eigenvalues();
    const double scale = std::max(1.0, report.q_eigenvalues.cwiseAbs().maxCoeff());
    report.q_positive_semidefinite = report.q_eigenvalues.minCoeff() > -1e-10 * scale;

    // Definiteness restricted to range(C_C^T): Q has rank <= 2 contributions
    // there, which is all the injected Lyapunov argument can certify.
    Eigen::JacobiSVD<Eigen::MatrixXd> csvd(sys.C_C.transpose(), Eigen::ComputeThinU);
    int crank = 0;
    for (int i = 0; i < csvd.singularValues().size(); ++i)
        if (csvd.singularValues()(i) > 1e-12 * csvd.singularValues()(0)) ++crank;
    if (crank > 0) {
        const Eigen::MatrixXd V = csvd.matrixU().leftCols(crank);
        const Eigen::MatrixXd Qs = V.transpose() * Q * V;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sub(0.5 * (Qs + Qs.transpose()));
        report.q_definite_on_output_subspace = sub.eigenvalues().minCoeff() > 0.0;
    }

    Eigen::MatrixXd obs(2 * m, m);
    Eigen::MatrixXd block = sys.C_C;
    for (int k = 0; k < m; ++k) {
        obs.middleRows(2 * k, 2) = block;
        block = block * sys.A_C;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> osvd(obs);
    const auto& sv = osvd.singularValues();
    report.observability_smallest_sv = sv(sv.size() - 1);
    report.observability_rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-8 * sv(0)) ++report.observability_rank;

    Eigen::EigenSolver<Eigen::MatrixXd> acl_eig(A_cl);
    report.closed_loop_hurwitz = (acl_eig.eigenvalues().real().maxCoeff() < 0.0);
    return report;
}

double settling_bound_observer(const CanonicalSystem& sys, const ObserverGains& gains) {
    gains.validate(sys.dim());
    const double c_norm = sys.C_C.jacobiSvd().singularValues()(0);
    const double eps1 = c_norm * gains.K1.jacobiSvd().singularValues()(0);
    const double eps2 = c_norm * gains.K2.jacobiSvd().singularValues()(0);
    if (!(eps1 > 0.0) || !(eps2 > 0.0))
        throw std::invalid_argument("settling_bound_observer: injection gains must be nonzero");
    return 2.0 / (eps1 * (1.0 - gains.mu1)) + 2.0 / (eps2 * (gains.mu2 - 1.0));
}

HierarchyCheck check_time_hierarchy(double t_observer, double t_controller) {
    HierarchyCheck check;
    check.ok = t_observer < t_controller;
    check.t_total = t_observer + t_controller;
    return check;
}

ObserverGains design_observer_gains(const CanonicalSystem& sys,
                                    const std::array<double, 4>& poles,
                                    double k1_scale, double k2_scale,
                                    double mu1, double mu2, double boundary_layer) {
    const int m = sys.dim();
    if (m != 4) throw std::invalid_argument("design_observer_gains expects a 4th-order system");
    for (double pole : poles)
        if (!(pole < 0.0))
            throw std::invalid_argument("design_observer_gains: poles must be negative");

    // Parametric output-injection placement on the dual pair (A_C^T, C_C^T):
    // x_i = (A_C^T - pole_i I)^{-1} C_C^T p_i, L = (P X^{-1})^T. Both output
    // channels participate, which is what makes the injected Lyapunov
    // condition definite on the output subspace; a single channel gives a
    // rank-1 C_C L and can never dominate both output directions.
    Eigen::MatrixXd P(2, m);
    P << 1, 0, 1, 0,
         0, 1, 0, 1;
    Eigen::MatrixXd X(m, m);
    const Eigen::MatrixXd At = sys.A_C.transpose();
    for (int i = 0; i < m; ++i) {
        const Eigen::MatrixXd shifted = At - poles[i] * Eigen::MatrixXd::Identity(m, m);
        X.col(i) = shifted.partialPivLu().solve(sys.C_C.transpose() * P.col(i));
    }
    Eigen::FullPivLU<Eigen::MatrixXd> xlu(X);
    if (!xlu.isInvertible())
        throw SolverError("design_observer_gains: eigenvector matrix is singular; "
                          "choose distinct poles");
    ObserverGains gains;
    gains.L = (P * xlu.inverse()).transpose();

    const Eigen::MatrixXd A_cl = sys.A_C - gains.L * sys.C_C;
    Eigen::EigenSolver<Eigen::MatrixXd> eig(A_cl);
    if (!(eig.eigenvalues().real().maxCoeff() < 0.0))
        throw SolverError("design_observer_gains: placement failed to stabilize");

    const double l_norm = gains.L.jacobiSvd().singularValues()(0);
    const double c_norm = sys.C_C.jacobiSvd().singularValues()(0);
    if (!(l_norm > 0.0) || !(c_norm > 0.0))
        throw SolverError("design_observer_gains: degenerate injection direction");
    gains.K1 = (k1_scale / (c_norm * l_norm)) * gains.L;
    gains.K2 = (k2_scale / (c_norm * l_norm)) * gains.L;
    gains.mu1 = mu1;
    gains.mu2 = mu2;
    gains.boundary_layer = boundary_layer;
    gains.validate(m);
    return gains;
}

}  // namespace flexlink
