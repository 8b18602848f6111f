#pragma once

#include <Eigen/Dense>

#include <array>

namespace flexlink {

/// Gains of the nested non-singular terminal sliding-mode law.
struct ControllerGains {
    std::array<double, 3> alpha{5.0, 5.0, 5.0};   ///< linear surface gains [1/s]
    std::array<double, 3> kappa1{2.0, 2.0, 2.0};  ///< sub-unity-map gains
    std::array<double, 3> kappa2{2.0, 2.0, 2.0};  ///< high-power gains
    double gamma1 = 0.6;         ///< sub-unity exponent, in (0, 1)
    double gamma2 = 2.0;         ///< high-power exponent, > 1
    double eps = 0.01;           ///< sub-unity regularization
    double c1 = 5.0;             ///< reaching gain, low power
    double c2 = 5.0;             ///< reaching gain, high power
    double p = 0.6;              ///< reaching exponent, in (0, 1)
    double q = 1.5;              ///< reaching exponent, > 1
    double eta = 0.6;            ///< switching gain, > dist_bound
    double dist_bound = 0.5;     ///< assumed matched-disturbance bound
    double boundary_layer = 1e-3;  ///< sign regularization width; 0 = pure sign
    double saturation = 50.0;    ///< torque limit applied by the simulator [N m]

    void validate() const;
};

/// Recursive sliding surfaces evaluated at one state; s3_dot_partial is the
/// total time-derivative of s3 with the plant's top-channel derivative zeroed,
/// i.e. the feed-forward term Phi with s3' = f(z) + u + delta + Phi.
struct SurfaceStack {
    std::array<double, 4> s{};
    double s3_dot_partial = 0.0;
};

/// Smooth sub-unity map x (x^2 + eps^2)^((gamma1-1)/2).
double phi_eps(double x, double gamma1, double eps);

/// Analytic first/second derivative of phi_eps (order in {1, 2}).
double phi_eps_derivative(double x, double gamma1, double eps, int order);

/// |x|^p sgn(x) with the convention 0 -> 0.
double signed_power(double x, double p);

/// sgn(x) when width == 0, else the boundary-layer form x / (|x| + width).
double regularized_sign(double x, double width);

/// Builds s_0..s_3 and the feed-forward term for a regulation target z_d
/// (desired chain state, constant in time).
SurfaceStack build_surfaces(const Eigen::Vector4d& z, const Eigen::Vector4d& z_d,
                            const ControllerGains& gains);

/// Feed-forward term Phi(t, z) alone.
double feedforward_phi(const Eigen::Vector4d& z, const Eigen::Vector4d& z_d,
                       const ControllerGains& gains);

/// Control input u = -f(z) - Phi - c1 |s3|^p sgn s3 - c2 |s3|^q sgn s3
/// - eta sgn_reg(s3), with f(z) = -f . z from the companion coefficients.
/// Throws on non-finite state.
double control_law(const Eigen::Vector4d& z_hat, const Eigen::Vector4d& z_d,
                   const ControllerGains& gains, const Eigen::VectorXd& f_coeffs);

/// Analytic settling bounds per surface stage plus totals. `stage` holds the
/// formulas as stated (plain gains); `stage_lyapunov` the conservative
/// Lyapunov-level variant with the eps-dependent effective gain folded in.
struct SettlingBounds {
    std::array<double, 4> stage{};
    std::array<double, 4> stage_lyapunov{};
    double total = 0.0;
    double total_lyapunov = 0.0;
};

SettlingBounds settling_bound_controller(const ControllerGains& gains);

/// PD comparison law on the measured tip angle.
double pd_baseline(double theta_t, double theta_t_dot_est, double theta_d,
                   double kp, double kd);

struct PdGains {
    double kp = 0.6;
    double kd = 0.3;
    double filter_tau = 0.05;  ///< dirty-derivative time constant [s]

    void validate() const;
};

/// First-order filtered differentiator; owns per-run state.
class FilteredDerivative {
  public:
    explicit FilteredDerivative(double tau = 0.05) : tau_(tau) {}

    double step(double x, double dt) {
        if (!primed_) {
            filtered_ = x;
            primed_ = true;
            return 0.0;
        }
        const double deriv = (x - filtered_) / tau_;
        filtered_ += dt * deriv;
        return deriv;
    }

    void reset() { primed_ = false; filtered_ = 0.0; }

  private:
    double tau_;
    double filtered_ = 0.0;
    bool primed_ = false;
};

}  // namespace flexlink
