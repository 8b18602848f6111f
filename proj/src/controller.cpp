#include "flexlink/controller.hpp"

#include "flexlink/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace flexlink {

namespace {

// Truncated Taylor series in t (coefficients a_k = x^(k)/k!) used to push the
// exact time derivatives of the error chain through the recursive surface
// definition. `ord` is the highest coefficient still valid.
struct Jet {
    std::array<double, 5> a{};
    int ord = 4;
};

Jet jet_add(const Jet& x, const Jet& y) {
    Jet r;
    r.ord = std::min(x.ord, y.ord);
    for (int k = 0; k <= r.ord; ++k) r.a[k] = x.a[k] + y.a[k];
    return r;
}

Jet jet_scale(const Jet& x, double s) {
    Jet r = x;
    for (int k = 0; k <= r.ord; ++k) r.a[k] *= s;
    return r;
}

Jet jet_mul(const Jet& x, const Jet& y) {
    Jet r;
    r.ord = std::min(x.ord, y.ord);
    for (int k = 0; k <= r.ord; ++k) {
        double sum = 0.0;
        for (int j = 0; j <= k; ++j) sum += x.a[j] * y.a[k - j];
        r.a[k] = sum;
    }
    return r;
}

Jet jet_shift(const Jet& x, double c) {
    Jet r = x;
    r.a[0] += c;
    return r;
}

// d/dt: one order is consumed.
Jet jet_derivative(const Jet& x) {
    Jet r;
    r.ord = x.ord - 1;
    for (int k = 0; k <= r.ord; ++k) r.a[k] = (k + 1) * x.a[k + 1];
    return r;
}

// w = u^alpha for u.a[0] > 0, standard power-series recurrence.
Jet jet_pow(const Jet& u, double alpha) {
    Jet w;
    w.ord = u.ord;
    w.a[0] = std::pow(u.a[0], alpha);
    for (int k = 1; k <= w.ord; ++k) {
        double sum = 0.0;
        for (int m = 1; m <= k; ++m)
            sum += ((alpha + 1.0) * m - k) * u.a[m] * w.a[k - m];
        w.a[k] = sum / (k * u.a[0]);
    }
    return w;
}

// phi_eps on a jet: x (x^2 + eps^2)^((gamma1-1)/2); base always positive.
Jet jet_phi_eps(const Jet& x, double gamma1, double eps) {
    const Jet u = jet_shift(jet_mul(x, x), eps * eps);
    return jet_mul(x, jet_pow(u, 0.5 * (gamma1 - 1.0)));
}

// |x|^gamma sgn(x) = x (x^2)^((gamma-1)/2). Higher derivatives blow up at the
// origin, so the jet is clamped to zero inside a negligible neighbourhood.
Jet jet_signed_power(const Jet& x, double gamma) {
    if (std::abs(x.a[0]) < 1e-12) {
        Jet zero;
        zero.ord = x.ord;
        return zero;
    }
    return jet_mul(x, jet_pow(jet_mul(x, x), 0.5 * (gamma - 1.0)));
}

Jet surface_terms(const Jet& s, double alpha, double kappa1, double kappa2,
                  const ControllerGains& g) {
    Jet r = jet_scale(s, alpha);
    r = jet_add(r, jet_scale(jet_phi_eps(s, g.gamma1, g.eps), kappa1));
    r = jet_add(r, jet_scale(jet_signed_power(s, g.gamma2), kappa2));
    return r;
}

}  // namespace

void ControllerGains::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("ControllerGains: ") + what);
    };
    for (int i = 0; i < 3; ++i) {
        require(alpha[i] > 0.0, "alpha gains must be > 0");
        require(kappa1[i] > 0.0, "kappa1 gains must be > 0");
        require(kappa2[i] > 0.0, "kappa2 gains must be > 0");
    }
    require(gamma1 > 0.0 && gamma1 < 1.0, "gamma1 must be in (0, 1)");
    require(gamma2 > 1.0, "gamma2 must be > 1");
    require(eps > 0.0, "eps must be > 0");
    require(c1 > 0.0 && c2 > 0.0, "c1, c2 must be > 0");
    require(p > 0.0 && p < 1.0, "p must be in (0, 1)");
    require(q > 1.0, "q must be > 1");
    require(eta > 0.0, "eta must be > 0");
    require(dist_bound >= 0.0, "dist_bound must be >= 0");
    require(eta > dist_bound, "eta must exceed dist_bound");
    require(boundary_layer >= 0.0, "boundary_layer must be >= 0");
    require(saturation > 0.0, "saturation must be > 0");
}

double phi_eps(double x, double gamma1, double eps) {
    return x * std::pow(x * x + eps * eps, 0.5 * (gamma1 - 1.0));
}

double phi_eps_derivative(double x, double gamma1, double eps, int order) {
    const double r = x * x + eps * eps;
    const double a = 0.5 * (gamma1 - 1.0);
    if (order == 1)
        return std::pow(r, a - 1.0) * (gamma1 * x * x + eps * eps);
    if (order == 2)
        return 2.0 * a * x * std::pow(r, a - 2.0) * (gamma1 * x * x + 3.0 * eps * eps);
    throw std::invalid_argument("phi_eps_derivative supports orders 1 and 2");
}

double signed_power(double x, double p) {
    if (x == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(x), p), x);
}

double regularized_sign(double x, double width) {
    if (width <= 0.0) return (x > 0.0) - (x < 0.0);
    return x / (std::abs(x) + width);
}

SurfaceStack build_surfaces(const Eigen::Vector4d& z, const Eigen::Vector4d& z_d,
                            const ControllerGains& gains) {
    // Error chain derivatives through the integrator structure; the unknown
    // top-channel derivative (f + u + delta) enters linearly with unit
    // coefficient and is zeroed here, so the order-1 coefficient of the final
    // jet is exactly Phi.
    Jet s;
    s.ord = 4;
    const Eigen::Vector4d e = z - z_d;
    s.a = {e(0), e(1), e(2) / 2.0, e(3) / 6.0, 0.0};

    SurfaceStack stack;
    for (int i = 0; i < 3; ++i) {
        stack.s[i] = s.a[0];
        const Jet terms = surface_terms(s, gains.alpha[i], gains.kappa1[i],
                                        gains.kappa2[i], gains);
        s = jet_add(jet_derivative(s), terms);
    }
    stack.s[3] = s.a[0];
    stack.s3_dot_partial = s.a[1];
    return stack;
}

double feedforward_phi(const Eigen::Vector4d& z, const Eigen::Vector4d& z_d,
                       const ControllerGains& gains) {
    return build_surfaces(z, z_d, gains).s3_dot_partial;
}

double control_law(const Eigen::Vector4d& z_hat, const Eigen::Vector4d& z_d,
                   const ControllerGains& gains, const Eigen::VectorXd& f_coeffs) {
    if (!z_hat.allFinite() || !z_d.allFinite())
        throw std::invalid_argument("control_law: non-finite state");
    if (f_coeffs.size() != 4)
        throw std::invalid_argument("control_law: expected 4 characteristic coefficients");

    const SurfaceStack stack = build_surfaces(z_hat, z_d, gains);
    const double s3 = stack.s[3];
    const double f_z = -f_coeffs.dot(z_hat);
    const double u = -f_z - stack.s3_dot_partial
                     - gains.c1 * signed_power(s3, gains.p)
                     - gains.c2 * signed_power(s3, gains.q)
                     - gains.eta * regularized_sign(s3, gains.boundary_layer);
    if (!std::isfinite(u))
        throw std::runtime_error("control_law produced a non-finite input");
    return u;
}

SettlingBounds settling_bound_controller(const ControllerGains& g) {
    SettlingBounds b;
    const double c_eps = std::pow(g.eps, g.gamma1 - 1.0);
    for (int i = 0; i < 3; ++i) {
        b.stage[i] = 1.0 / (g.kappa1[i] * (1.0 - g.gamma1)) +
                     1.0 / (g.kappa2[i] * (g.gamma2 - 1.0));
        const double a_i = g.kappa1[i] * c_eps * std::pow(2.0, -0.5 * (g.gamma1 + 1.0));
        const double b_i = g.kappa2[i] * std::pow(2.0, -0.5 * (g.gamma2 + 1.0));
        const double alpha_i = 0.5 * (g.gamma1 + 1.0);
        const double beta_i = 0.5 * (g.gamma2 + 1.0);
        b.stage_lyapunov[i] = 1.0 / (a_i * (1.0 - alpha_i)) + 1.0 / (b_i * (beta_i - 1.0));
    }
    b.stage[3] = 1.0 / (g.c1 * (1.0 - g.p)) + 1.0 / (g.c2 * (g.q - 1.0));
    {
        const double a3 = g.c1 * std::pow(2.0, -0.5 * (g.p + 1.0));
        const double b3 = g.c2 * std::pow(2.0, -0.5 * (g.q + 1.0));
        const double alpha3 = 0.5 * (g.p + 1.0);
        const double beta3 = 0.5 * (g.q + 1.0);
        b.stage_lyapunov[3] = 1.0 / (a3 * (1.0 - alpha3)) + 1.0 / (b3 * (beta3 - 1.0));
    }
    for (int i = 0; i < 4; ++i) {
        b.total += b.stage[i];
        b.total_lyapunov += b.stage_lyapunov[i];
    }
    return b;
}

double pd_baseline(double theta_t, double theta_t_dot_est, double theta_d,
                   double kp, double kd) {
    if (!(kp > 0.0) || !(kd >= 0.0))
        throw std::invalid_argument("pd_baseline: kp must be > 0 and kd >= 0");
    return kp * (theta_d - theta_t) - kd * theta_t_dot_est;
}

void PdGains::validate() const {
    if (!(kp > 0.0)) throw std::invalid_argument("PdGains.kp must be > 0");
    if (!(kd > 0.0)) throw std::invalid_argument("PdGains.kd must be > 0");
    if (!(filter_tau > 0.0)) throw std::invalid_argument("PdGains.filter_tau must be > 0");
}

}  // namespace flexlink
