#include "flexlink/beam.hpp"

#include "flexlink/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>

namespace flexlink {

namespace {

// 5-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGaussNode[5] = {
    -0.9061798459386640, -0.5384693101056831, 0.0,
    0.5384693101056831, 0.9061798459386640};
constexpr double kGaussWeight[5] = {
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
    0.4786286704993665, 0.2369268850561891};

double integrate(const std::function<double(double)>& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double mid = a + (i + 0.5) * h;
        for (int k = 0; k < 5; ++k)
            sum += kGaussWeight[k] * f(mid + 0.5 * h * kGaussNode[k]);
    }
    return 0.5 * h * sum;
}

// Frequency equation of the hinged-free link with hub inertia, scaled by
// cosh(beta*l) to stay bounded for large arguments:
//   tanh(bl) cos(bl) - sin(bl) - (J0 b^3 / rho) (sech(bl) + cos(bl)) = 0
double frequency_equation(const BeamParams& beam, double beta) {
    const double bl = beta * beam.length;
    const double hub = beam.hub_inertia * beta * beta * beta / beam.rho;
    return std::tanh(bl) * std::cos(bl) - std::sin(bl) -
           hub * (1.0 / std::cosh(bl) + std::cos(bl));
}

// Brent root refinement on a sign-changing bracket.
double brent(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    double fa = f(a), fb = f(b);
    if (fa * fb > 0.0) throw SolverError("brent: endpoints do not bracket a root");
    if (std::abs(fa) < std::abs(fb)) { std::swap(a, b); std::swap(fa, fb); }
    double c = a, fc = fa, s = b, d = b - a;
    bool mflag = true;
    for (int iter = 0; iter < 200; ++iter) {
        if (fb == 0.0 || std::abs(b - a) <= rel_tol * std::max(1.0, std::abs(b)))
            return b;
        double fs;
        if (fa != fc && fb != fc) {
            s = a * fb * fc / ((fa - fb) * (fa - fc)) +
                b * fa * fc / ((fb - fa) * (fb - fc)) +
                c * fa * fb / ((fc - fa) * (fc - fb));
        } else {
            s = b - fb * (b - a) / (fb - fa);
        }
        const double lo = (3.0 * a + b) / 4.0;
        const bool out = (s < std::min(lo, b) || s > std::max(lo, b));
        const bool bisect = out ||
            (mflag && std::abs(s - b) >= std::abs(b - c) / 2.0) ||
            (!mflag && std::abs(s - b) >= std::abs(c - d) / 2.0);
        if (bisect) { s = 0.5 * (a + b); mflag = true; } else { mflag = false; }
        fs = f(s);
        d = c; c = b; fc = fb;
        if (fa * fs < 0.0) { b = s; fb = fs; } else { a = s; fa = fs; }
        if (std::abs(fa) < std::abs(fb)) { std::swap(a, b); std::swap(fa, fb); }
    }
    return b;
}

std::vector<double> solve_betas(const BeamParams& beam, int n_modes) {
    beam.validate();
    if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
    auto g = [&beam](double beta) { return frequency_equation(beam, beta); };

    std::vector<double> betas;
    const double step = M_PI / (16.0 * beam.length);
    const double beta_max = (2.0 * n_modes + 6.0) * M_PI / beam.length;
    double lo = 0.25 * step;
    double glo = g(lo);
    for (double hi = lo + step; hi <= beta_max && (int)betas.size() < n_modes; hi += step) {
        const double ghi = g(hi);
        if (glo == 0.0) betas.push_back(lo);
        else if (glo * ghi < 0.0) betas.push_back(brent(g, lo, hi, 1e-12));
        lo = hi;
        glo = ghi;
    }
    if ((int)betas.size() < n_modes)
        throw SolverError("frequency equation bracketing exhausted its search interval; "
                          "check beam parameters");
    return betas;
}

ModeShape shape_from_beta(const BeamParams& beam, double beta) {
    const double bl = beta * beam.length;
    const double S = std::sin(bl), C = std::cos(bl);
    const double Sh = std::sinh(bl), Ch = std::cosh(bl);
    const double mu = beam.hub_inertia * beta * beta * beta / (2.0 * beam.rho);

    // Two dependent homogeneous equations in (a, c); pick the better-scaled row.
    const double r1[2] = {-S - mu * (C + Ch), Sh - mu * (C + Ch)};
    const double r2[2] = {-C + mu * (S - Sh), Ch + mu * (S - Sh)};
    const double* row = (std::abs(r1[0]) + std::abs(r1[1]) >=
                         std::abs(r2[0]) + std::abs(r2[1])) ? r1 : r2;

    ModeShape shape;
    shape.beta = beta;
    shape.omega = beta * beta * std::sqrt(beam.EI / beam.rho);
    shape.a = row[1];
    shape.c = -row[0];
    shape.b = mu * (shape.a + shape.c);
    shape.d = -shape.b;
    return shape;
}

}  // namespace

void BeamParams::validate() const {
    auto bad = [](const char* field, const char* cond) {
        throw std::invalid_argument(std::string("BeamParams.") + field + " must be " + cond);
    };
    if (!(rho > 0.0)) bad("rho", "> 0");
    if (!(length > 0.0)) bad("length", "> 0");
    if (!(EI > 0.0)) bad("EI", "> 0");
    if (!(payload_mass >= 0.0)) bad("payload_mass", ">= 0");
    if (!(payload_inertia >= 0.0)) bad("payload_inertia", ">= 0");
    if (!(hub_inertia > 0.0)) bad("hub_inertia", "> 0");
    if (!(damping_ratio >= 0.0 && damping_ratio < 1.0)) bad("damping_ratio", "in [0, 1)");
}

double ModeShape::value(double x) const {
    return a * std::sin(beta * x) + b * std::cos(beta * x) +
           c * std::sinh(beta * x) + d * std::cosh(beta * x);
}

double ModeShape::slope(double x) const {
    return beta * (a * std::cos(beta * x) - b * std::sin(beta * x) +
                   c * std::cosh(beta * x) + d * std::sinh(beta * x));
}

double total_inertia(const BeamParams& beam) {
    beam.validate();
    const double l = beam.length;
    return beam.hub_inertia + beam.rho * l * l * l / 3.0 +
           beam.payload_mass * l * l + beam.payload_inertia;
}

std::vector<double> solve_mode_frequencies(const BeamParams& beam, int n_modes) {
    const auto betas = solve_betas(beam, n_modes);
    std::vector<double> omegas(betas.size());
    const double scale = std::sqrt(beam.EI / beam.rho);
    for (size_t i = 0; i < betas.size(); ++i) omegas[i] = betas[i] * betas[i] * scale;
    return omegas;
}

void normalize_mode_shape(ModeShape& shape, const BeamParams& beam) {
    const double norm2 = integrate(
        [&](double x) { const double v = shape.value(x); return beam.rho * v * v; },
        0.0, beam.length, 200);
    if (!(norm2 > 1e-300) || !std::isfinite(norm2))
        throw std::invalid_argument("mode shape normalization constant is zero or invalid");
    double scale = 1.0 / std::sqrt(norm2);
    if (shape.slope(0.0) < 0.0) scale = -scale;  // sign convention: phi'(0) > 0
    shape.a *= scale;
    shape.b *= scale;
    shape.c *= scale;
    shape.d *= scale;
}

ModeShape solve_mode_shape(const BeamParams& beam, int mode_index) {
    if (mode_index < 1) throw std::invalid_argument("mode_index must be >= 1");
    const auto betas = solve_betas(beam, mode_index);
    ModeShape shape = shape_from_beta(beam, betas[mode_index - 1]);
    normalize_mode_shape(shape, beam);
    return shape;
}

std::pair<double, double> mode_shape_boundary_values(const BeamParams& beam, int mode_index) {
    const ModeShape shape = solve_mode_shape(beam, mode_index);
    return {shape.value(beam.length), shape.slope(0.0)};
}

ModalData solve_modal_data(const BeamParams& beam, int n_modes, const ModalData* overrides) {
    if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
    ModalData modes;
    modes.reserve(n_modes);
    for (int j = 1; j <= n_modes; ++j) {
        if (overrides && (int)overrides->size() >= j) {
            modes.push_back((*overrides)[j - 1]);
        } else {
            const ModeShape shape = solve_mode_shape(beam, j);
            modes.push_back({shape.omega, shape.value(beam.length), shape.slope(0.0)});
        }
    }
    for (int j = 0; j < n_modes; ++j) {
        if (!(modes[j].omega > 0.0))
            throw std::invalid_argument("modal frequency must be positive");
        if (j > 0 && !(modes[j].omega > modes[j - 1].omega))
            throw std::invalid_argument("modal frequencies must be strictly increasing");
    }
    return modes;
}

StateSpacePlant build_plant(const BeamParams& beam, const ModalData& modes, int n_modes) {
    beam.validate();
    if (n_modes < 1)
        throw std::invalid_argument("build_plant requires n_modes >= 1 (rigid-only model unsupported)");
    if ((int)modes.size() < n_modes)
        throw std::invalid_argument("modal data has fewer entries than n_modes");

    StateSpacePlant plant;
    plant.n_modes = n_modes;
    plant.total_inertia = total_inertia(beam);
    const int m = plant.dim();
    plant.A = Eigen::MatrixXd::Zero(m, m);
    plant.B = Eigen::VectorXd::Zero(m);
    plant.C = Eigen::MatrixXd::Zero(2, m);

    plant.A(0, 1) = 1.0;
    plant.B(1) = 1.0 / plant.total_inertia;
    plant.C(0, 0) = 1.0;
    plant.C(1, 0) = 1.0;

    const double zeta = beam.damping_ratio;
    for (int j = 0; j < n_modes; ++j) {
        const int r = 2 + 2 * j;
        const double omega = modes[j].omega;
        plant.A(r, r + 1) = 1.0;
        plant.A(r + 1, r) = -(omega * omega);
        plant.A(r + 1, r + 1) = -2.0 * zeta * omega;
        plant.B(r + 1) = modes[j].phi_prime_0;
        plant.C(0, r) = modes[j].phi_l / beam.length;
        plant.C(1, r) = modes[j].phi_prime_0;
    }
    return plant;
}

Eigen::Vector2d output_map(const StateSpacePlant& plant, const Eigen::VectorXd& psi) {
    if (psi.size() != plant.dim())
        throw std::invalid_argument("state dimension does not match plant");
    return plant.C * psi;
}

BeamParams beam_from_json(const nlohmann::json& j) {
    BeamParams beam;
    beam.rho = j.at("rho").get<double>();
    beam.length = j.at("length").get<double>();
    beam.EI = j.at("EI").get<double>();
    beam.payload_mass = j.value("payload_mass", 0.0);
    beam.payload_inertia = j.value("payload_inertia", 0.0);
    beam.hub_inertia = j.at("hub_inertia").get<double>();
    beam.damping_ratio = j.value("damping_ratio", 0.01);
    beam.validate();
    return beam;
}

nlohmann::json beam_to_json(const BeamParams& beam) {
    return nlohmann::json{
        {"rho", beam.rho},
        {"length", beam.length},
        {"EI", beam.EI},
        {"payload_mass", beam.payload_mass},
        {"payload_inertia", beam.payload_inertia},
        {"hub_inertia", beam.hub_inertia},
        {"damping_ratio", beam.damping_ratio}};
}

ModalData modal_overrides_from_json(const nlohmann::json& j) {
    ModalData modes;
    for (const auto& entry : j) {
        ModeData mode;
        mode.omega = entry.at("omega").get<double>();
        mode.phi_l = entry.at("phi_l").get<double>();
        mode.phi_prime_0 = entry.at("phi_prime_0").get<double>();
        modes.push_back(mode);
    }
    return modes;
}

nlohmann::json modal_overrides_to_json(const ModalData& modes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& mode : modes)
        arr.push_back({{"omega", mode.omega},
                       {"phi_l", mode.phi_l},
                       {"phi_prime_0", mode.phi_prime_0}});
    return arr;
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& mat) {
    char buf[32];
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", mat(i, j));
            os << buf << (j + 1 < mat.cols() ? "," : "");
        }
        os << "\n";
    }
}

}  // namespace flexlink
