#include "flexlink/beam.hpp"
#include "flexlink/errors.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

using namespace flexlink;

namespace {

BeamParams table_beam() {
    BeamParams beam;
    beam.rho = 0.5;
    beam.length = 1.0;
    beam.EI = 1.0;
    beam.payload_mass = 0.0;
    beam.payload_inertia = 0.0;
    beam.hub_inertia = 0.002;
    beam.damping_ratio = 0.01;
    return beam;
}

ModalData table_overrides() {
    return {{20.53, 0.3214, 32.8184}};
}

// Same frequency equation as the implementation, refined by plain bisection
// instead of Brent.
double bisect_frequency_root(const BeamParams& beam, double lo, double hi) {
    auto g = [&](double beta) {
        const double bl = beta * beam.length;
        const double hub = beam.hub_inertia * beta * beta * beta / beam.rho;
        return std::sinh(bl) * std::cos(bl) - std::sin(bl) * std::cosh(bl) -
               hub * (1.0 + std::cos(bl) * std::cosh(bl));
    };
    double flo = g(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = g(mid);
        if (flo * fmid <= 0.0) hi = mid;
        else { lo = mid; flo = fmid; }
    }
    return 0.5 * (lo + hi);
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

}  // namespace

TEST_SUITE("beam") {

TEST_CASE("total inertia of the table beam") {
    const BeamParams beam = table_beam();
    CHECK(total_inertia(beam) == doctest::Approx(0.002 + 0.5 / 3.0).epsilon(1e-12));
    // rigid-body quadrature oracle: J_link = integral rho x^2 dx
    const double j_link = simpson([&](double x) { return beam.rho * x * x; },
                                  0.0, beam.length, 2000);
    CHECK(total_inertia(beam) == doctest::Approx(beam.hub_inertia + j_link).epsilon(1e-10));
}

TEST_CASE("total inertia degenerate cases") {
    BeamParams beam = table_beam();
    beam.rho = 1e-12;
    beam.payload_mass = 0.0;
    beam.payload_inertia = 0.0;
    CHECK(total_inertia(beam) == doctest::Approx(beam.hub_inertia).epsilon(1e-9));

    BeamParams point = table_beam();
    point.rho = 1e-12;
    point.hub_inertia = 1e-12;
    point.payload_mass = 1.0;
    point.payload_inertia = 0.25;
    CHECK(total_inertia(point) == doctest::Approx(1.0 + 0.25).epsilon(1e-9));
}

TEST_CASE("frequency override takes precedence") {
    const ModalData overrides = table_overrides();
    const ModalData modal = solve_modal_data(table_beam(), 1, &overrides);
    CHECK(modal[0].omega == 20.53);  // bit-identical pass-through
    CHECK(modal[0].phi_l == 0.3214);
    CHECK(modal[0].phi_prime_0 == 32.8184);
}

TEST_CASE("EI scaling law: omega proportional to sqrt(EI)") {
    BeamParams beam = table_beam();
    const auto base = solve_mode_frequencies(beam, 3);
    beam.EI *= 4.0;
    const auto scaled = solve_mode_frequencies(beam, 3);
    for (size_t j = 0; j < base.size(); ++j)
        CHECK(scaled[j] == doctest::Approx(2.0 * base[j]).epsilon(1e-9));
}

TEST_CASE("solver root agrees with a bisection oracle") {
    const BeamParams beam = table_beam();
    const auto omegas = solve_mode_frequencies(beam, 2);
    // independent bracket + bisection on the same transcendental equation
    const double beta1 = bisect_frequency_root(beam, 3.0, 4.5);
    const double beta2 = bisect_frequency_root(beam, 6.0, 8.0);
    const double scale = std::sqrt(beam.EI / beam.rho);
    CHECK(omegas[0] == doctest::Approx(beta1 * beta1 * scale).epsilon(1e-8));
    CHECK(omegas[1] == doctest::Approx(beta2 * beta2 * scale).epsilon(1e-8));
}

TEST_CASE("solver regression fixtures for the table beam") {
    const BeamParams beam = table_beam();
    const auto omegas = solve_mode_frequencies(beam, 2);
    CHECK(omegas[0] == doctest::Approx(20.53253530134143).epsilon(1e-9));
    CHECK(omegas[1] == doctest::Approx(55.88025985573296).epsilon(1e-9));

    const auto [phi_l2, phi_p2] = mode_shape_boundary_values(beam, 2);
    CHECK(phi_l2 == doctest::Approx(3.08465439162228).epsilon(1e-9));
    CHECK(phi_p2 == doctest::Approx(19.4620959544045).epsilon(1e-9));
}

TEST_CASE("mode shapes are mass-normalized with positive base slope") {
    const BeamParams beam = table_beam();
    for (int j = 1; j <= 2; ++j) {
        const ModeShape shape = solve_mode_shape(beam, j);
        const double norm = simpson(
            [&](double x) { const double v = shape.value(x); return beam.rho * v * v; },
            0.0, beam.length, 4000);
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(shape.slope(0.0) > 0.0);
        CHECK(std::abs(shape.value(0.0)) < 1e-10);  // hinged root
    }
}

TEST_CASE("degenerate normalization is rejected") {
    ModeShape zero;
    zero.beta = 1.0;
    zero.omega = 1.0;
    const BeamParams beam = table_beam();
    CHECK_THROWS_AS(normalize_mode_shape(zero, beam), std::invalid_argument);
}

TEST_CASE("build_plant reproduces override entries bit-identically") {
    const BeamParams beam = table_beam();
    const ModalData overrides = table_overrides();
    const auto modal = solve_modal_data(beam, 1, &overrides);
    const StateSpacePlant plant = build_plant(beam, modal, 1);

    CHECK(plant.dim() == 4);
    CHECK(plant.A(2, 3) == 1.0);
    CHECK(plant.A(3, 2) == -(20.53 * 20.53));
    CHECK(plant.A(3, 3) == -2.0 * 0.01 * 20.53);
    CHECK(plant.A(3, 2) == doctest::Approx(-421.4809).epsilon(1e-10));
    CHECK(plant.A(3, 3) == doctest::Approx(-0.4106).epsilon(1e-10));

    CHECK(plant.B(0) == 0.0);
    CHECK(plant.B(1) == 1.0 / total_inertia(beam));
    CHECK(plant.B(2) == 0.0);
    CHECK(plant.B(3) == 32.8184);

    CHECK(plant.C(0, 0) == 1.0);
    CHECK(plant.C(0, 2) == 0.3214 / beam.length);
    CHECK(plant.C(1, 0) == 1.0);
    CHECK(plant.C(1, 2) == 32.8184);
}

TEST_CASE("build_plant input validation") {
    const BeamParams beam = table_beam();
    const ModalData overrides = table_overrides();
    const auto modal = solve_modal_data(beam, 1, &overrides);
    CHECK_THROWS_AS(build_plant(beam, modal, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_plant(beam, modal, 2), std::invalid_argument);
}

TEST_CASE("plant block eigenstructure") {
    const BeamParams beam = table_beam();
    const ModalData overrides = table_overrides();
    const auto modal = solve_modal_data(beam, 2, &overrides);
    const StateSpacePlant plant = build_plant(beam, modal, 2);

    // theta block is a pure double integrator
    Eigen::Matrix2d theta_block = plant.A.topLeftCorner(2, 2);
    CHECK(theta_block(0, 0) == 0.0);
    CHECK(theta_block(0, 1) == 1.0);
    CHECK(theta_block(1, 0) == 0.0);
    CHECK(theta_block(1, 1) == 0.0);

    for (int j = 0; j < 2; ++j) {
        const int r = 2 + 2 * j;
        Eigen::Matrix2d block = plant.A.block(r, r, 2, 2);
        Eigen::EigenSolver<Eigen::Matrix2d> es(block);
        const double omega = modal[j].omega;
        for (int k = 0; k < 2; ++k) {
            CHECK(es.eigenvalues()(k).real() ==
                  doctest::Approx(-beam.damping_ratio * omega).epsilon(1e-10));
            CHECK(std::abs(es.eigenvalues()(k)) == doctest::Approx(omega).epsilon(1e-10));
        }
    }
}

TEST_CASE("output map examples and linearity") {
    const BeamParams beam = table_beam();
    const ModalData overrides = table_overrides();
    const auto modal = solve_modal_data(beam, 1, &overrides);
    const StateSpacePlant plant = build_plant(beam, modal, 1);

    Eigen::VectorXd psi = Eigen::VectorXd::Zero(4);
    psi(0) = 0.37;
    Eigen::Vector2d g = output_map(plant, psi);
    CHECK(g(0) == doctest::Approx(0.37).epsilon(1e-14));
    CHECK(g(1) == doctest::Approx(0.37).epsilon(1e-14));

    psi.setZero();
    psi(2) = 0.25;
    g = output_map(plant, psi);
    CHECK(g(0) == doctest::Approx(0.3214 * 0.25).epsilon(1e-12));

    psi.setZero();
    psi(0) = 0.5;
    psi(2) = 0.1;
    g = output_map(plant, psi);
    CHECK(g(0) == doctest::Approx(0.53214).epsilon(1e-12));
    CHECK(g(1) == doctest::Approx(0.5 + 3.28184).epsilon(1e-12));

    std::mt19937 rng(42);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd a(4), b(4);
        for (int i = 0; i < 4; ++i) { a(i) = dist(rng); b(i) = dist(rng); }
        const double ca = dist(rng), cb = dist(rng);
        const Eigen::Vector2d lhs = output_map(plant, ca * a + cb * b);
        const Eigen::Vector2d rhs = ca * output_map(plant, a) + cb * output_map(plant, b);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }

    CHECK_THROWS_AS(output_map(plant, Eigen::VectorXd::Zero(6)), std::invalid_argument);
}

TEST_CASE("table plant is controllable") {
    const BeamParams beam = table_beam();
    const ModalData overrides = table_overrides();
    const auto modal = solve_modal_data(beam, 1, &overrides);
    const StateSpacePlant plant = build_plant(beam, modal, 1);

    Eigen::MatrixXd W(4, 4);
    W.col(0) = plant.B;
    for (int k = 1; k < 4; ++k) W.col(k) = plant.A * W.col(k - 1);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < 4; ++i)
        if (sv(i) > 1e-8 * sv(0)) ++rank;
    CHECK(rank == 4);
    CHECK(sv(3) > 0.0);
    MESSAGE("controllability smallest singular value: ", sv(3));
}

TEST_CASE("beam params json round trip") {
    const BeamParams beam = table_beam();
    const BeamParams back = beam_from_json(beam_to_json(beam));
    CHECK(back.rho == beam.rho);
    CHECK(back.length == beam.length);
    CHECK(back.EI == beam.EI);
    CHECK(back.hub_inertia == beam.hub_inertia);
    CHECK(back.damping_ratio == beam.damping_ratio);

    const ModalData overrides = {{20.53, 0.3214, 32.8184}, {55.0, 3.0, 19.0}};
    const ModalData back_ovr = modal_overrides_from_json(modal_overrides_to_json(overrides));
    REQUIRE(back_ovr.size() == 2);
    CHECK(back_ovr[1].omega == 55.0);
    CHECK(back_ovr[0].phi_prime_0 == 32.8184);
}

TEST_CASE("matrix csv export") {
    Eigen::MatrixXd mat(2, 3);
    mat << 1, 2.5, -3, 0.125, 0, 1e-17;
    std::ostringstream os;
    write_matrix_csv(os, mat);
    CHECK(os.str() == "1,2.5,-3\n0.125,0,1.0000000000000001e-17\n");
}

TEST_CASE("invalid beam parameters are rejected by field") {
    BeamParams beam = table_beam();
    beam.rho = -1.0;
    CHECK_THROWS_WITH_AS(beam.validate(), "BeamParams.rho must be > 0",
                         std::invalid_argument);
    beam = table_beam();
    beam.damping_ratio = 1.0;
    CHECK_THROWS_AS(beam.validate(), std::invalid_argument);
}

TEST_CASE("frequency solver failure reports bracketing exhaustion") {
    // a huge hub inertia pushes the first root beyond the scan window only if
    // parameters are non-physical; n_modes = 0 is the direct precondition
    CHECK_THROWS_AS(solve_mode_frequencies(table_beam(), 0), std::invalid_argument);
}

}  // TEST_SUITE
