#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "ponder/dynamics.hpp"
#include "ponder/error.hpp"

using namespace ponder;

namespace {

using cd = std::complex<double>;
const double kInf = std::numeric_limits<double>::infinity();

DynamicsParams reference() {
    DynamicsParams p;
    p.omega = 1.0;
    p.g = 0.5;
    p.gamma = 0.2;
    p.beta = 1.0;
    return p;
}

MeterMatrix annihilation(int n) {
    MeterMatrix c = MeterMatrix::Zero(n, n);
    for (int k = 1; k < n; ++k) c(k - 1, k) = std::sqrt(static_cast<double>(k));
    return c;
}

// D(alpha) rho_th D(alpha)^dagger via a dense matrix exponential in a much
// larger space, cropped to the requested cutoff.
MeterMatrix displaced_thermal_expm(cd alpha, double beta, int cut) {
    const int big = cut + 80;
    const MeterMatrix c = annihilation(big);
    const MeterMatrix gen = alpha * c.adjoint() - std::conj(alpha) * c;
    const MeterMatrix d = gen.exp();
    MeterMatrix th = MeterMatrix::Zero(big, big);
    for (int k = 0; k < big; ++k) {
        th(k, k) = std::isinf(beta) ? (k == 0 ? 1.0 : 0.0) : -std::expm1(-beta) * std::exp(-k * beta);
    }
    const MeterMatrix rho = d * th * d.adjoint();
    return rho.topLeftCorner(cut + 1, cut + 1);
}

// Literal operator form of the meter master equation on the truncated space.
MeterMatrix derivative_dense(const DynamicsParams& p, int ket, int bra, const MeterMatrix& rho) {
    const int n = static_cast<int>(rho.rows());
    const MeterMatrix c = annihilation(n);
    const MeterMatrix cd_ = c.adjoint();
    const MeterMatrix x = (c + cd_) / std::numbers::sqrt2;
    const MeterMatrix pq = cd(0, -1) * (c - cd_) / std::numbers::sqrt2;
    const MeterMatrix num = cd_ * c;
    const MeterMatrix hn = p.omega * num + p.g * ket * (c + cd_);
    const MeterMatrix hm = p.omega * num + p.g * bra * (c + cd_);
    const cd i(0, 1);
    const MeterMatrix anti = pq * rho + rho * pq;
    const MeterMatrix comm = x * rho - rho * x;
    return -i * (hn * rho - rho * hm) - i * (p.gamma / 2) * (x * anti - anti * x) -
           p.diffusion_coefficient() * (x * comm - comm * x);
}

double position_mean(const MeterMatrix& rho) {
    const int n = static_cast<int>(rho.rows());
    const MeterMatrix c = annihilation(n);
    const MeterMatrix x = (c + c.adjoint()) / std::numbers::sqrt2;
    return (rho * x).trace().real();
}

double position_variance(const MeterMatrix& rho) {
    const int n = static_cast<int>(rho.rows());
    const MeterMatrix c = annihilation(n);
    const MeterMatrix x = (c + c.adjoint()) / std::numbers::sqrt2;
    const double m = (rho * x).trace().real();
    return (rho * x * x).trace().real() - m * m;
}

} // namespace

TEST_CASE("displaced_thermal construction") {
    const MeterMatrix vac = displaced_thermal(0.0, kInf, 10);
    CHECK(std::abs(vac(0, 0) - 1.0) < 1e-15);
    CHECK((vac.cwiseAbs().sum() - 1.0) < 1e-15);

    for (double beta : {0.5, 1.0, 2.0, kInf}) {
        for (cd alpha : {cd(-0.5, 0), cd(-1.5, 0), cd(0.7, 0.4)}) {
            const int cut = choose_meter_cut(std::abs(alpha), 1, beta);
            const MeterMatrix rho = displaced_thermal(alpha, beta, cut);
            CHECK(std::abs(rho.trace().real() - 1.0) < 1e-10);
            CHECK(hermiticity_error(rho) < 1e-15);
            CHECK(position_mean(rho) == doctest::Approx(std::numbers::sqrt2 * alpha.real()).epsilon(1e-9));
            CHECK(position_variance(rho) == doctest::Approx(0.5 / std::tanh(0.5 * beta)).epsilon(1e-8));
            CHECK((rho - displaced_thermal_expm(alpha, beta, cut)).cwiseAbs().maxCoeff() < 1e-11);
        }
    }
    CHECK_THROWS_AS(displaced_thermal(5.0, 1.0, 5), TruncationError);
    CHECK_THROWS_AS(displaced_thermal(0.0, 0.0, 5), ParameterError);
}

TEST_CASE("choose_meter_cut") {
    const int cut = choose_meter_cut(0.5, 2, 1.0);
    CHECK(cut >= 17); // ceil((0.5 * 2)^2 + 6 * 0.5 * 2 + 10)
    CHECK(1.0 - displaced_thermal(-1.0, 1.0, cut).trace().real() <= 1e-12);
    CHECK(1.0 - displaced_thermal(-1.0, 1.0, cut - 1).trace().real() > 1e-12);
    CHECK(choose_meter_cut(0.0, 0, kInf) == 10);
}

TEST_CASE("block_derivative matches the dense operator form") {
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    for (auto diffusion : {DiffusionModel::quantum_thermal, DiffusionModel::high_temperature}) {
        DynamicsParams p = reference();
        p.diffusion = diffusion;
        p.omega = 1.3;
        for (auto [ket, bra] : {std::pair{0, 0}, {2, 2}, {1, 3}}) {
            MeterMatrix rho(12, 12);
            for (int i = 0; i < 12; ++i)
                for (int j = 0; j < 12; ++j) rho(i, j) = cd(nd(rng), nd(rng));
            const MeterMatrix fast = block_derivative(p, ket, bra, rho);
            CHECK((fast - derivative_dense(p, ket, bra, rho)).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("block_derivative structure") {
    const DynamicsParams p = reference();
    const MeterMatrix rho = displaced_thermal(cd(-0.3, 0.2), 1.5, 30);
    const MeterMatrix d = block_derivative(p, 1, 1, rho);
    CHECK(std::abs(d.trace()) < 1e-13);
    CHECK(hermiticity_error(d) < 1e-13);

    DynamicsParams cold = p;
    cold.beta = kInf;
    MeterMatrix vac = MeterMatrix::Zero(20, 20);
    vac(0, 0) = 1.0;
    CHECK(block_derivative(cold, 0, 0, vac).norm() < 1e-15);
}

TEST_CASE("displaced thermal state is stationary") {
    const DynamicsParams p = reference();
    for (int n = 0; n <= 2; ++n) {
        CHECK(stationarity_residual(p, n, 40) < 1e-8);
    }
    DynamicsParams cold = p;
    cold.beta = kInf;
    CHECK(stationarity_residual(cold, 2, 40) < 1e-8);
}

TEST_CASE("high-temperature diffusion has a shifted thermal fixed point") {
    DynamicsParams p = reference();
    p.diffusion = DiffusionModel::high_temperature;
    // The displaced thermal state at beta itself is not stationary...
    CHECK(stationarity_residual(p, 1, 40) > 1e-4);
    // ...the one with variance 1 / beta is.
    const double b_eff = high_temperature_effective_beta(p.beta);
    CHECK(0.5 / std::tanh(0.5 * b_eff) == doctest::Approx(1.0 / p.beta).epsilon(1e-14));
    for (int n = 0; n <= 2; ++n) {
        const MeterMatrix target = displaced_thermal(-p.kappa() * n, b_eff, 40);
        CHECK(block_derivative(p, n, n, target).norm() < 1e-8);
    }
    CHECK_THROWS_AS(high_temperature_effective_beta(2.5), ParameterError);
}

TEST_CASE("fidelity and trace norm helpers") {
    const MeterMatrix a = displaced_thermal(-0.5, 1.0, 30);
    CHECK(state_fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-10));
    const MeterMatrix coh = displaced_thermal(0.8, kInf, 30);
    MeterMatrix vac = MeterMatrix::Zero(31, 31);
    vac(0, 0) = 1.0;
    // |<0|alpha>|^2 = e^{-|alpha|^2}
    // Square roots of rank-one matrices carry ~sqrt(machine epsilon) noise.
    CHECK(state_fidelity(vac, coh) == doctest::Approx(std::exp(-0.64)).epsilon(1e-7));
    CHECK(state_fidelity(coh, vac) == doctest::Approx(std::exp(-0.64)).epsilon(1e-7));
    // Thermal states: F = 1 / (sqrt((n1 + 1)(n2 + 1)) - sqrt(n1 n2))^2
    const double n1 = 1 / std::expm1(1.0), n2 = 1 / std::expm1(2.0);
    const double expected = 1.0 / std::pow(std::sqrt((n1 + 1) * (n2 + 1)) - std::sqrt(n1 * n2), 2);
    CHECK(state_fidelity(displaced_thermal(0.0, 1.0, 60), displaced_thermal(0.0, 2.0, 60)) ==
          doctest::Approx(expected).epsilon(1e-9));
    CHECK(trace_norm(a) == doctest::Approx(1.0).epsilon(1e-10));
    MeterMatrix off = MeterMatrix::Zero(3, 3);
    off(0, 1) = cd(0, 2.0);
    off(2, 0) = -0.5;
    CHECK(trace_norm(off) == doctest::Approx(2.5));
}

TEST_CASE("evolve_block: vacuum sector at zero temperature stays put") {
    DynamicsParams p = reference();
    p.beta = kInf;
    const auto traj = evolve_block(p, 0, 0, 20.0, 0.01, {12, 20});
    for (const auto& s : traj.samples) {
        CHECK(*s.fidelity == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("evolve_block reaches the displaced thermal state") {
    const DynamicsParams p = reference();
    const auto traj = evolve_block(p, 1, 1, 40.0 / p.gamma, 0.01);
    CHECK(*traj.samples.back().fidelity >= 0.999);
    CHECK(traj.local_error_estimate < 1e-9);
    for (const auto& s : traj.samples) {
        CHECK(std::abs(s.trace - 1.0) < 1e-8);
        CHECK(s.hermiticity < 1e-8);
    }
    const double d0 = 1.0 - *traj.samples.front().fidelity;
    const double d1 = 1.0 - *traj.samples.back().fidelity;
    CHECK(d1 < d0 / 100.0);
    CHECK(position_mean(traj.final_block.matrix) == doctest::Approx(-std::numbers::sqrt2 * 0.5).epsilon(1e-6));
}

TEST_CASE("evolve_block: off-diagonal sectors decohere") {
    const DynamicsParams p = reference();
    const auto traj = evolve_block(p, 0, 1, 40.0 / p.gamma, 0.01, {0, 50});
    CHECK(traj.samples.front().trace_norm == doctest::Approx(1.0));
    CHECK(traj.samples.back().trace_norm < 0.05);
    CHECK_FALSE(traj.samples.back().fidelity.has_value());

    // Stronger damping decoheres faster at a fixed time.
    DynamicsParams strong = p;
    strong.gamma = 5 * p.gamma;
    const auto a = evolve_block(p, 0, 1, 10.0, 0.01, {0, 5});
    const auto b = evolve_block(strong, 0, 1, 10.0, 0.01, {0, 5});
    CHECK(b.samples.back().trace_norm < a.samples.back().trace_norm);
}

TEST_CASE("evolve_block: no coupling relaxes to the undisplaced thermal state") {
    DynamicsParams p = reference();
    p.g = 0.0;
    p.gamma = 1.0;
    const auto traj = evolve_block(p, 2, 2, 40.0, 0.01, {0, 4});
    CHECK(state_fidelity(displaced_thermal(0.0, p.beta, traj.meter_cut), traj.final_block.matrix) > 0.9999);
}

TEST_CASE("evolve_block input validation") {
    const DynamicsParams p = reference();
    CHECK_THROWS_AS(evolve_block(p, 1, 1, 10.0, 0.5), StepSizeError);
    CHECK_THROWS_AS(evolve_block(p, 1, 1, -1.0, 0.01), ParameterError);
    DynamicsParams bad = p;
    bad.gamma = 0.0;
    CHECK_THROWS_AS(evolve_block(bad, 1, 1, 1.0, 0.01), ParameterError);
}

TEST_CASE("steady_state_report on a short run") {
    DynamicsParams p = reference();
    p.gamma = 1.0; // faster relaxation keeps this test short
    const auto rep = steady_state_report(p, {{1, 1}, {0, 1}}, SteadyStateRun{40.0, 0.01, 0, 20});
    REQUIRE(rep.sectors.size() == 2);
    CHECK(rep.passed());
    CHECK(rep.sectors[0].residual < 1e-8);
    CHECK(rep.sectors[1].norm_ratio < 0.05);

    // A fidelity threshold of 1 cannot be met, and the report says so.
    SteadyStateTolerances strict;
    strict.fidelity = 1.0 + 1e-9;
    const auto failing = steady_state_report(p, {{1, 1}}, SteadyStateRun{5.0, 0.01, 0, 5}, strict);
    CHECK_FALSE(failing.passed());
    CHECK_FALSE(failing.sectors[0].failures.empty());
    CHECK_THROWS_AS(steady_state_report(p, {}), ParameterError);
}
