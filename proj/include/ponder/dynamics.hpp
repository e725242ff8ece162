#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ponder {

using MeterMatrix = Eigen::MatrixXcd;

/// Diffusion coefficient D of the -D [x, [x, rho]] term.
enum class DiffusionModel {
    quantum_thermal,  ///< D = (gamma / 2) coth(beta / 2); stationary state is the thermal state at beta
    high_temperature, ///< D = gamma / beta; its beta -> 0 limit
};

std::string to_string(DiffusionModel model);

/// Quantum Brownian motion parameters, all in units where the meter
/// frequency omega sets the time scale.
struct DynamicsParams {
    double omega = 1.0;
    double g = 0.5;
    double gamma = 0.2;
    double beta = 1.0;
    DiffusionModel diffusion = DiffusionModel::quantum_thermal;

    double kappa() const { return g / omega; }
    double diffusion_coefficient() const;
    /// Throws ParameterError unless omega, gamma > 0, g >= 0 and beta > 0.
    void validate() const;
};

/// Inverse temperature whose thermal variance coth(b / 2) / 2 equals the
/// high-temperature stationary variance 1 / beta. Needs beta < 2.
double high_temperature_effective_beta(double beta);

/// Meter-space block rho_{N,M} between A-side sectors N (ket) and M (bra).
struct MeterBlock {
    int ket_total = 0;
    int bra_total = 0;
    MeterMatrix matrix;

    bool diagonal() const { return ket_total == bra_total; }
};

/// D(alpha) rho_th(beta) D(alpha)^dagger on Fock levels 0..meter_cut.
/// Throws TruncationError if more than 1e-8 of the trace falls outside the cutoff.
MeterMatrix displaced_thermal(std::complex<double> alpha, double beta, int meter_cut);

/// Smallest cutoff >= ceil((kappa n)^2 + 6 kappa n + 10) at which every
/// displaced_thermal(-kappa N, beta), N <= n, loses at most 1e-12 of its trace.
int choose_meter_cut(double kappa, int max_sector, double beta);

/// Time derivative of one (N, M) block under the meter master equation, with
/// H_N = omega c^dagger c + g N (c + c^dagger) acting from the left and H_M
/// from the right.
MeterMatrix block_derivative(const DynamicsParams& params, int ket_total, int bra_total, const MeterMatrix& block);

/// Frobenius norm of block_derivative at displaced_thermal(-kappa N, beta).
double stationarity_residual(const DynamicsParams& params, int total, int meter_cut);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 of two density matrices.
double state_fidelity(const MeterMatrix& rho, const MeterMatrix& sigma);
/// Sum of singular values.
double trace_norm(const MeterMatrix& m);
/// max |m - m^dagger| over elements.
double hermiticity_error(const MeterMatrix& m);

struct TrajectorySample {
    double time = 0.0;
    std::complex<double> trace;
    double trace_norm = 0.0;
    std::optional<double> fidelity; ///< diagonal blocks only
    double hermiticity = 0.0;
};

struct Trajectory {
    int ket_total = 0;
    int bra_total = 0;
    int meter_cut = 0;
    double dt = 0.0;
    std::vector<TrajectorySample> samples;
    MeterBlock final_block;
    double local_error_estimate = 0.0; ///< max step-doubling estimate seen
};

struct EvolveOptions {
    int meter_cut = 0; ///< 0 selects choose_meter_cut
    int samples = 200; ///< trajectory samples, evenly spaced in time
};

/// Fourth-order Runge-Kutta from the vacuum meter block. Requires
/// dt <= 0.01 / max(omega, gamma, g max(N, M)).
Trajectory evolve_block(const DynamicsParams& params, int ket_total, int bra_total, double t_final, double dt,
                        const EvolveOptions& options = {});

struct SteadyStateTolerances {
    double residual = 1e-8;
    double fidelity = 0.999;
    double trace = 1e-8;
    double hermiticity = 1e-8;
    double off_diagonal_ratio = 0.05;
    double deficit_decay = 100.0;
};

struct SectorReport {
    int ket_total = 0;
    int bra_total = 0;
    bool passed = false;
    double residual = 0.0;        ///< diagonal: stationarity residual of the target
    double final_fidelity = 0.0;  ///< diagonal
    double trace_error = 0.0;     ///< diagonal: max |Tr - 1| along the run
    double hermiticity = 0.0;     ///< diagonal: max along the run
    double initial_deficit = 0.0; ///< diagonal: 1 - fidelity at t = 0
    double final_deficit = 0.0;
    double norm_ratio = 0.0;      ///< off-diagonal: final / initial trace norm
    std::vector<std::string> failures;
    Trajectory trajectory;
};

struct SteadyStateReport {
    std::vector<SectorReport> sectors;
    bool passed() const;
};

struct SteadyStateRun {
    double t_final = 0.0; ///< 0 selects 40 / gamma
    double dt = 0.01;
    int meter_cut = 0;    ///< 0 selects choose_meter_cut over all sectors
    int samples = 200;
};

const std::vector<std::pair<int, int>>& default_sectors();

/// Evolves every sector and checks it against the displaced thermal steady state.
SteadyStateReport steady_state_report(const DynamicsParams& params, const std::vector<std::pair<int, int>>& sectors,
                                      const SteadyStateRun& run = {}, const SteadyStateTolerances& tol = {});

} // namespace ponder
