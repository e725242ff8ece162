#include "ponder/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

#include "ponder/error.hpp"

namespace ponder {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

MeterMatrix build_displaced_thermal(cd alpha, double beta, int meter_cut) {
    const int n = meter_cut + 1;
    // Coherent state |alpha>, then |alpha, k> = (c^dagger - alpha*) |alpha, k-1> / sqrt(k).
    // Raising only moves amplitude upward, so the truncated recurrence is exact on 0..meter_cut.
    Eigen::VectorXcd psi(n);
    psi(0) = std::exp(-0.5 * std::norm(alpha));
    for (int j = 1; j < n; ++j) {
        psi(j) = psi(j - 1) * alpha / std::sqrt(static_cast<double>(j));
    }
    MeterMatrix rho = MeterMatrix::Zero(n, n);
    const bool pure = std::isinf(beta);
    const double decay = pure ? 0.0 : std::exp(-beta);
    double weight = pure ? 1.0 : -std::expm1(-beta);
    Eigen::VectorXcd next(n);
    for (int k = 0;; ++k) {
        rho.noalias() += weight * psi * psi.adjoint();
        weight *= decay;
        if (weight < 1e-18) {
            break;
        }
        next(0) = -std::conj(alpha) * psi(0);
        for (int j = 1; j < n; ++j) {
            next(j) = std::sqrt(static_cast<double>(j)) * psi(j - 1) - std::conj(alpha) * psi(j);
        }
        psi = next / std::sqrt(static_cast<double>(k + 1));
    }
    return rho;
}

double trace_deficit(const MeterMatrix& rho) { return 1.0 - rho.trace().real(); }

// Position and momentum quadratures split into their sub- and super-diagonal
// parts: x = L + U and p = i (L - U), with L_{k,k-1} = U_{k-1,k} = sqrt(k / 2).
class Quadratures {
  public:
    explicit Quadratures(int n) : n_(n), s_(n > 1 ? n - 1 : 0), number_(n) {
        for (int i = 0; i + 1 < n; ++i) {
            s_(i) = std::sqrt((i + 1) / 2.0);
        }
        for (int i = 0; i < n; ++i) {
            number_(i) = i;
        }
    }

    MeterMatrix lower_left(const MeterMatrix& m) const {
        MeterMatrix r = MeterMatrix::Zero(n_, n_);
        r.bottomRows(n_ - 1) = s_.asDiagonal() * m.topRows(n_ - 1);
        return r;
    }
    MeterMatrix upper_left(const MeterMatrix& m) const {
        MeterMatrix r = MeterMatrix::Zero(n_, n_);
        r.topRows(n_ - 1) = s_.asDiagonal() * m.bottomRows(n_ - 1);
        return r;
    }
    MeterMatrix lower_right(const MeterMatrix& m) const {
        MeterMatrix r = MeterMatrix::Zero(n_, n_);
        r.leftCols(n_ - 1) = m.rightCols(n_ - 1) * s_.asDiagonal();
        return r;
    }
    MeterMatrix upper_right(const MeterMatrix& m) const {
        MeterMatrix r = MeterMatrix::Zero(n_, n_);
        r.rightCols(n_ - 1) = m.leftCols(n_ - 1) * s_.asDiagonal();
        return r;
    }

    MeterMatrix x_left(const MeterMatrix& m) const { return lower_left(m) + upper_left(m); }
    MeterMatrix x_right(const MeterMatrix& m) const { return lower_right(m) + upper_right(m); }
    MeterMatrix p_left(const MeterMatrix& m) const { return kI * (lower_left(m) - upper_left(m)); }
    MeterMatrix p_right(const MeterMatrix& m) const { return kI * (lower_right(m) - upper_right(m)); }
    MeterMatrix number_left(const MeterMatrix& m) const { return number_.asDiagonal() * m; }
    MeterMatrix number_right(const MeterMatrix& m) const { return m * number_.asDiagonal(); }

  private:
    int n_;
    Eigen::VectorXd s_;
    Eigen::VectorXd number_;
};

Eigen::MatrixXcd psd_sqrt(const MeterMatrix& m) {
    const MeterMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<MeterMatrix> es(h);
    const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity_with_root(const MeterMatrix& root, const MeterMatrix& sigma) {
    const MeterMatrix inner = root * sigma * root;
    const MeterMatrix h = 0.5 * (inner + inner.adjoint());
    Eigen::SelfAdjointEigenSolver<MeterMatrix> es(h, Eigen::EigenvaluesOnly);
    const double t = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return t * t;
}

bool all_finite(const MeterMatrix& m) { return m.allFinite(); }

} // namespace

std::string to_string(DiffusionModel model) {
    return model == DiffusionModel::quantum_thermal ? "quantum-thermal" : "high-temperature";
}

double DynamicsParams::diffusion_coefficient() const {
    if (diffusion == DiffusionModel::high_temperature) {
        return gamma / beta;
    }
    return 0.5 * gamma / std::tanh(0.5 * beta);
}

void DynamicsParams::validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw ParameterError("meter frequency omega must be positive");
    }
    if (!(g >= 0.0) || !std::isfinite(g)) {
        throw ParameterError("coupling g must be finite and >= 0");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw ParameterError("damping rate gamma must be positive");
    }
    if (!(beta > 0.0)) {
        throw ParameterError("inverse temperature beta must be positive");
    }
}

double high_temperature_effective_beta(double beta) {
    if (!(beta > 0.0 && beta < 2.0)) {
        throw ParameterError("high-temperature diffusion has a physical fixed point only for beta < 2");
    }
    // coth(b / 2) / 2 = 1 / beta  <=>  b = 2 atanh(beta / 2)
    return 2.0 * std::atanh(0.5 * beta);
}

MeterMatrix displaced_thermal(std::complex<double> alpha, double beta, int meter_cut) {
    if (meter_cut < 0) {
        throw ParameterError("meter cutoff must be >= 0");
    }
    if (!(beta > 0.0)) {
        throw ParameterError("inverse temperature beta must be positive");
    }
    MeterMatrix rho = build_displaced_thermal(alpha, beta, meter_cut);
    const double deficit = trace_deficit(rho);
    if (deficit > 1e-8) {
        std::ostringstream msg;
        msg << "meter cutoff " << meter_cut << " too small for displacement " << std::abs(alpha) << " at beta "
            << beta << ": trace deficit " << deficit;
        throw TruncationError(msg.str());
    }
    return rho;
}

int choose_meter_cut(double kappa, int max_sector, double beta) {
    const double shift = kappa * max_sector;
    int cut = static_cast<int>(std::ceil(shift * shift + 6.0 * shift + 10.0));
    for (;; ++cut) {
        double worst = 0.0;
        for (int n = 0; n <= max_sector; ++n) {
            worst = std::max(worst, trace_deficit(build_displaced_thermal(-kappa * n, beta, cut)));
        }
        if (worst <= 1e-12) {
            return cut;
        }
        if (cut > 4000) {
            throw TruncationError("choose_meter_cut: no cutoff below 4000 is adequate");
        }
    }
}

MeterMatrix block_derivative(const DynamicsParams& params, int ket_total, int bra_total, const MeterMatrix& block) {
    const auto n = static_cast<int>(block.rows());
    if (block.cols() != n || n < 2) {
        throw ParameterError("meter block must be square with at least two levels");
    }
    const Quadratures q(n);
    const double drive = std::numbers::sqrt2 * params.g;
    const MeterMatrix xr = q.x_left(block);
    const MeterMatrix rx = q.x_right(block);

    // H_N rho - rho H_M with H_N = omega n + sqrt(2) g N x.
    const MeterMatrix unitary = params.omega * (q.number_left(block) - q.number_right(block)) +
                                drive * (ket_total * xr - bra_total * rx);
    const MeterMatrix anti_p = q.p_left(block) + q.p_right(block);
    const MeterMatrix comm_x = xr - rx;
    const MeterMatrix damping = q.x_left(anti_p) - q.x_right(anti_p);
    const MeterMatrix diffusion = q.x_left(comm_x) - q.x_right(comm_x);

    return -kI * unitary - kI * (0.5 * params.gamma) * damping - params.diffusion_coefficient() * diffusion;
}

double stationarity_residual(const DynamicsParams& params, int total, int meter_cut) {
    params.validate();
    const MeterMatrix target = displaced_thermal(-params.kappa() * total, params.beta, meter_cut);
    return block_derivative(params, total, total, target).norm();
}

double state_fidelity(const MeterMatrix& rho, const MeterMatrix& sigma) {
    return fidelity_with_root(psd_sqrt(rho), sigma);
}

double trace_norm(const MeterMatrix& m) {
    Eigen::JacobiSVD<MeterMatrix> svd(m);
    return svd.singularValues().sum();
}

double hermiticity_error(const MeterMatrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

Trajectory evolve_block(const DynamicsParams& params, int ket_total, int bra_total, double t_final, double dt,
                        const EvolveOptions& options) {
    params.validate();
    if (ket_total < 0 || bra_total < 0) {
        throw ParameterError("sector labels must be >= 0");
    }
    if (!(t_final > 0.0) || !std::isfinite(t_final)) {
        throw ParameterError("t_final must be positive");
    }
    const double fastest = std::max({params.omega, params.gamma, params.g * std::max(ket_total, bra_total)});
    const double dt_max = 0.01 / fastest;
    if (!(dt > 0.0) || dt > dt_max * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "step size dt = " << dt << " does not resolve the fastest rate " << fastest << " of sector ("
            << ket_total << "," << bra_total << "); need dt <= " << dt_max;
        throw StepSizeError(msg.str());
    }

    Trajectory traj;
    traj.ket_total = ket_total;
    traj.bra_total = bra_total;
    traj.meter_cut = options.meter_cut > 0
                         ? options.meter_cut
                         : choose_meter_cut(params.kappa(), std::max(ket_total, bra_total), params.beta);
    const int n = traj.meter_cut + 1;
    const auto steps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
    const double h = t_final / static_cast<double>(steps);
    traj.dt = h;

    const bool diagonal = ket_total == bra_total;
    MeterMatrix target_root;
    if (diagonal) {
        target_root = psd_sqrt(displaced_thermal(-params.kappa() * ket_total, params.beta, traj.meter_cut));
    }

    auto f = [&](const MeterMatrix& y) { return block_derivative(params, ket_total, bra_total, y); };
    auto rk4 = [&](const MeterMatrix& y, double step) {
        const MeterMatrix k1 = f(y);
        const MeterMatrix k2 = f(y + 0.5 * step * k1);
        const MeterMatrix k3 = f(y + 0.5 * step * k2);
        const MeterMatrix k4 = f(y + step * k3);
        return MeterMatrix(y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    };

    MeterMatrix y = MeterMatrix::Zero(n, n);
    y(0, 0) = 1.0;

    auto record = [&](long step_index) {
        if (!all_finite(y)) {
            std::ostringstream msg;
            msg << "non-finite meter block in sector (" << ket_total << "," << bra_total << ") at t = "
                << step_index * h << " (dt = " << h << ", meter_cut = " << traj.meter_cut << ")";
            throw NumericalError(msg.str());
        }
        TrajectorySample s;
        s.time = step_index * h;
        s.trace = y.trace();
        s.trace_norm = trace_norm(y);
        s.hermiticity = diagonal ? hermiticity_error(y) : 0.0;
        if (diagonal) {
            s.fidelity = fidelity_with_root(target_root, y);
        }
        traj.samples.push_back(s);
        if (step_index < steps) {
            const MeterMatrix full = rk4(y, h);
            const MeterMatrix halves = rk4(rk4(y, 0.5 * h), 0.5 * h);
            traj.local_error_estimate = std::max(traj.local_error_estimate, (full - halves).norm() / 15.0);
        }
    };

    const int samples = std::max(1, options.samples);
    long next_sample = 0;
    int sample_index = 0;
    for (long step = 0; step <= steps; ++step) {
        if (step == next_sample || step == steps) {
            record(step);
            ++sample_index;
            next_sample = std::max(step + 1, static_cast<long>(std::llround(
                                                 static_cast<double>(sample_index) * steps / samples)));
        }
        if (step < steps) {
            y = rk4(y, h);
        }
    }
    traj.final_block = MeterBlock{ket_total, bra_total, y};
    return traj;
}

bool SteadyStateReport::passed() const {
    return !sectors.empty() && std::all_of(sectors.begin(), sectors.end(), [](const auto& s) { return s.passed; });
}

const std::vector<std::pair<int, int>>& default_sectors() {
    static const std::vector<std::pair<int, int>> sectors{{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 2}};
    return sectors;
}

SteadyStateReport steady_state_report(const DynamicsParams& params, const std::vector<std::pair<int, int>>& sectors,
                                      const SteadyStateRun& run, const SteadyStateTolerances& tol) {
    params.validate();
    if (sectors.empty()) {
        throw ParameterError("sector list must not be empty");
    }
    int max_sector = 0;
    for (const auto& [ket, bra] : sectors) {
        max_sector = std::max({max_sector, ket, bra});
    }
    const int cut = run.meter_cut > 0 ? run.meter_cut : choose_meter_cut(params.kappa(), max_sector, params.beta);
    const double t_final = run.t_final > 0.0 ? run.t_final : 40.0 / params.gamma;

    auto one = [&](int ket, int bra) {
        SectorReport rep;
        rep.ket_total = ket;
        rep.bra_total = bra;
        rep.trajectory = evolve_block(params, ket, bra, t_final, run.dt, EvolveOptions{cut, run.samples});
        const auto& samples = rep.trajectory.samples;
        auto fail = [&](const std::string& what, double value, double limit) {
            std::ostringstream msg;
            msg << what << " = " << value << " (limit " << limit << ")";
            rep.failures.push_back(msg.str());
        };
        if (ket == bra) {
            rep.residual = stationarity_residual(params, ket, cut);
            for (const auto& s : samples) {
                rep.trace_error = std::max(rep.trace_error, std::abs(s.trace - 1.0));
                rep.hermiticity = std::max(rep.hermiticity, s.hermiticity);
            }
            rep.final_fidelity = *samples.back().fidelity;
            rep.initial_deficit = 1.0 - *samples.front().fidelity;
            rep.final_deficit = 1.0 - rep.final_fidelity;
            if (!(rep.residual < tol.residual)) fail("stationarity residual", rep.residual, tol.residual);
            if (!(rep.final_fidelity >= tol.fidelity)) fail("final fidelity", rep.final_fidelity, tol.fidelity);
            if (!(rep.trace_error < tol.trace)) fail("trace error", rep.trace_error, tol.trace);
            if (!(rep.hermiticity < tol.hermiticity)) fail("hermiticity error", rep.hermiticity, tol.hermiticity);
            if (!(rep.final_deficit < rep.initial_deficit / tol.deficit_decay)) {
                fail("fidelity deficit decay (final / initial)", rep.final_deficit / rep.initial_deficit,
                     1.0 / tol.deficit_decay);
            }
        } else {
            const double initial = samples.front().trace_norm;
            rep.norm_ratio = samples.back().trace_norm / initial;
            if (!(rep.norm_ratio < tol.off_diagonal_ratio)) fail("trace-norm ratio", rep.norm_ratio, tol.off_diagonal_ratio);
            // Late-time decay must be monotone.
            for (std::size_t i = samples.size() / 2 + 1; i < samples.size(); ++i) {
                if (samples[i].trace_norm > samples[i - 1].trace_norm * (1.0 + 1e-9) + 1e-14) {
                    fail("trace-norm increase at t = " + std::to_string(samples[i].time), samples[i].trace_norm,
                         samples[i - 1].trace_norm);
                    break;
                }
            }
        }
        rep.passed = rep.failures.empty();
        return rep;
    };

    std::vector<std::future<SectorReport>> pending;
    for (const auto& [ket, bra] : sectors) {
        pending.push_back(std::async(std::launch::async, one, ket, bra));
    }
    SteadyStateReport report;
    for (auto& p : pending) {
        report.sectors.push_back(p.get());
    }
    return report;
}

} // namespace ponder
