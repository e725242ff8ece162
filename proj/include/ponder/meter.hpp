#pragma once

#include <limits>
#include <string>
#include <vector>

#include "ponder/fock.hpp"

namespace ponder {

/// Displaced-thermal pointer of the ponderomotive meter.
///
/// kappa = g / Omega sets the pointer shift per photon, -sqrt(2) kappa N in the
/// position quadrature x = (c + c^dagger) / sqrt(2). beta is the inverse
/// temperature in units of the meter quantum; +infinity is zero temperature.
class MeterModel {
  public:
    static constexpr double infinite_beta = std::numeric_limits<double>::infinity();

    MeterModel(double kappa, double beta);

    double kappa() const { return kappa_; }
    double beta() const { return beta_; }
    bool zero_temperature() const { return beta_ == infinite_beta; }

    /// 1 / (e^beta - 1), 0 at infinite beta.
    double mean_occupation() const;
    /// Position variance of the pointer, coth(beta / 2) / 2.
    double variance() const;
    double sigma() const;
    /// Pointer centre for signal sector N.
    double center(int total) const;

  private:
    double kappa_;
    double beta_;
};

enum class PointerPath {
    closed_form, ///< Gaussian with variance coth(beta / 2) / 2
    series,      ///< thermal sum over oscillator eigenfunctions
};

enum class GridRule {
    composite_gauss_legendre,
    uniform_trapezoid,
};

/// Quadrature grid over the outcome variable x.
struct OutcomeGrid {
    double x_lo = 0.0;
    double x_hi = 0.0;
    std::vector<double> nodes;
    std::vector<double> weights;
    GridRule rule = GridRule::composite_gauss_legendre;
    double panel_width = 0.0;

    static OutcomeGrid gauss_legendre(double x_lo, double x_hi, double panel_width);
    /// Points k * step for integer k, so x = 0 is always a node when inside the bounds.
    static OutcomeGrid uniform(double x_lo, double x_hi, double step);

    std::size_t size() const { return nodes.size(); }
    template <class Func>
    double integrate(const Func& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            s += weights[i] * f(nodes[i]);
        }
        return s;
    }
};

std::string to_string(GridRule rule);

/// Squared, unit-normalised harmonic-oscillator eigenfunction psi_n(y)^2.
double oscillator_eigenfunction_sq(int n, double y);

/// Thermal eigenfunction series (1 - e^-beta) sum_n e^{-n beta} psi_n^2(x + sqrt(2) kappa N),
/// truncated once the Cramer-inequality tail bound drops below series_tol.
double pointer_density_series(const MeterModel& model, int total, double x, double series_tol = 1e-15);

/// Closed form of the same density: Gaussian with mean -sqrt(2) kappa N.
double pointer_density_gaussian(const MeterModel& model, int total, double x);
double log_pointer_density_gaussian(const MeterModel& model, int total, double x);

double pointer_density(const MeterModel& model, int total, double x, PointerPath path = PointerPath::closed_form,
                       double series_tol = 1e-15);

/// Meter position distribution P(x) = sum_N prior(N) pointer_density(N, x), N <= n_max.
double outcome_density(const SqueezedEnsemble& ensemble, const MeterModel& model, double x,
                       const TruncationPolicy& policy = {}, PointerPath path = PointerPath::closed_form);

/// [-sqrt(2) kappa n_max - 8 sigma, 8 sigma] in panels of width sigma / 2.
OutcomeGrid default_grid(const SqueezedEnsemble& ensemble, const MeterModel& model,
                         const TruncationPolicy& policy = {});

} // namespace ponder
