#include "ponder/meter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ponder/error.hpp"
#include "ponder/quadrature.hpp"

namespace ponder {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
// Cramer's inequality: |psi_n(y)| <= kCramer * pi^{-1/4} for every n and y.
constexpr double kCramer = 1.086435;
constexpr double kRescale = 1e100;

} // namespace

MeterModel::MeterModel(double kappa, double beta) : kappa_(kappa), beta_(beta) {
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
        throw ParameterError("coupling kappa must be finite and >= 0");
    }
    if (!(beta > 0.0)) {
        throw ParameterError("inverse temperature beta must be > 0 (or infinite)");
    }
}

double MeterModel::mean_occupation() const { return zero_temperature() ? 0.0 : 1.0 / std::expm1(beta_); }

double MeterModel::variance() const { return 0.5 / std::tanh(0.5 * beta_); }

double MeterModel::sigma() const { return std::sqrt(variance()); }

double MeterModel::center(int total) const { return -kSqrt2 * kappa_ * total; }

std::string to_string(GridRule rule) {
    switch (rule) {
    case GridRule::composite_gauss_legendre:
        return "composite-gauss-legendre-16";
    case GridRule::uniform_trapezoid:
        return "uniform-trapezoid";
    }
    return "unknown";
}

OutcomeGrid OutcomeGrid::gauss_legendre(double x_lo, double x_hi, double panel_width) {
    if (!(x_lo < x_hi) || !(panel_width > 0.0)) {
        throw ParameterError("outcome grid needs x_lo < x_hi and a positive panel width");
    }
    const auto& rule = gauss_legendre_16();
    const int panels = std::max(1, static_cast<int>(std::ceil((x_hi - x_lo) / panel_width - 1e-12)));
    const double h = (x_hi - x_lo) / panels;
    OutcomeGrid grid;
    grid.x_lo = x_lo;
    grid.x_hi = x_hi;
    grid.rule = GridRule::composite_gauss_legendre;
    grid.panel_width = h;
    grid.nodes.reserve(static_cast<std::size_t>(panels) * rule.order());
    grid.weights.reserve(grid.nodes.capacity());
    for (int k = 0; k < panels; ++k) {
        const double mid = x_lo + (k + 0.5) * h;
        for (int i = 0; i < rule.order(); ++i) {
            grid.nodes.push_back(mid + 0.5 * h * rule.nodes[i]);
            grid.weights.push_back(0.5 * h * rule.weights[i]);
        }
    }
    return grid;
}

OutcomeGrid OutcomeGrid::uniform(double x_lo, double x_hi, double step) {
    if (!(x_lo < x_hi) || !(step > 0.0)) {
        throw ParameterError("outcome grid needs x_lo < x_hi and a positive step");
    }
    const auto k_lo = static_cast<long>(std::ceil(x_lo / step - 1e-9));
    const auto k_hi = static_cast<long>(std::floor(x_hi / step + 1e-9));
    if (k_hi - k_lo < 1) {
        throw ParameterError("uniform grid step leaves fewer than two points");
    }
    OutcomeGrid grid;
    grid.rule = GridRule::uniform_trapezoid;
    grid.panel_width = step;
    for (long k = k_lo; k <= k_hi; ++k) {
        grid.nodes.push_back(static_cast<double>(k) * step);
        grid.weights.push_back(step);
    }
    grid.weights.front() *= 0.5;
    grid.weights.back() *= 0.5;
    grid.x_lo = grid.nodes.front();
    grid.x_hi = grid.nodes.back();
    return grid;
}

double oscillator_eigenfunction_sq(int n, double y) {
    if (n < 0) {
        throw ParameterError("oscillator level must be >= 0");
    }
    // Recurrence on psi_n e^{y^2/2} with explicit exponent bookkeeping.
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25);
    double log_scale = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double next = std::sqrt(2.0 / k) * y * cur - std::sqrt((k - 1.0) / k) * prev;
        prev = cur;
        cur = next;
        if (std::abs(cur) > kRescale) {
            cur /= kRescale;
            prev /= kRescale;
            log_scale += std::log(kRescale);
        }
    }
    return cur * cur * std::exp(2.0 * log_scale - y * y);
}

double pointer_density_series(const MeterModel& model, int total, double x, double series_tol) {
    if (total < 0) {
        throw ParameterError("signal sector N must be >= 0");
    }
    if (!(series_tol > 0.0)) {
        throw ParameterError("series_tol must be positive");
    }
    const double y = x - model.center(total);
    if (model.zero_temperature()) {
        return oscillator_eigenfunction_sq(0, y);
    }
    const double beta = model.beta();
    const double decay = std::exp(-beta);
    const double bound_const = kCramer * kCramer / std::sqrt(std::numbers::pi);

    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25);
    double log_scale = 0.0;
    double weight = 1.0; // e^{-n beta}
    double sum = cur * cur;
    for (int n = 1;; ++n) {
        weight *= decay;
        // Everything from level n on is bounded by bound_const * e^{-n beta}.
        if (bound_const * weight < series_tol || weight == 0.0) {
            break;
        }
        const double next = std::sqrt(2.0 / n) * y * cur - std::sqrt((n - 1.0) / n) * prev;
        prev = cur;
        cur = next;
        if (std::abs(cur) > kRescale) {
            cur /= kRescale;
            prev /= kRescale;
            sum /= kRescale * kRescale;
            log_scale += std::log(kRescale);
        }
        sum += weight * cur * cur;
        if (n > 10000000) {
            throw NumericalError("pointer_density_series: series did not converge");
        }
    }
    return -std::expm1(-beta) * sum * std::exp(2.0 * log_scale - y * y);
}

double log_pointer_density_gaussian(const MeterModel& model, int total, double x) {
    const double var = model.variance();
    const double d = x - model.center(total);
    return -0.5 * d * d / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
}

double pointer_density_gaussian(const MeterModel& model, int total, double x) {
    if (total < 0) {
        throw ParameterError("signal sector N must be >= 0");
    }
    return std::exp(log_pointer_density_gaussian(model, total, x));
}

double pointer_density(const MeterModel& model, int total, double x, PointerPath path, double series_tol) {
    return path == PointerPath::series ? pointer_density_series(model, total, x, series_tol)
                                       : pointer_density_gaussian(model, total, x);
}

double outcome_density(const SqueezedEnsemble& ensemble, const MeterModel& model, double x,
                       const TruncationPolicy& policy, PointerPath path) {
    const int n_max = choose_cutoff(ensemble, policy.tail_tol);
    double p = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        p += total_number_prior(ensemble, n) * pointer_density(model, n, x, path, policy.series_tol);
    }
    return p;
}

OutcomeGrid default_grid(const SqueezedEnsemble& ensemble, const MeterModel& model, const TruncationPolicy& policy) {
    const int n_max = choose_cutoff(ensemble, policy.tail_tol);
    const double sigma = model.sigma();
    return OutcomeGrid::gauss_legendre(model.center(n_max) - 8.0 * sigma, 8.0 * sigma, 0.5 * sigma);
}

} // namespace ponder
