#include "ponder/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

#include "ponder/error.hpp"
#include "ponder/quadrature.hpp"

namespace ponder {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// ln of the smallest normal double; below this P(x) is not representable.
const double kLogMinNormal = std::log(std::numeric_limits<double>::min());
constexpr double kUnderflowWeight = 1e-300;

double log_sum_exp(const std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    if (m == kNegInf) {
        return kNegInf;
    }
    double s = 0.0;
    for (double t : v) {
        s += std::exp(t - m);
    }
    return m + std::log(s);
}

// Neumaier's compensated sum.
class CompensatedSum {
  public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

void check_epsilon(double epsilon) {
    if (!(epsilon >= 1.0) || !std::isfinite(epsilon)) {
        throw ParameterError("success threshold epsilon must be finite and >= 1");
    }
}

} // namespace

double ConditionalSpectrum::trace() const {
    CompensatedSum s;
    for (std::size_t n = 0; n < weights.size(); ++n) {
        s.add(static_cast<double>(multiplicities[n]) * weights[n]);
    }
    return s.value();
}

std::vector<double> ConditionalSpectrum::eigenvalues() const {
    std::vector<double> out;
    for (std::size_t n = 0; n < weights.size(); ++n) {
        out.insert(out.end(), multiplicities[n], weights[n]);
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

double spectrum_entropy(const ConditionalSpectrum& spectrum) {
    CompensatedSum s;
    for (std::size_t n = 0; n < spectrum.weights.size(); ++n) {
        const double w = spectrum.weights[n];
        if (w < kUnderflowWeight) {
            continue;
        }
        s.add(-static_cast<double>(spectrum.multiplicities[n]) * w * spectrum.log_weights[n]);
    }
    return std::max(0.0, s.value() / std::numbers::ln2);
}

double initial_entanglement(const SqueezedEnsemble& ensemble) {
    const double c2 = std::pow(std::cosh(ensemble.r()), 2);
    const double s2 = std::pow(std::sinh(ensemble.r()), 2);
    const double s_term = s2 > 0.0 ? s2 * std::log2(s2) : 0.0;
    return ensemble.pairs() * (c2 * std::log2(c2) - s_term);
}

PurificationModel::PurificationModel(SqueezedEnsemble ensemble, MeterModel meter, TruncationPolicy policy,
                                     PointerPath path)
    : PurificationModel(ensemble, meter, choose_cutoff(ensemble, policy.tail_tol), path, policy.series_tol) {}

PurificationModel::PurificationModel(SqueezedEnsemble ensemble, MeterModel meter, int n_max, PointerPath path,
                                     double series_tol)
    : ensemble_(ensemble), meter_(meter), n_max_(n_max), path_(path), series_tol_(series_tol),
      initial_entanglement_(ponder::initial_entanglement(ensemble)) {
    if (n_max < 0) {
        throw ParameterError("signal cutoff n_max must be >= 0");
    }
    log_shape_.reserve(n_max + 1);
    multiplicity_.reserve(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        log_shape_.push_back(log_prior_shape(ensemble_, n));
        multiplicity_.push_back(block_multiplicity(ensemble_.pairs(), n));
    }
}

std::vector<double> PurificationModel::log_block_terms(double x) const {
    std::vector<double> t(log_shape_.size());
    for (int n = 0; n <= n_max_; ++n) {
        double log_g;
        if (path_ == PointerPath::closed_form) {
            log_g = log_pointer_density_gaussian(meter_, n, x);
        } else {
            const double g = pointer_density_series(meter_, n, x, series_tol_);
            log_g = g > 0.0 ? std::log(g) : kNegInf;
        }
        t[n] = log_shape_[n] + log_g;
    }
    return t;
}

ConditionalSpectrum PurificationModel::conditional_spectrum(double x) const {
    if (!std::isfinite(x)) {
        throw ParameterError("outcome x must be finite");
    }
    const auto terms = log_block_terms(x);
    std::vector<double> with_mult(terms.size());
    for (std::size_t n = 0; n < terms.size(); ++n) {
        with_mult[n] = terms[n] + std::log(static_cast<double>(multiplicity_[n]));
    }
    const double log_p = log_sum_exp(with_mult);
    if (!(log_p >= kLogMinNormal)) {
        throw DegenerateOutcomeError(x);
    }
    ConditionalSpectrum spec;
    spec.outcome = x;
    spec.log_outcome_density = log_p;
    spec.multiplicities = multiplicity_;
    spec.weights.resize(terms.size());
    spec.log_weights.resize(terms.size());
    for (std::size_t n = 0; n < terms.size(); ++n) {
        spec.log_weights[n] = terms[n] - log_p;
        spec.weights[n] = std::exp(spec.log_weights[n]);
    }
    return spec;
}

double PurificationModel::outcome_density(double x) const {
    double p = 0.0;
    for (int n = 0; n <= n_max_; ++n) {
        p += static_cast<double>(multiplicity_[n]) * std::exp(log_shape_[n]) *
             pointer_density(meter_, n, x, path_, series_tol_);
    }
    return p;
}

double PurificationModel::entanglement(double x) const { return spectrum_entropy(conditional_spectrum(x)); }

double PurificationModel::gamma(double x) const {
    if (!(initial_entanglement_ > 0.0)) {
        throw ParameterError("entanglement ratio needs r > 0 (initial entanglement is zero)");
    }
    return entanglement(x) / initial_entanglement_;
}

std::vector<std::pair<double, double>> PurificationModel::success_set(double epsilon, const OutcomeGrid& grid) const {
    check_epsilon(epsilon);
    std::vector<std::pair<double, double>> intervals;
    if (grid.nodes.empty()) {
        return intervals;
    }
    auto accepted = [&](double x) { return gamma(x) - epsilon > kAcceptanceMargin; };
    auto boundary = [&](double lo, double hi, bool lo_state) {
        while (hi - lo > kBoundaryResolution) {
            const double mid = 0.5 * (lo + hi);
            if (accepted(mid) == lo_state) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };

    bool inside = accepted(grid.nodes.front());
    double start = grid.x_lo;
    for (std::size_t i = 1; i < grid.nodes.size(); ++i) {
        const bool now = accepted(grid.nodes[i]);
        if (now == inside) {
            continue;
        }
        const double b = boundary(grid.nodes[i - 1], grid.nodes[i], inside);
        if (inside) {
            intervals.emplace_back(start, b);
        } else {
            start = b;
        }
        inside = now;
    }
    if (inside) {
        intervals.emplace_back(start, grid.x_hi);
    }
    return intervals;
}

double PurificationModel::success_probability(double epsilon, const OutcomeGrid& grid) const {
    return efficiency(epsilon, grid).success_prob;
}

EfficiencyResult PurificationModel::efficiency(double epsilon, const OutcomeGrid& grid) const {
    const auto intervals = success_set(epsilon, grid);
    const double panel = grid.panel_width > 0.0 ? grid.panel_width : 0.5 * meter_.sigma();
    double mass = 0.0;
    double weighted = 0.0;
    for (const auto& [a, b] : intervals) {
        mass += integrate_panels([&](double x) { return outcome_density(x); }, a, b, panel);
        weighted += integrate_panels([&](double x) { return gamma(x) * outcome_density(x); }, a, b, panel);
    }
    EfficiencyResult result;
    result.success_prob = std::clamp(mass, 0.0, 1.0);
    if (mass > 0.0) {
        const double upsilon = weighted / mass;
        result.mean_ratio = upsilon;
        result.efficiency = 1.0 - 1.0 / upsilon;
    }
    return result;
}

ConditionalSpectrum conditional_spectrum(const SqueezedEnsemble& ensemble, const MeterModel& model, double x,
                                         const TruncationPolicy& policy) {
    return PurificationModel(ensemble, model, policy).conditional_spectrum(x);
}

double entanglement(const SqueezedEnsemble& ensemble, const MeterModel& model, double x,
                    const TruncationPolicy& policy) {
    return PurificationModel(ensemble, model, policy).entanglement(x);
}

double gamma_ratio(const SqueezedEnsemble& ensemble, const MeterModel& model, double x,
                   const TruncationPolicy& policy) {
    return PurificationModel(ensemble, model, policy).gamma(x);
}

double success_probability(const SqueezedEnsemble& ensemble, const MeterModel& model, double epsilon,
                           const OutcomeGrid& grid, const TruncationPolicy& policy) {
    return PurificationModel(ensemble, model, policy).success_probability(epsilon, grid);
}

EfficiencyResult efficiency(const SqueezedEnsemble& ensemble, const MeterModel& model, double epsilon,
                            const OutcomeGrid& grid, const TruncationPolicy& policy) {
    return PurificationModel(ensemble, model, policy).efficiency(epsilon, grid);
}

OutcomeGrid make_grid(const SqueezedEnsemble& ensemble, const MeterModel& model, const TruncationPolicy& policy,
                      const GridOverrides& overrides) {
    const OutcomeGrid base = default_grid(ensemble, model, policy);
    if (!overrides.x_lo && !overrides.x_hi && !overrides.panel_width) {
        return base;
    }
    return OutcomeGrid::gauss_legendre(overrides.x_lo.value_or(base.x_lo), overrides.x_hi.value_or(base.x_hi),
                                       overrides.panel_width.value_or(0.5 * model.sigma()));
}

std::vector<SweepResult> sweep_kappa(const SqueezedEnsemble& ensemble, double beta, double epsilon,
                                     const std::vector<double>& kappas, const TruncationPolicy& policy,
                                     const GridOverrides& overrides) {
    if (kappas.empty()) {
        throw ParameterError("kappa list must not be empty");
    }
    check_epsilon(epsilon);
    auto one = [&](double kappa) {
        SweepResult row;
        row.kappa = kappa;
        try {
            const MeterModel meter(kappa, beta);
            const PurificationModel model(ensemble, meter, policy);
            const auto eff = model.efficiency(epsilon, make_grid(ensemble, meter, policy, overrides));
            row.success_prob = eff.success_prob;
            row.mean_ratio = eff.mean_ratio;
            row.efficiency = eff.efficiency;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        return row;
    };
    std::vector<std::future<SweepResult>> pending;
    pending.reserve(kappas.size());
    for (double kappa : kappas) {
        pending.push_back(std::async(std::launch::async, one, kappa));
    }
    std::vector<SweepResult> rows;
    rows.reserve(kappas.size());
    for (auto& f : pending) {
        rows.push_back(f.get());
    }
    return rows;
}

} // namespace ponder
