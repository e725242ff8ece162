#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ponder/fock.hpp"
#include "ponder/meter.hpp"

namespace ponder {

/// Spectrum of the B-side state after the meter reads x.
///
/// Every Fock tuple with total N is an eigenvector; all of them share the
/// eigenvalue weights[N], so block N contributes multiplicities[N] copies.
struct ConditionalSpectrum {
    double outcome = 0.0;
    std::vector<double> weights;
    std::vector<double> log_weights; ///< natural log of weights, finite even where weights underflow
    std::vector<std::uint64_t> multiplicities;
    double log_outcome_density = 0.0; ///< ln P(x)

    int n_max() const { return static_cast<int>(weights.size()) - 1; }
    /// sum_N d_N w_N
    double trace() const;
    /// Expanded, descending list of all nonzero-block eigenvalues.
    std::vector<double> eigenvalues() const;
};

/// One kappa point of a sweep.
struct SweepResult {
    double kappa = 0.0;
    double success_prob = 0.0;
    std::optional<double> mean_ratio; ///< Upsilon, absent when no outcome succeeds
    std::optional<double> efficiency; ///< Xi = 1 - 1 / Upsilon
    std::string error;                ///< non-empty when this point failed numerically

    bool defined() const { return mean_ratio.has_value(); }
};

struct EfficiencyResult {
    double success_prob = 0.0;
    std::optional<double> mean_ratio;
    std::optional<double> efficiency;
    bool defined() const { return mean_ratio.has_value(); }
};

/// Gamma(x) must exceed epsilon by this much to count as a success.
inline constexpr double kAcceptanceMargin = 1e-9;
/// Width to which success-set boundaries are bisected.
inline constexpr double kBoundaryResolution = 1e-10;

/// Ensemble + meter + cutoff, with the per-block log weights precomputed.
class PurificationModel {
  public:
    PurificationModel(SqueezedEnsemble ensemble, MeterModel meter, TruncationPolicy policy = {},
                      PointerPath path = PointerPath::closed_form);
    /// Explicit signal cutoff instead of the tail-tolerance choice.
    PurificationModel(SqueezedEnsemble ensemble, MeterModel meter, int n_max,
                      PointerPath path = PointerPath::closed_form, double series_tol = 1e-15);

    const SqueezedEnsemble& ensemble() const { return ensemble_; }
    const MeterModel& meter() const { return meter_; }
    int n_max() const { return n_max_; }

    double outcome_density(double x) const;
    ConditionalSpectrum conditional_spectrum(double x) const;
    double entanglement(double x) const;
    double initial_entanglement() const { return initial_entanglement_; }
    double gamma(double x) const;

    /// Sub-intervals of the grid span where gamma(x) > epsilon.
    std::vector<std::pair<double, double>> success_set(double epsilon, const OutcomeGrid& grid) const;
    double success_probability(double epsilon, const OutcomeGrid& grid) const;
    EfficiencyResult efficiency(double epsilon, const OutcomeGrid& grid) const;

  private:
    std::vector<double> log_block_terms(double x) const;

    SqueezedEnsemble ensemble_;
    MeterModel meter_;
    int n_max_;
    PointerPath path_;
    double series_tol_;
    std::vector<double> log_shape_;
    std::vector<std::uint64_t> multiplicity_;
    double initial_entanglement_;
};

/// -sum d_N w_N log2 w_N, compensated, with underflowing blocks dropped.
double spectrum_entropy(const ConditionalSpectrum& spectrum);

ConditionalSpectrum conditional_spectrum(const SqueezedEnsemble& ensemble, const MeterModel& model, double x,
                                         const TruncationPolicy& policy = {});
double entanglement(const SqueezedEnsemble& ensemble, const MeterModel& model, double x,
                    const TruncationPolicy& policy = {});
/// p [cosh^2 r log2 cosh^2 r - sinh^2 r log2 sinh^2 r], in ebits.
double initial_entanglement(const SqueezedEnsemble& ensemble);
double gamma_ratio(const SqueezedEnsemble& ensemble, const MeterModel& model, double x,
                   const TruncationPolicy& policy = {});
double success_probability(const SqueezedEnsemble& ensemble, const MeterModel& model, double epsilon,
                           const OutcomeGrid& grid, const TruncationPolicy& policy = {});
EfficiencyResult efficiency(const SqueezedEnsemble& ensemble, const MeterModel& model, double epsilon,
                            const OutcomeGrid& grid, const TruncationPolicy& policy = {});

/// Optional overrides applied to every kappa's default grid.
struct GridOverrides {
    std::optional<double> x_lo;
    std::optional<double> x_hi;
    std::optional<double> panel_width;
};

OutcomeGrid make_grid(const SqueezedEnsemble& ensemble, const MeterModel& model, const TruncationPolicy& policy,
                      const GridOverrides& overrides);

/// One row per kappa, in input order. Failures are recorded in the row.
std::vector<SweepResult> sweep_kappa(const SqueezedEnsemble& ensemble, double beta, double epsilon,
                                     const std::vector<double>& kappas, const TruncationPolicy& policy = {},
                                     const GridOverrides& overrides = {});

} // namespace ponder
