#pragma once

#include <cstdint>

namespace ponder {

/// Product of `pairs` identical two-mode squeezed vacua, one A mode and one B
/// mode per pair. Amplitudes are sqrt(1 - lambda^2) lambda^n with lambda = tanh(r).
class SqueezedEnsemble {
  public:
    explicit SqueezedEnsemble(double r, int pairs = 2);

    double r() const { return r_; }
    double lambda() const { return lambda_; }
    int pairs() const { return pairs_; }

  private:
    double r_;
    double lambda_;
    int pairs_;
};

/// Numerical cutoffs shared by the meter, protocol and dynamics modules.
struct TruncationPolicy {
    double tail_tol = 1e-14;   ///< prior mass allowed above n_max
    double series_tol = 1e-15; ///< absolute truncation error of the Hermite series
    int meter_cut = 0;         ///< meter Fock cutoff; 0 selects one automatically
};

double lambda_from_r(double r);

/// sqrt(1 - lambda^2) lambda^n, the amplitude of |n>_a |n>_b in one pair.
double pair_amplitude(const SqueezedEnsemble& ensemble, int n);

/// Number of ways to distribute N photons over p modes: C(N + p - 1, p - 1).
std::uint64_t block_multiplicity(int pairs, int total);

/// Probability that the A side holds N photons in total.
double total_number_prior(const SqueezedEnsemble& ensemble, int total);

/// Natural log of the single-tuple weight (1 - lambda^2)^p lambda^{2N}; -inf
/// for N > 0 at lambda = 0.
double log_prior_shape(const SqueezedEnsemble& ensemble, int total);

/// Prior mass strictly above `total`, summed directly (no 1 - sum cancellation).
double prior_tail(const SqueezedEnsemble& ensemble, int total);

/// Smallest N whose prior tail is below tail_tol.
int choose_cutoff(const SqueezedEnsemble& ensemble, double tail_tol);

} // namespace ponder
