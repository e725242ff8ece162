#include "ponder/fock.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ponder/error.hpp"

namespace ponder {

double lambda_from_r(double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
        throw ParameterError("squeezing parameter r must be finite and >= 0, got " + std::to_string(r));
    }
    return std::tanh(r);
}

SqueezedEnsemble::SqueezedEnsemble(double r, int pairs) : r_(r), lambda_(lambda_from_r(r)), pairs_(pairs) {
    if (pairs < 1) {
        throw ParameterError("pair count must be >= 1, got " + std::to_string(pairs));
    }
}

double pair_amplitude(const SqueezedEnsemble& ensemble, int n) {
    if (n < 0) {
        throw ParameterError("photon number must be >= 0");
    }
    const long double lam = ensemble.lambda();
    return static_cast<double>(std::sqrt(1.0L - lam * lam) * std::pow(lam, n));
}

std::uint64_t block_multiplicity(int pairs, int total) {
    if (pairs < 1 || total < 0) {
        throw ParameterError("block_multiplicity needs pairs >= 1 and N >= 0");
    }
    // C(N + p - 1, k) built incrementally; each partial product is itself a binomial.
    const int k = pairs - 1;
    std::uint64_t c = 1;
    for (int i = 1; i <= k; ++i) {
        c = c * static_cast<std::uint64_t>(total + i) / static_cast<std::uint64_t>(i);
    }
    return c;
}

namespace {

long double prior_ld(const SqueezedEnsemble& ensemble, int total) {
    const long double lam2 = static_cast<long double>(ensemble.lambda()) * ensemble.lambda();
    const long double shape = std::pow(1.0L - lam2, ensemble.pairs()) * std::pow(lam2, total);
    return static_cast<long double>(block_multiplicity(ensemble.pairs(), total)) * shape;
}

} // namespace

double total_number_prior(const SqueezedEnsemble& ensemble, int total) {
    if (total < 0) {
        throw ParameterError("total photon number must be >= 0");
    }
    return static_cast<double>(prior_ld(ensemble, total));
}

double log_prior_shape(const SqueezedEnsemble& ensemble, int total) {
    const double lam = ensemble.lambda();
    const double base = ensemble.pairs() * std::log1p(-lam * lam);
    if (total == 0) {
        return base;
    }
    if (lam == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return base + 2.0 * total * std::log(lam);
}

double prior_tail(const SqueezedEnsemble& ensemble, int total) {
    if (ensemble.lambda() == 0.0) {
        return 0.0;
    }
    if (ensemble.lambda() >= 1.0) {
        return 1.0;
    }
    // Terms rise while lambda^2 (M + p) / (M + 1) > 1, then decay geometrically.
    long double tail = 0.0L;
    for (int m = total + 1;; ++m) {
        const long double term = prior_ld(ensemble, m);
        tail += term;
        const long double ratio = static_cast<long double>(ensemble.lambda()) * ensemble.lambda() *
                                  (m + ensemble.pairs()) / (m + 1);
        if (ratio < 1.0L && term < tail * 1e-20L) {
            break;
        }
        if (term == 0.0L && ratio < 1.0L) {
            break;
        }
    }
    return static_cast<double>(tail);
}

int choose_cutoff(const SqueezedEnsemble& ensemble, double tail_tol) {
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
        throw ParameterError("tail_tol must lie in (0, 1)");
    }
    if (ensemble.lambda() >= 1.0) {
        throw ParameterError("lambda = tanh(r) rounds to 1; the prior does not converge");
    }
    int n = 0;
    while (prior_tail(ensemble, n) >= tail_tol) {
        ++n;
        if (n > 100000) {
            throw NumericalError("choose_cutoff: no cutoff below 100000 meets tail_tol");
        }
    }
    return n;
}

} // namespace ponder
