#include "brute_force.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ponder/error.hpp"

namespace ponder::oracle {

std::vector<std::vector<int>> compositions(int pairs, int total) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(pairs, 0);
    std::function<void(int, int)> rec = [&](int slot, int left) {
        if (slot == pairs - 1) {
            cur[slot] = left;
            out.push_back(cur);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            cur[slot] = k;
            rec(slot + 1, left - k);
        }
    };
    rec(0, total);
    return out;
}

double prior_by_enumeration(const SqueezedEnsemble& ensemble, int total) {
    long double sum = 0.0L;
    for (const auto& tuple : compositions(ensemble.pairs(), total)) {
        long double amp = 1.0L;
        for (int n : tuple) {
            amp *= pair_amplitude(ensemble, n);
        }
        sum += amp * amp;
    }
    return static_cast<double>(sum);
}

namespace {

int tuple_index(const std::vector<int>& tuple, int n_max) {
    int idx = 0;
    for (int n : tuple) {
        idx = idx * (n_max + 1) + n;
    }
    return idx;
}

} // namespace

Eigen::MatrixXd reduced_b_state(const SqueezedEnsemble& ensemble, const MeterModel& meter, double x, int n_max) {
    const int p = ensemble.pairs();
    int side = 1;
    for (int i = 0; i < p; ++i) {
        side *= n_max + 1;
    }
    const int dim = side * side;
    // Full projected A+B state: sum_N c_N |Phi_N><Phi_N| with |Phi_N> = sum_t |t>_A |t>_B.
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(dim, dim);
    for (int total = 0; total <= n_max; ++total) {
        double coeff = pointer_density_series(meter, total, x);
        const auto tuples = compositions(p, total);
        // Amplitude product of one tuple is the same for all tuples with this total.
        long double amp = 1.0L;
        for (int n : tuples.front()) {
            amp *= pair_amplitude(ensemble, n);
        }
        coeff *= static_cast<double>(amp * amp);
        for (const auto& ket : tuples) {
            const int k = tuple_index(ket, n_max);
            for (const auto& bra : tuples) {
                const int b = tuple_index(bra, n_max);
                full(k * side + k, b * side + b) += coeff;
            }
        }
    }
    const double norm = full.trace();
    if (!(norm > 0.0)) {
        throw DegenerateOutcomeError(x);
    }
    full /= norm;
    // Tr_A: rho_B(j, l) = sum_i full(i * side + j, i * side + l).
    Eigen::MatrixXd reduced = Eigen::MatrixXd::Zero(side, side);
    for (int i = 0; i < side; ++i) {
        reduced += full.block(i * side, i * side, side, side);
    }
    return reduced;
}

std::vector<double> eigenvalues_descending(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

double entropy_bits(const std::vector<double>& eigenvalues) {
    long double s = 0.0L;
    for (double v : eigenvalues) {
        if (v > 0.0) {
            s -= static_cast<long double>(v) * std::log2(static_cast<long double>(v));
        }
    }
    return static_cast<double>(s);
}

double initial_entanglement_by_sum(const SqueezedEnsemble& ensemble) {
    const long double lam2 = static_cast<long double>(ensemble.lambda()) * ensemble.lambda();
    const long double base = std::pow(1.0L - lam2, ensemble.pairs());
    long double s = 0.0L;
    for (int n = 0; n < 100000; ++n) {
        const long double w = base * std::pow(lam2, n);
        if (w == 0.0L) {
            break;
        }
        const long double d = static_cast<long double>(block_multiplicity(ensemble.pairs(), n));
        const long double term = -d * w * std::log2(w);
        s += term;
        if (n > 10 && term < 1e-22L) {
            break;
        }
    }
    return static_cast<double>(s);
}

ResolvedPeaks resolved_peak_limit(const SqueezedEnsemble& ensemble, double epsilon, double tail_tol) {
    const double e0 = initial_entanglement_by_sum(ensemble);
    const int n_max = choose_cutoff(ensemble, tail_tol);
    long double mass = 0.0L;
    long double weighted = 0.0L;
    for (int n = 0; n <= n_max; ++n) {
        const long double ratio = std::log2(static_cast<long double>(block_multiplicity(ensemble.pairs(), n))) / e0;
        if (ratio <= epsilon) {
            continue;
        }
        const long double prior = prior_by_enumeration(ensemble, n);
        mass += prior;
        weighted += prior * ratio;
    }
    const double upsilon = static_cast<double>(weighted / mass);
    return {static_cast<double>(mass), upsilon, 1.0 - 1.0 / upsilon};
}

} // namespace ponder::oracle
