#pragma once

// Reference computations that avoid the production code paths: explicit
// tuple enumeration, dense density matrices and direct entropy sums.

#include <vector>

#include <Eigen/Dense>

#include "ponder/fock.hpp"
#include "ponder/meter.hpp"

namespace ponder::oracle {

/// All p-tuples of photon numbers with the given total.
std::vector<std::vector<int>> compositions(int pairs, int total);

/// Prior of total N summed over explicit tuples of products of pair amplitudes.
double prior_by_enumeration(const SqueezedEnsemble& ensemble, int total);

/// Reduced B-side state after outcome x, built as a dense matrix on
/// prod_i {0..n_max} by projecting the full A+B state and tracing out A.
/// Pointer densities come from the Hermite series.
Eigen::MatrixXd reduced_b_state(const SqueezedEnsemble& ensemble, const MeterModel& meter, double x, int n_max);

/// Eigenvalues of a dense symmetric matrix, descending.
std::vector<double> eigenvalues_descending(const Eigen::MatrixXd& m);

/// -sum lambda log2 lambda over a plain eigenvalue list.
double entropy_bits(const std::vector<double>& eigenvalues);

/// Initial entanglement as the entropy of the prior eigenvalues, summed to convergence.
double initial_entanglement_by_sum(const SqueezedEnsemble& ensemble);

/// Resolved-peak limit of the success statistics: each peak N carries its
/// prior mass and a uniform block spectrum, so Gamma_N = log2(d_N) / E0, and it
/// succeeds when Gamma_N > epsilon.
struct ResolvedPeaks {
    double success_prob;
    double mean_ratio;
    double efficiency;
};
ResolvedPeaks resolved_peak_limit(const SqueezedEnsemble& ensemble, double epsilon = 1.0, double tail_tol = 1e-16);

} // namespace ponder::oracle
