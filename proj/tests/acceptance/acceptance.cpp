// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "brute_force.hpp"
#include "ponder/dynamics.hpp"
#include "ponder/error.hpp"
#include "ponder/protocol.hpp"
#include "ponder/quadrature.hpp"

using namespace ponder;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Pinned tolerances.
constexpr double kPeakPositionTol = 0.01;
constexpr double kPeakMassTol = 1e-3;
constexpr double kEntanglementTol = 1e-9;
constexpr double kGammaUnitTol = 1e-9;
constexpr double kResolvedGammaTol = 1e-3;
constexpr double kSeriesTol = 1e-10;
constexpr double kBruteForceTol = 1e-9;
constexpr double kAsymptoteTol = 5e-3;
constexpr double kDensityNormTol = 1e-6;
constexpr double kSpectrumTraceTol = 1e-10;

struct Verdict {
    bool passed;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double local_argmax(const std::function<double(double)>& f, double lo, double hi, double step) {
    double best_x = lo;
    double best = -1.0;
    for (double x = lo; x <= hi; x += step) {
        const double v = f(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    return best_x;
}

Verdict criterion1() {
    const SqueezedEnsemble ens(0.4, 2);
    const MeterModel m(3.0, kInf);
    const PurificationModel model(ens, m);
    const double lambda = std::tanh(0.4);
    const double sigma = m.sigma();
    auto p = [&](double x) { return model.outcome_density(x); };

    bool ok = true;
    std::string detail;
    double worst_pos = 0.0;
    double worst_clipped = 0.0;
    double worst_literal = 0.0;
    for (int n = 0; n <= 2; ++n) {
        const double c = -std::sqrt(2.0) * 3.0 * n;
        const double xm = local_argmax(p, c - 0.5, c + 0.5, 1e-4);
        // Must be a genuine interior local maximum.
        const bool local = p(xm) >= p(xm - 1e-4) && p(xm) >= p(xm + 1e-4) && xm > c - 0.49 && xm < c + 0.49;
        ok &= local;
        worst_pos = std::max(worst_pos, std::abs(xm - c));

        const double expected = (n + 1) * std::pow(1 - lambda * lambda, 2) * std::pow(lambda, 2 * n);
        const double lo = std::max(c - 4 * sigma, c - 0.5 * std::sqrt(2.0) * 3.0);
        const double hi = n == 0 ? c + 4 * sigma : std::min(c + 4 * sigma, c + 0.5 * std::sqrt(2.0) * 3.0);
        const double clipped = integrate_panels(p, lo, hi, 0.25 * sigma);
        const double literal = integrate_panels(p, c - 4 * sigma, c + 4 * sigma, 0.25 * sigma);
        worst_clipped = std::max(worst_clipped, std::abs(clipped - expected));
        worst_literal = std::max(worst_literal, std::abs(literal - expected));
        detail += fmt(" N=%.0f:", n) + fmt("mass=%.6f", clipped) + fmt("/expected %.6f", expected);
    }
    ok &= worst_pos < kPeakPositionTol && worst_clipped < kPeakMassTol;
    detail = fmt("max |x_peak - centre| = %.1e", worst_pos) + fmt(" (tol %.0e);", kPeakPositionTol) +
             fmt(" clipped-window max mass err = %.2e", worst_clipped) + fmt(" (tol %.0e);", kPeakMassTol) +
             fmt(" literal +-4sigma windows max err = %.2e (overlapping, informational);", worst_literal) + detail;
    return {ok, detail};
}

Verdict criterion2() {
    const SqueezedEnsemble ens(0.3, 2);
    const double e0 = initial_entanglement(ens);
    const double oracle_e0 = oracle::initial_entanglement_by_sum(ens);
    const MeterModel m(0.0, kInf);
    const PurificationModel model(ens, m);
    double worst = std::abs(e0 - oracle_e0);
    for (double x = -3.0; x <= 3.0; x += 0.25) {
        worst = std::max(worst, std::abs(model.entanglement(x) - e0));
    }
    return {worst < kEntanglementTol, fmt("E0 = %.12f", e0) + fmt(" (entropy-sum oracle %.12f);", oracle_e0) +
                                          fmt(" max |E(x; kappa=0) - E0| = %.2e", worst) +
                                          fmt(" (tol %.0e)", kEntanglementTol)};
}

Verdict criterion3() {
    const SqueezedEnsemble ens(0.3, 2);
    const double e0 = initial_entanglement(ens);

    const MeterModel m0(0.0, kInf);
    const PurificationModel flat(ens, m0);
    double worst_flat = 0.0;
    for (double x : default_grid(ens, m0).nodes) {
        worst_flat = std::max(worst_flat, std::abs(flat.gamma(x) - 1.0));
    }

    const PurificationModel k3(ens, MeterModel(3.0, kInf));
    const double g0 = k3.gamma(0.0);

    const MeterModel m4(4.0, kInf);
    const PurificationModel k4(ens, m4);
    double worst_peak = 0.0;
    for (int n = 1; n <= 2; ++n) {
        worst_peak = std::max(worst_peak, std::abs(k4.gamma(m4.center(n)) - std::log2(n + 1.0) / e0));
    }
    const bool ok = worst_flat < kGammaUnitTol && g0 < 1.0 && worst_peak < kResolvedGammaTol;
    return {ok, fmt("kappa=0 max |Gamma-1| = %.2e;", worst_flat) + fmt(" kappa=3 Gamma(0) = %.3e;", g0) +
                    fmt(" kappa=4 max |Gamma(peak) - log2(N+1)/E0| = %.2e", worst_peak) +
                    fmt(" (tol %.0e)", kResolvedGammaTol)};
}

Verdict criterion4() {
    double worst = 0.0;
    for (double kappa : {0.5, 3.0}) {
        for (double beta : {0.5, 1.0, 2.0, kInf}) {
            const MeterModel m(kappa, beta);
            for (int n = 0; n <= 3; ++n) {
                for (int i = 0; i <= 400; ++i) {
                    const double x = -15.0 + 0.05 * i;
                    worst = std::max(worst, std::abs(pointer_density_series(m, n, x) - pointer_density_gaussian(m, n, x)));
                }
            }
        }
    }
    return {worst < kSeriesTol, fmt("max |series - closed form| = %.2e", worst) + fmt(" (tol %.0e)", kSeriesTol)};
}

Verdict criterion5() {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> ur(0.1, 0.9), uk(0.0, 3.0), ub(0.3, 5.0), uu(0.0, 1.0);
    std::uniform_int_distribution<int> un(1, 5);
    double worst_eig = 0.0;
    double worst_entropy = 0.0;
    for (int i = 0; i < 20; ++i) {
        const SqueezedEnsemble ens(ur(rng), 2);
        const int n_max = un(rng);
        const MeterModel m(uk(rng), i % 4 == 0 ? kInf : ub(rng));
        const double x = m.center(n_max) * uu(rng) + 1.0 - 2.0 * uu(rng);
        const PurificationModel model(ens, m, n_max);
        const auto spec = model.conditional_spectrum(x);
        const auto dense = oracle::eigenvalues_descending(oracle::reduced_b_state(ens, m, x, n_max));
        auto blocks = spec.eigenvalues();
        blocks.resize(dense.size(), 0.0);
        for (std::size_t k = 0; k < dense.size(); ++k) {
            worst_eig = std::max(worst_eig, std::abs(dense[k] - blocks[k]));
        }
        worst_entropy = std::max(worst_entropy, std::abs(oracle::entropy_bits(dense) - model.entanglement(x)));
    }
    const bool ok = worst_eig < kBruteForceTol && worst_entropy < kBruteForceTol;
    return {ok, fmt("20 samples: max eigenvalue diff = %.2e,", worst_eig) +
                    fmt(" max E(x) diff = %.2e", worst_entropy) + fmt(" (tol %.0e)", kBruteForceTol)};
}

Verdict criterion6() {
    DynamicsParams p;
    p.omega = 1.0;
    p.g = 0.5;
    p.gamma = 0.2;
    p.beta = 1.0;
    const SteadyStateReport report = steady_state_report(p, default_sectors());
    double residual = 0.0;
    double fidelity = 1.0;
    double ratio01 = 0.0;
    for (const auto& s : report.sectors) {
        if (s.ket_total == s.bra_total) {
            residual = std::max(residual, s.residual);
            fidelity = std::min(fidelity, s.final_fidelity);
        } else if (s.ket_total == 0 && s.bra_total == 1) {
            ratio01 = s.norm_ratio;
        }
    }
    const int cut = report.sectors.front().trajectory.meter_cut;
    const bool ok = report.passed() && residual < 1e-8 && fidelity >= 0.999 && ratio01 < 0.05;
    return {ok, fmt("max residual = %.2e (tol 1e-08);", residual) + fmt(" min fidelity at t=40/gamma = %.12f", fidelity) +
                    fmt(" (tol 0.999); (0,1) trace-norm ratio = %.2e (tol 0.05);", ratio01) +
                    fmt(" meter_cut = %.0f", cut) + " diffusion=" + to_string(p.diffusion)};
}

Verdict criterion7() {
    const SqueezedEnsemble ens(0.3, 2);
    std::vector<double> kappas;
    for (int i = 1; i <= 20; ++i) kappas.push_back(0.25 * i);
    const auto s1 = sweep_kappa(ens, kInf, 1.0, kappas);
    const auto s15 = sweep_kappa(ens, kInf, 1.5, kappas);

    bool ok = true;
    std::size_t best = 0;
    for (std::size_t i = 0; i < s1.size(); ++i) {
        ok &= s1[i].error.empty() && s15[i].error.empty() && s1[i].defined();
        if (s1[i].defined() && *s1[i].efficiency > *s1[best].efficiency) best = i;
    }
    if (!ok) return {false, "sweep produced failed or undefined rows"};
    const double xi_first = *s1.front().efficiency;
    const double xi_last = *s1.back().efficiency;
    const bool interior = *s1[best].efficiency > xi_first && *s1[best].efficiency > xi_last;

    int monotone_violations = 0;
    for (std::size_t i = 0; i < s1.size(); ++i) {
        if (s15[i].success_prob > s1[i].success_prob) ++monotone_violations;
    }

    const auto lim = oracle::resolved_peak_limit(ens, 1.0);
    const double dp = std::abs(s1.back().success_prob - lim.success_prob);
    const double dxi = std::abs(xi_last - lim.efficiency);
    ok = interior && monotone_violations == 0 && dp < kAsymptoteTol && dxi < kAsymptoteTol;
    return {ok, fmt("Xi max %.5f", *s1[best].efficiency) + fmt(" at kappa=%.2f", s1[best].kappa) +
                    fmt(" (Xi(0.25)=%.5f,", xi_first) + fmt(" Xi(5)=%.5f);", xi_last) +
                    fmt(" P_S(eps=1.5) > P_S(eps=1) at %.0f points;", monotone_violations) +
                    fmt(" kappa=5: P_S=%.5f", s1.back().success_prob) + fmt(" vs limit %.5f,", lim.success_prob) +
                    fmt(" Xi vs limit %.5f", lim.efficiency) + fmt(" (tol %.0e)", kAsymptoteTol)};
}

Verdict criterion8() {
    double worst_density = 0.0;
    double worst_trace = 0.0;
    int configs = 0;
    for (double r : {0.3, 0.4}) {
        const SqueezedEnsemble ens(r, 2);
        for (double kappa : {0.0, 0.5, 1.0, 3.0, 5.0}) {
            for (double beta : {0.5, 1.0, 2.0, kInf}) {
                const MeterModel m(kappa, beta);
                const PurificationModel model(ens, m);
                const OutcomeGrid grid = default_grid(ens, m);
                worst_density = std::max(worst_density, std::abs(grid.integrate([&](double x) {
                    return model.outcome_density(x);
                }) - 1.0));
                for (std::size_t i = 0; i < grid.size(); i += 7) {
                    try {
                        worst_trace = std::max(worst_trace, std::abs(model.conditional_spectrum(grid.nodes[i]).trace() - 1.0));
                    } catch (const DegenerateOutcomeError&) {
                    }
                }
                ++configs;
            }
        }
    }
    const bool ok = worst_density < kDensityNormTol && worst_trace < kSpectrumTraceTol;
    return {ok, fmt("%.0f configurations: max |int P - 1| = ", configs) + fmt("%.2e", worst_density) +
                    fmt(" (tol %.0e);", kDensityNormTol) + fmt(" max |sum d_N w_N - 1| = %.2e", worst_trace) +
                    fmt(" (tol %.0e)", kSpectrumTraceTol)};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"1 three-peak outcome density", criterion1},
        {"2 initial entanglement consistency", criterion2},
        {"3 Gamma properties", criterion3},
        {"4 series vs closed-form pointer", criterion4},
        {"5 brute-force reduced state", criterion5},
        {"6 meter steady state", criterion6},
        {"7 efficiency sweep shape", criterion7},
        {"8 normalisations", criterion8},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %s (%.1fs): %s\n", v.passed ? "PASS" : "FAIL", name.c_str(), secs,
                    v.detail.c_str());
        failed += v.passed ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
