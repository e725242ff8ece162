#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "brute_force.hpp"
#include "ponder/cli.hpp"
#include "ponder/dynamics.hpp"
#include "ponder/error.hpp"
#include "ponder/protocol.hpp"
#include "ponder/selftest.hpp"

namespace ponder::cli {

namespace {

// Frozen values (independently computed in extended precision).
constexpr double kPriorR04[] = {0.7321177322464714, 0.21137880911719187, 0.04577235222130927};
constexpr double kE0R03 = 0.915899591104403;
constexpr double kE0R04 = 1.3920534401232407;

struct Outcome {
    bool passed;
    std::string detail;
};

std::string sci(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << v;
    return os.str();
}

Outcome within(double got, double want, double rel_tol) {
    const double err = std::abs(got - want) / std::max(std::abs(want), 1e-300);
    return {err <= rel_tol, "rel err " + sci(err) + " (tol " + sci(rel_tol) + ")"};
}

} // namespace

std::vector<CheckResult> run_selftest(const SelftestOptions& options) {
    const double f = 1.0 + options.fault;
    std::vector<CheckResult> results;
    auto run = [&](const std::string& module, const std::string& name, const std::function<Outcome()>& body) {
        CheckResult r;
        r.module = module;
        r.name = name;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const Outcome o = body();
            r.passed = o.passed;
            r.detail = o.detail;
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = std::string("threw: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        results.push_back(r);
    };

    run("fock", "prior matches frozen values (r=0.4)", [&] {
        const SqueezedEnsemble ens(0.4);
        double worst = 0.0;
        for (int n = 0; n < 3; ++n) {
            worst = std::max(worst, std::abs(total_number_prior(ens, n) / (kPriorR04[n] * f) - 1.0));
        }
        return Outcome{worst < 1e-12, "max rel err " + sci(worst)};
    });
    run("fock", "prior equals tuple enumeration (p=3)", [&] {
        const SqueezedEnsemble ens(0.7, 3);
        double worst = 0.0;
        for (int n = 0; n <= 10; ++n) {
            worst = std::max(worst, std::abs(total_number_prior(ens, n) / oracle::prior_by_enumeration(ens, n) - 1.0));
        }
        return Outcome{worst < 1e-12, "max rel err " + sci(worst)};
    });
    run("fock", "cutoff honours tail tolerance", [&] {
        const SqueezedEnsemble ens(0.4);
        const int n = choose_cutoff(ens, 1e-10);
        const bool ok = prior_tail(ens, n) <= 1e-10 && prior_tail(ens, n - 1) > 1e-10;
        return Outcome{ok && n == 13, "n_max = " + std::to_string(n)};
    });
    run("protocol", "E0 closed form (r=0.3, r=0.4)", [&] {
        const auto a = within(initial_entanglement(SqueezedEnsemble(0.3)), kE0R03 * f, 1e-12);
        const auto b = within(initial_entanglement(SqueezedEnsemble(0.4)), kE0R04 * f, 1e-12);
        return Outcome{a.passed && b.passed, a.detail + "; " + b.detail};
    });
    run("protocol", "E0 equals prior entropy sum", [&] {
        const SqueezedEnsemble ens(0.4);
        return within(initial_entanglement(ens), oracle::initial_entanglement_by_sum(ens), 1e-11);
    });
    run("meter", "closed-form pointer equals Hermite series", [&] {
        double worst = 0.0;
        for (double beta : {0.7, 3.0, MeterModel::infinite_beta}) {
            const MeterModel m(1.3, beta);
            for (int n = 0; n <= 4; ++n) {
                for (double x = -9.0; x <= 2.0; x += 0.37) {
                    worst = std::max(worst, std::abs(pointer_density_series(m, n, x) - pointer_density_gaussian(m, n, x)));
                }
            }
        }
        return Outcome{worst < 1e-12, "max abs diff " + sci(worst)};
    });
    run("meter", "outcome density integrates to one", [&] {
        const SqueezedEnsemble ens(0.4);
        double worst = 0.0;
        for (double kappa : {0.5, 3.0}) {
            const MeterModel m(kappa, 1.0);
            const OutcomeGrid grid = default_grid(ens, m);
            const double total = grid.integrate([&](double x) { return outcome_density(ens, m, x); });
            worst = std::max(worst, std::abs(total - 1.0 * f));
        }
        return Outcome{worst < 1e-10, "max |integral - 1| " + sci(worst)};
    });
    run("protocol", "spectrum entropy equals dense reduced state", [&] {
        const SqueezedEnsemble ens(0.4);
        const MeterModel m(0.8, 2.0);
        double worst = 0.0;
        for (double x : {-2.1, -0.4, 0.6}) {
            const PurificationModel model(ens, m, 6, PointerPath::series);
            const double dense = oracle::entropy_bits(oracle::eigenvalues_descending(oracle::reduced_b_state(ens, m, x, 6)));
            worst = std::max(worst, std::abs(model.entanglement(x) - dense));
        }
        return Outcome{worst < 1e-10, "max abs diff " + sci(worst)};
    });
    run("protocol", "Gamma = 1 without coupling", [&] {
        const SqueezedEnsemble ens(0.3);
        const PurificationModel model(ens, MeterModel(0.0, MeterModel::infinite_beta));
        double worst = 0.0;
        for (double x : {-1.0, 0.0, 0.5}) {
            worst = std::max(worst, std::abs(model.gamma(x) - 1.0 * f));
        }
        return Outcome{worst < 1e-9, "max |Gamma - 1| " + sci(worst)};
    });
    run("protocol", "strong coupling approaches resolved peaks", [&] {
        const SqueezedEnsemble ens(0.3);
        const MeterModel m(5.0, MeterModel::infinite_beta);
        const PurificationModel model(ens, m);
        const auto eff = model.efficiency(1.0, default_grid(ens, m));
        const auto lim = oracle::resolved_peak_limit(ens, 1.0);
        const double err = std::abs(eff.success_prob - lim.success_prob);
        return Outcome{eff.defined() && err < 1e-3, "|P_S - limit| " + sci(err)};
    });
    run("dynamics", "displaced thermal state is stationary", [&] {
        DynamicsParams p;
        p.g = 0.5;
        p.beta = 1.0;
        const int cut = choose_meter_cut(p.kappa(), 2, p.beta);
        double worst = 0.0;
        for (int n = 0; n <= 2; ++n) {
            worst = std::max(worst, stationarity_residual(p, n, cut));
        }
        return Outcome{worst < 1e-8, "max residual " + sci(worst)};
    });
    run("dynamics", "short evolution keeps trace and hermiticity", [&] {
        DynamicsParams p;
        p.g = 0.5;
        p.beta = 1.0;
        const Trajectory tr = evolve_block(p, 1, 1, 5.0, 0.01, EvolveOptions{0, 20});
        double trace_err = 0.0;
        double herm = 0.0;
        for (const auto& s : tr.samples) {
            trace_err = std::max(trace_err, std::abs(s.trace - 1.0 * f));
            herm = std::max(herm, s.hermiticity);
        }
        return Outcome{trace_err < 1e-10 && herm < 1e-10, "trace err " + sci(trace_err) + ", herm " + sci(herm)};
    });
    run("cli", "distribution output is deterministic and round-trips", [&] {
        const ResolvedConfig c = resolve(Command::distribution, RunConfig{});
        std::ostringstream a;
        std::ostringstream b;
        write_csv(distribution_table(c), a);
        write_csv(distribution_table(c), b);
        std::istringstream in(a.str());
        const Table back = read_csv(in);
        std::ostringstream again;
        write_csv(back, again);
        const bool ok = a.str() == b.str() && again.str() == a.str();
        return Outcome{ok, std::to_string(back.rows.size()) + " rows"};
    });
    return results;
}

void print_selftest(const std::vector<CheckResult>& results, std::ostream& out) {
    std::size_t failed = 0;
    double total = 0.0;
    for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(9) << r.module << std::setw(52) << r.name
            << std::right << std::fixed << std::setprecision(2) << std::setw(7) << r.seconds << "s  " << r.detail
            << '\n';
        failed += r.passed ? 0 : 1;
        total += r.seconds;
    }
    out << std::defaultfloat << results.size() - failed << "/" << results.size() << " checks passed in "
        << std::fixed << std::setprecision(2) << total << "s" << std::defaultfloat << '\n';
}

} // namespace ponder::cli
