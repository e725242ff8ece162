#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "ponder/cli.hpp"
#include "ponder/error.hpp"
#include "ponder/protocol.hpp"
#include "ponder/selftest.hpp"

namespace ponder::cli {

namespace {

TruncationPolicy policy_of(const ResolvedConfig& c) {
    TruncationPolicy p;
    p.tail_tol = c.tail_tol;
    p.series_tol = c.series_tol;
    return p;
}

GridOverrides overrides_of(const ResolvedConfig& c) {
    return GridOverrides{c.x_min, c.x_max, c.x_step};
}

void emit(const Table& table, const ResolvedConfig& c, std::ostream& out) {
    auto write = [&](std::ostream& os) {
        if (c.format == OutputFormat::json) {
            write_json(table, os);
        } else {
            write_csv(table, os);
        }
    };
    if (c.output) {
        std::ofstream file(*c.output);
        if (!file) {
            throw ParameterError("cannot open output file '" + *c.output + "'");
        }
        write(file);
    } else {
        write(out);
    }
}

DynamicsParams dynamics_params(const ResolvedConfig& c) {
    DynamicsParams p;
    p.omega = 1.0;
    p.g = c.kappa.front();
    p.gamma = c.gamma;
    p.beta = c.beta;
    p.diffusion = c.diffusion;
    return p;
}

Table trajectory_table(const SteadyStateReport& report) {
    Table t;
    t.columns = {"N", "M", "t", "trace_re", "trace_im", "trace_norm", "fidelity"};
    for (const auto& s : report.sectors) {
        for (const auto& sample : s.trajectory.samples) {
            t.rows.push_back({double(s.ket_total), double(s.bra_total), sample.time, sample.trace.real(),
                              sample.trace.imag(), sample.trace_norm, sample.fidelity});
        }
    }
    return t;
}

int dynamics_check(const ResolvedConfig& c, std::ostream& out) {
    const DynamicsParams params = dynamics_params(c);
    SteadyStateRun run;
    run.t_final = c.t_final.value_or(0.0);
    run.dt = c.dt;
    run.meter_cut = c.meter_cut;
    const SteadyStateReport report = steady_state_report(params, default_sectors(), run);

    const auto& first = report.sectors.front().trajectory;
    out << "dynamics-check kappa=" << format_number(params.kappa()) << " beta=" << format_number(params.beta)
        << " gamma=" << format_number(params.gamma) << " diffusion=" << to_string(params.diffusion)
        << " meter_cut=" << first.meter_cut << " dt=" << format_number(first.dt)
        << " t_final=" << format_number(first.samples.back().time) << '\n';
    for (const auto& s : report.sectors) {
        out << "  sector (" << s.ket_total << "," << s.bra_total << ") " << (s.passed ? "PASS" : "FAIL");
        if (s.ket_total == s.bra_total) {
            out << "  residual=" << std::scientific << std::setprecision(3) << s.residual
                << " fidelity=" << std::fixed << std::setprecision(9) << s.final_fidelity << std::scientific
                << std::setprecision(3) << " trace_err=" << s.trace_error << " herm=" << s.hermiticity
                << " deficit " << s.initial_deficit << " -> " << s.final_deficit;
        } else {
            out << "  trace_norm_ratio=" << std::scientific << std::setprecision(3) << s.norm_ratio;
        }
        out << std::defaultfloat << '\n';
        for (const auto& f : s.failures) {
            out << "    " << f << '\n';
        }
    }
    out << (report.passed() ? "dynamics-check: PASS" : "dynamics-check: FAIL") << '\n';

    if (c.output) {
        std::ofstream file(*c.output);
        if (!file) {
            throw ParameterError("cannot open output file '" + *c.output + "'");
        }
        write_csv(trajectory_table(report), file);
    }
    return report.passed() ? kExitOk : kExitSelftestFailed;
}

} // namespace

Table distribution_table(const ResolvedConfig& c) {
    const SqueezedEnsemble ens(c.r, c.pairs);
    const MeterModel meter(c.kappa.front(), c.beta);
    const TruncationPolicy policy = policy_of(c);
    const PurificationModel model(ens, meter, policy);
    const OutcomeGrid grid = make_grid(ens, meter, policy, overrides_of(c));
    Table t;
    t.columns = {"x", "P"};
    t.rows.reserve(grid.size());
    for (double x : grid.nodes) {
        t.rows.push_back({x, model.outcome_density(x)});
    }
    return t;
}

Table gamma_surface_table(const ResolvedConfig& c) {
    const SqueezedEnsemble ens(c.r, c.pairs);
    const TruncationPolicy policy = policy_of(c);
    const OutcomeGrid grid = OutcomeGrid::uniform(c.x_min.value_or(-15.0), c.x_max.value_or(3.0), c.x_step.value_or(0.05));

    using Rows = std::vector<std::vector<std::optional<double>>>;
    std::vector<std::future<Rows>> pending;
    for (double kappa : c.kappa) {
        pending.push_back(std::async(std::launch::async, [&, kappa] {
            const PurificationModel model(ens, MeterModel(kappa, c.beta), policy);
            Rows rows;
            for (double x : grid.nodes) {
                std::optional<double> g;
                try {
                    g = model.gamma(x);
                } catch (const DegenerateOutcomeError&) {
                }
                rows.push_back({x, kappa, g});
            }
            return rows;
        }));
    }
    Table t;
    t.columns = {"x", "kappa", "Gamma"};
    for (auto& f : pending) {
        for (auto& row : f.get()) {
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

Table sweep_table(const ResolvedConfig& c) {
    const SqueezedEnsemble ens(c.r, c.pairs);
    const auto results = sweep_kappa(ens, c.beta, c.epsilon, c.kappa, policy_of(c), overrides_of(c));
    Table t;
    t.columns = {"kappa", "P_S", "Upsilon", "Xi", "defined"};
    std::string errors;
    for (const auto& r : results) {
        if (!r.error.empty()) {
            errors += " kappa=" + format_number(r.kappa) + ": " + r.error + ";";
        }
        t.rows.push_back({r.kappa, r.success_prob, r.mean_ratio, r.efficiency, r.defined() ? 1.0 : 0.0});
    }
    if (!errors.empty()) {
        throw NumericalError("sweep failed at" + errors);
    }
    return t;
}

int run_command(Command command, const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        const ResolvedConfig c = resolve(command, config);
        switch (command) {
        case Command::distribution:
            emit(distribution_table(c), c, out);
            return kExitOk;
        case Command::gamma_surface:
            emit(gamma_surface_table(c), c, out);
            return kExitOk;
        case Command::sweep:
            emit(sweep_table(c), c, out);
            return kExitOk;
        case Command::dynamics_check:
            return dynamics_check(c, out);
        case Command::selftest: {
            const auto results = run_selftest();
            print_selftest(results, out);
            for (const auto& r : results) {
                if (!r.passed) return kExitSelftestFailed;
            }
            return kExitOk;
        }
        }
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumericalError;
    } catch (const std::exception& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumericalError;
    }
    return kExitConfigError;
}

namespace {

struct FlagValues {
    std::optional<double> r;
    std::optional<int> pairs;
    std::optional<std::string> kappa;
    std::optional<std::string> beta;
    std::optional<double> epsilon;
    std::optional<double> x_min;
    std::optional<double> x_max;
    std::optional<double> x_step;
    std::optional<double> tail_tol;
    std::optional<double> series_tol;
    std::optional<std::string> output;
    std::optional<std::string> format;
    std::optional<std::string> config;
    std::optional<double> gamma;
    std::optional<double> dt;
    std::optional<double> t_final;
    std::optional<int> meter_cut;
    std::optional<std::string> diffusion;
};

void add_common(CLI::App* sub, FlagValues& v) {
    sub->add_option("--r", v.r, "squeezing parameter r >= 0");
    sub->add_option("--pairs", v.pairs, "number of mode pairs p");
    sub->add_option("--kappa", v.kappa, "coupling g/omega, or a comma-separated list");
    sub->add_option("--beta", v.beta, "meter inverse temperature, or 'inf'");
    sub->add_option("--tail-tol", v.tail_tol, "probability mass allowed beyond the signal cutoff");
    sub->add_option("--series-tol", v.series_tol, "truncation tolerance of the pointer series");
    sub->add_option("--output", v.output, "write data here instead of stdout");
    sub->add_option("--format", v.format, "csv or json");
    sub->add_option("--config", v.config, "JSON file with defaults for any flag");
}

RunConfig to_config(const FlagValues& v) {
    RunConfig c;
    c.r = v.r;
    c.pairs = v.pairs;
    if (v.kappa) c.kappa = parse_kappa_list(*v.kappa);
    if (v.beta) c.beta = parse_beta(*v.beta);
    c.epsilon = v.epsilon;
    c.x_min = v.x_min;
    c.x_max = v.x_max;
    c.x_step = v.x_step;
    c.tail_tol = v.tail_tol;
    c.series_tol = v.series_tol;
    c.output = v.output;
    if (v.format) c.format = parse_format(*v.format);
    c.gamma = v.gamma;
    c.dt = v.dt;
    c.t_final = v.t_final;
    c.meter_cut = v.meter_cut;
    if (v.diffusion) c.diffusion = parse_diffusion(*v.diffusion);
    return c;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Entanglement purification with a ponderomotive meter"};
    app.name("ponder");
    app.require_subcommand(1);

    FlagValues v;
    bool inject_fault = false;

    auto* dist = app.add_subcommand("distribution", "outcome density P(x) on the integration grid");
    add_common(dist, v);
    dist->add_option("--x-min", v.x_min, "lower grid bound");
    dist->add_option("--x-max", v.x_max, "upper grid bound");
    dist->add_option("--x-step", v.x_step, "quadrature panel width");

    auto* surf = app.add_subcommand("gamma-surface", "Gamma(x) over a uniform x grid for each kappa");
    add_common(surf, v);
    surf->add_option("--x-min", v.x_min, "lower grid bound (default -15)");
    surf->add_option("--x-max", v.x_max, "upper grid bound (default 3)");
    surf->add_option("--x-step", v.x_step, "grid step (default 0.05)");

    auto* sweep = app.add_subcommand("sweep", "success probability, mean gain and efficiency versus kappa");
    add_common(sweep, v);
    sweep->add_option("--epsilon", v.epsilon, "purification threshold (>= 1)");
    sweep->add_option("--x-min", v.x_min, "lower grid bound");
    sweep->add_option("--x-max", v.x_max, "upper grid bound");
    sweep->add_option("--x-step", v.x_step, "quadrature panel width");

    auto* dyn = app.add_subcommand("dynamics-check", "evolve the meter master equation to its steady state");
    add_common(dyn, v);
    dyn->add_option("--gamma", v.gamma, "damping rate (units of omega)");
    dyn->add_option("--dt", v.dt, "RK4 step");
    dyn->add_option("--t-final", v.t_final, "evolution time (default 40/gamma)");
    dyn->add_option("--meter-cut", v.meter_cut, "meter Fock cutoff (0 = automatic)");
    dyn->add_option("--diffusion", v.diffusion, "quantum-thermal or high-temperature");

    auto* self = app.add_subcommand("selftest", "fast internal consistency checks");
    self->add_flag("--inject-fault", inject_fault, "perturb reference constants; the run must fail");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    if (self->parsed()) {
        const auto results = run_selftest(SelftestOptions{inject_fault ? 1e-6 : 0.0});
        print_selftest(results, out);
        for (const auto& r : results) {
            if (!r.passed) return kExitSelftestFailed;
        }
        return kExitOk;
    }

    Command command = Command::distribution;
    for (const auto* sub : app.get_subcommands()) {
        command = parse_command(sub->get_name());
    }
    RunConfig config;
    try {
        const RunConfig flags = to_config(v);
        if (v.config) {
            config = overlay(load_config_file(*v.config), flags);
        } else {
            config = flags;
        }
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    return run_command(command, config, out, err);
}

} // namespace ponder::cli
