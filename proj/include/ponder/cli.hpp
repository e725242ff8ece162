#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ponder/dynamics.hpp"

namespace ponder::cli {

enum class Command { distribution, gamma_surface, sweep, dynamics_check, selftest };
enum class OutputFormat { csv, json };

inline constexpr int kExitOk = 0;
inline constexpr int kExitSelftestFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;

/// Everything a run can be configured with. Unset fields fall back to the
/// per-command defaults in resolve().
struct RunConfig {
    std::optional<double> r;
    std::optional<int> pairs;
    std::optional<std::vector<double>> kappa;
    std::optional<double> beta; ///< +infinity for "inf"
    std::optional<double> epsilon;
    std::optional<double> x_min;
    std::optional<double> x_max;
    std::optional<double> x_step;
    std::optional<double> tail_tol;
    std::optional<double> series_tol;
    std::optional<std::string> output;
    std::optional<OutputFormat> format;
    // dynamics-check only
    std::optional<double> gamma;
    std::optional<double> dt;
    std::optional<double> t_final;
    std::optional<int> meter_cut;
    std::optional<DiffusionModel> diffusion;
};

/// Fully populated configuration for one command.
struct ResolvedConfig {
    Command command = Command::distribution;
    double r = 0.0;
    int pairs = 2;
    std::vector<double> kappa;
    double beta = 0.0;
    double epsilon = 1.0;
    std::optional<double> x_min;
    std::optional<double> x_max;
    std::optional<double> x_step;
    double tail_tol = 1e-14;
    double series_tol = 1e-15;
    std::optional<std::string> output;
    OutputFormat format = OutputFormat::csv;
    double gamma = 0.2;
    double dt = 0.01;
    std::optional<double> t_final;
    int meter_cut = 0;
    DiffusionModel diffusion = DiffusionModel::quantum_thermal;
};

Command parse_command(const std::string& name);
std::string command_name(Command command);

/// "inf" (any case) or a positive number.
double parse_beta(const std::string& text);
/// "0.5" or "0.25,0.5,1".
std::vector<double> parse_kappa_list(const std::string& text);
OutputFormat parse_format(const std::string& text);
DiffusionModel parse_diffusion(const std::string& text);

/// Reads a JSON object whose keys are the long flag names with '-' replaced
/// by '_'. Unknown keys and wrongly typed values throw ParameterError.
RunConfig parse_config_json(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// Fields set in `top` win over `base`.
RunConfig overlay(const RunConfig& base, const RunConfig& top);

/// Applies command defaults and validates every parameter domain.
ResolvedConfig resolve(Command command, const RunConfig& config);

/// Named numeric columns; missing values are empty CSV fields / JSON null.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<double>>> rows;
};

/// 12 significant digits, the precision of every emitted number.
std::string format_number(double v);
void write_csv(const Table& table, std::ostream& out);
void write_json(const Table& table, std::ostream& out);
/// Parses CSV produced by write_csv; throws ParameterError on schema violations.
Table read_csv(std::istream& in);

Table distribution_table(const ResolvedConfig& config);
Table gamma_surface_table(const ResolvedConfig& config);
Table sweep_table(const ResolvedConfig& config);

/// Runs one command, writing data to `out` (or the configured output file)
/// and diagnostics to `err`. Returns the process exit code.
int run_command(Command command, const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ponder::cli
