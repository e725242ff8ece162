#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "ponder/cli.hpp"
#include "ponder/error.hpp"

namespace ponder::cli {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw ParameterError("cannot parse " + what + " from '" + text + "'");
    }
    if (used != t.size()) {
        throw ParameterError("cannot parse " + what + " from '" + text + "'");
    }
    return v;
}

template <class T>
void take(std::optional<T>& dst, const std::optional<T>& src) {
    if (src) {
        dst = src;
    }
}

std::vector<double> default_sweep_kappas(bool with_zero) {
    std::vector<double> k;
    for (int i = with_zero ? 0 : 1; i <= 20; ++i) {
        k.push_back(0.25 * i);
    }
    return k;
}

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw ParameterError(message);
    }
}

} // namespace

Command parse_command(const std::string& name) {
    if (name == "distribution") return Command::distribution;
    if (name == "gamma-surface") return Command::gamma_surface;
    if (name == "sweep") return Command::sweep;
    if (name == "dynamics-check") return Command::dynamics_check;
    if (name == "selftest") return Command::selftest;
    throw ParameterError("unknown command '" + name + "'");
}

std::string command_name(Command command) {
    switch (command) {
    case Command::distribution:
        return "distribution";
    case Command::gamma_surface:
        return "gamma-surface";
    case Command::sweep:
        return "sweep";
    case Command::dynamics_check:
        return "dynamics-check";
    case Command::selftest:
        return "selftest";
    }
    return "?";
}

double parse_beta(const std::string& text) {
    if (lower(trim(text)) == "inf") {
        return std::numeric_limits<double>::infinity();
    }
    const double v = parse_double(text, "beta");
    require(v > 0.0 && std::isfinite(v), "beta must be a positive number or 'inf'");
    return v;
}

std::vector<double> parse_kappa_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_double(item, "kappa"));
    }
    require(!out.empty(), "kappa list is empty");
    return out;
}

OutputFormat parse_format(const std::string& text) {
    const std::string t = lower(trim(text));
    if (t == "csv") return OutputFormat::csv;
    if (t == "json") return OutputFormat::json;
    throw ParameterError("format must be 'csv' or 'json'");
}

DiffusionModel parse_diffusion(const std::string& text) {
    const std::string t = lower(trim(text));
    if (t == "quantum-thermal") return DiffusionModel::quantum_thermal;
    if (t == "high-temperature") return DiffusionModel::high_temperature;
    throw ParameterError("diffusion must be 'quantum-thermal' or 'high-temperature'");
}

RunConfig parse_config_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("config is not valid JSON: ") + e.what());
    }
    require(j.is_object(), "config must be a JSON object");
    RunConfig c;
    auto number = [](const nlohmann::json& v, const std::string& key) {
        require(v.is_number(), "config key '" + key + "' must be a number");
        return v.get<double>();
    };
    auto integer = [](const nlohmann::json& v, const std::string& key) {
        require(v.is_number_integer(), "config key '" + key + "' must be an integer");
        return v.get<int>();
    };
    auto string = [](const nlohmann::json& v, const std::string& key) {
        require(v.is_string(), "config key '" + key + "' must be a string");
        return v.get<std::string>();
    };
    for (const auto& [key, v] : j.items()) {
        if (key == "r") c.r = number(v, key);
        else if (key == "pairs") c.pairs = integer(v, key);
        else if (key == "kappa") {
            if (v.is_array()) {
                std::vector<double> ks;
                for (const auto& e : v) ks.push_back(number(e, key));
                require(!ks.empty(), "config key 'kappa' is an empty list");
                c.kappa = ks;
            } else {
                c.kappa = std::vector<double>{number(v, key)};
            }
        } else if (key == "beta") {
            c.beta = v.is_string() ? parse_beta(v.get<std::string>()) : number(v, key);
        } else if (key == "epsilon") c.epsilon = number(v, key);
        else if (key == "x_min") c.x_min = number(v, key);
        else if (key == "x_max") c.x_max = number(v, key);
        else if (key == "x_step") c.x_step = number(v, key);
        else if (key == "tail_tol") c.tail_tol = number(v, key);
        else if (key == "series_tol") c.series_tol = number(v, key);
        else if (key == "output") c.output = string(v, key);
        else if (key == "format") c.format = parse_format(string(v, key));
        else if (key == "gamma") c.gamma = number(v, key);
        else if (key == "dt") c.dt = number(v, key);
        else if (key == "t_final") c.t_final = number(v, key);
        else if (key == "meter_cut") c.meter_cut = integer(v, key);
        else if (key == "diffusion") c.diffusion = parse_diffusion(string(v, key));
        else throw ParameterError("unknown config key '" + key + "'");
    }
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str());
}

RunConfig overlay(const RunConfig& base, const RunConfig& top) {
    RunConfig c = base;
    take(c.r, top.r);
    take(c.pairs, top.pairs);
    take(c.kappa, top.kappa);
    take(c.beta, top.beta);
    take(c.epsilon, top.epsilon);
    take(c.x_min, top.x_min);
    take(c.x_max, top.x_max);
    take(c.x_step, top.x_step);
    take(c.tail_tol, top.tail_tol);
    take(c.series_tol, top.series_tol);
    take(c.output, top.output);
    take(c.format, top.format);
    take(c.gamma, top.gamma);
    take(c.dt, top.dt);
    take(c.t_final, top.t_final);
    take(c.meter_cut, top.meter_cut);
    take(c.diffusion, top.diffusion);
    return c;
}

ResolvedConfig resolve(Command command, const RunConfig& c) {
    const double inf = std::numeric_limits<double>::infinity();
    ResolvedConfig rc;
    rc.command = command;
    switch (command) {
    case Command::distribution:
        rc.r = 0.4;
        rc.kappa = {3.0};
        rc.beta = inf;
        break;
    case Command::gamma_surface:
        rc.r = 0.3;
        rc.kappa = default_sweep_kappas(true);
        rc.beta = inf;
        rc.x_min = -15.0;
        rc.x_max = 3.0;
        rc.x_step = 0.05;
        break;
    case Command::sweep:
        rc.r = 0.3;
        rc.kappa = default_sweep_kappas(false);
        rc.beta = inf;
        break;
    case Command::dynamics_check:
        rc.kappa = {0.5};
        rc.beta = 1.0;
        break;
    case Command::selftest:
        return rc;
    }
    rc.r = c.r.value_or(rc.r);
    rc.pairs = c.pairs.value_or(rc.pairs);
    rc.kappa = c.kappa.value_or(rc.kappa);
    rc.beta = c.beta.value_or(rc.beta);
    rc.epsilon = c.epsilon.value_or(rc.epsilon);
    if (c.x_min) rc.x_min = c.x_min;
    if (c.x_max) rc.x_max = c.x_max;
    if (c.x_step) rc.x_step = c.x_step;
    rc.tail_tol = c.tail_tol.value_or(rc.tail_tol);
    rc.series_tol = c.series_tol.value_or(rc.series_tol);
    rc.output = c.output;
    rc.format = c.format.value_or(rc.format);
    rc.gamma = c.gamma.value_or(rc.gamma);
    rc.dt = c.dt.value_or(rc.dt);
    rc.t_final = c.t_final;
    rc.meter_cut = c.meter_cut.value_or(rc.meter_cut);
    rc.diffusion = c.diffusion.value_or(rc.diffusion);

    require(rc.r >= 0.0 && std::isfinite(rc.r), "r must be finite and >= 0");
    require(rc.pairs >= 1 && rc.pairs <= 64, "pairs must be in 1..64");
    require(!rc.kappa.empty(), "kappa list is empty");
    for (double k : rc.kappa) {
        require(k >= 0.0 && std::isfinite(k), "every kappa must be finite and >= 0");
    }
    require(rc.beta > 0.0, "beta must be positive or 'inf'");
    require(rc.epsilon >= 1.0 && std::isfinite(rc.epsilon), "epsilon must be >= 1");
    require(rc.tail_tol > 0.0 && rc.tail_tol < 1.0, "tail-tol must lie in (0, 1)");
    require(rc.series_tol > 0.0 && rc.series_tol < 1.0, "series-tol must lie in (0, 1)");
    if (rc.x_min && rc.x_max) {
        require(*rc.x_min < *rc.x_max, "x-min must be below x-max");
    }
    if (rc.x_step) {
        require(*rc.x_step > 0.0, "x-step must be positive");
    }
    if (command == Command::distribution) {
        require(rc.kappa.size() == 1, "distribution takes a single kappa");
    }
    if (command == Command::dynamics_check) {
        require(rc.kappa.size() == 1, "dynamics-check takes a single kappa");
        require(std::isfinite(rc.beta), "dynamics-check needs a finite beta ('inf' is not supported)");
        require(rc.gamma > 0.0 && std::isfinite(rc.gamma), "gamma must be positive");
        require(rc.dt > 0.0 && std::isfinite(rc.dt), "dt must be positive");
        if (rc.t_final) {
            require(*rc.t_final > 0.0 && std::isfinite(*rc.t_final), "t-final must be positive");
        }
        require(rc.meter_cut >= 0, "meter-cut must be >= 0");
    }
    if (command == Command::gamma_surface) {
        require(rc.r > 0.0, "gamma-surface needs r > 0");
    }
    return rc;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_csv(const Table& table, std::ostream& out) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << (i ? "," : "") << table.columns[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            if (row[i]) out << format_number(*row[i]);
        }
        out << '\n';
    }
}

void write_json(const Table& table, std::ostream& out) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        auto col = nlohmann::ordered_json::array();
        for (const auto& row : table.rows) {
            if (row[c]) {
                col.push_back(std::stod(format_number(*row[c])));
            } else {
                col.push_back(nullptr);
            }
        }
        j[table.columns[c]] = std::move(col);
    }
    out << j.dump(1) << '\n';
}

Table read_csv(std::istream& in) {
    Table t;
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "CSV has no header");
    {
        std::stringstream ss(line);
        std::string name;
        while (std::getline(ss, name, ',')) t.columns.push_back(name);
    }
    while (std::getline(in, line)) {
        std::vector<std::optional<double>> row;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            const std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            row.push_back(field.empty() ? std::nullopt : std::optional<double>(parse_double(field, "CSV field")));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        require(row.size() == t.columns.size(), "CSV row has " + std::to_string(row.size()) + " fields, header has " +
                                                    std::to_string(t.columns.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace ponder::cli
