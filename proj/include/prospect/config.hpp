// Run configuration: defaults, config-file parsing (flat "key = value"
// sections), and validation.  Flags parsed by the CLI override file
// values, which override scenario presets.
#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "prospect/errors.hpp"
#include "prospect/scenarios.hpp"

namespace prospect {

enum class ReportFormat { json, csv, both };

struct RunConfig {
    ScenarioId scenario = ScenarioId::consumption;
    std::size_t n_paths = 20000;
    std::size_t steps = 200;
    std::uint64_t seed = 7;
    unsigned threads = 1;
    std::string out_dir = ".";
    ReportFormat format = ReportFormat::both;
    bool emit_paths = false;
    double control_scale = 1.0;
    // Residual tolerance override; NaN = auto (max(1e-2, 5 * pooled se)).
    double mp_tolerance = std::numeric_limits<double>::quiet_NaN();
    std::size_t lsmc_degree = 3;
    ScenarioParams params;

    void validate() const {
        if (n_paths < 100)
            throw ConfigError("run config: n_paths must be at least 100");
        if (steps < 10) throw ConfigError("run config: steps must be at least 10");
        if (threads < 1) throw ConfigError("run config: threads must be at least 1");
        if (!(control_scale > 0.0) && control_scale != 0.0)
            throw ConfigError("run config: control_scale must be finite and >= 0");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" +
                          value + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a nonnegative integer, "
                          "got '" + value + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config: key '" + key + "' expects true/false, got '" +
                      value + "'");
}

} // namespace detail

// Parses "[section]" headers and "key = value" lines into dotted keys
// ("section.key").  '#' and ';' start comments; blank lines are skipped.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> out;
    std::string section;
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(
            pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": empty key");
        out[section.empty() ? key : section + "." + key] = value;
    }
    return out;
}

inline ScenarioId parse_scenario_name(const std::string& value) {
    // Accept one legacy preset alias used by existing configs.
    if (value == "closed_form") return ScenarioId::consumption;
    return scenario_from_name(value);
}

inline void apply_config_entry(RunConfig& cfg, const std::string& key,
                               const std::string& value) {
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_u64;
    ScenarioParams& p = cfg.params;

    if (key == "run.scenario") cfg.scenario = parse_scenario_name(value);
    else if (key == "run.n_paths") cfg.n_paths = parse_u64(key, value);
    else if (key == "run.steps") cfg.steps = parse_u64(key, value);
    else if (key == "run.seed") cfg.seed = parse_u64(key, value);
    else if (key == "run.threads")
        cfg.threads = static_cast<unsigned>(parse_u64(key, value));
    else if (key == "run.out_dir") cfg.out_dir = value;
    else if (key == "run.emit_paths") cfg.emit_paths = parse_bool(key, value);
    else if (key == "run.control_scale") cfg.control_scale = parse_double(key, value);
    else if (key == "run.mp_tolerance") cfg.mp_tolerance = parse_double(key, value);
    else if (key == "run.lsmc_degree") cfg.lsmc_degree = parse_u64(key, value);
    else if (key == "run.format") {
        if (value == "json") cfg.format = ReportFormat::json;
        else if (value == "csv") cfg.format = ReportFormat::csv;
        else if (value == "both") cfg.format = ReportFormat::both;
        else throw ConfigError("config: run.format must be json, csv or both");
    }
    else if (key == "scenario.horizon") p.horizon = parse_double(key, value);
    else if (key == "scenario.x0") p.x0 = parse_double(key, value);
    else if (key == "scenario.rate") p.rate = parse_double(key, value);
    else if (key == "scenario.growth") p.growth = parse_double(key, value);
    else if (key == "scenario.vol") p.vol = parse_double(key, value);
    else if (key == "scenario.market_price_of_risk")
        p.market_price_of_risk = parse_double(key, value);
    else if (key == "scenario.gamma") p.gamma = parse_double(key, value);
    else if (key == "scenario.alpha") p.alpha = parse_double(key, value);
    else if (key == "scenario.invested_fraction")
        p.invested_fraction = parse_double(key, value);
    else if (key == "scenario.consumption_rate")
        p.consumption_rate = parse_double(key, value);
    else if (key == "scenario.bet_stake") p.bet_stake = parse_double(key, value);
    else if (key == "scenario.bet_gain") p.bet_gain = parse_double(key, value);
    else if (key == "scenario.bet_win_prob")
        p.bet_win_prob = parse_double(key, value);
    else if (key == "distortion.terminal.nu") p.term_nu = parse_double(key, value);
    else if (key == "distortion.terminal.a") p.term_a = parse_double(key, value);
    else if (key == "distortion.terminal.b") p.term_b = parse_double(key, value);
    else if (key == "distortion.terminal.identity")
        p.terminal_identity_weight = parse_bool(key, value);
    else if (key == "distortion.running.nu") p.run_nu = parse_double(key, value);
    else if (key == "distortion.running.a") p.run_a = parse_double(key, value);
    else if (key == "distortion.running.b") p.run_b = parse_double(key, value);
    else if (key == "distortion.control.nu")
        p.zero_control_nu = parse_double(key, value);
    else if (key == "distortion.control.a")
        p.zero_control_a = parse_double(key, value);
    else if (key == "distortion.control.b")
        p.zero_control_b = parse_double(key, value);
    else
        throw ConfigError("config: unknown key '" + key + "'");
}

inline void apply_config_map(RunConfig& cfg,
                             const std::map<std::string, std::string>& entries) {
    for (const auto& [key, value] : entries) apply_config_entry(cfg, key, value);
}

} // namespace prospect
