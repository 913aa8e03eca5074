// Command-line driver.
//
// Subcommands:
//   run         simulate a scenario, attach the adjoint pair, and run the
//               optimality checks; writes report.json and summary.csv
//   choquet     distorted-expectation estimates for a sample file, both
//               estimators with standard errors, JSON on stdout
//   verify      named invariant suite with fixed seeds; pass/fail table
//               on stdout, report.json on disk
//   dump-paths  write simulated state/control/kernel paths as CSV
//
// Exit codes: 0 all checks consistent, 1 verification failure, 2 invalid
// configuration or input, 3 numerical failure.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prospect/pipeline.hpp"
#include "prospect/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolated = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string default_out_dir() {
    const char* env = std::getenv("PROSPECT_OUTPUT_DIR");
    return env != nullptr && *env != '\0' ? env : ".";
}

prospect::RunConfig load_run_config(const std::string& config_path) {
    prospect::RunConfig cfg;
    cfg.out_dir = default_out_dir();
    if (config_path.empty()) return cfg;
    std::ifstream in(config_path, std::ios::binary);
    if (!in)
        throw prospect::ConfigError("cannot open config file '" + config_path +
                                    "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    prospect::apply_config_map(cfg, prospect::parse_config_text(ss.str()));
    return cfg;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunFlags {
    std::string config;
    std::string scenario;
    std::string out_dir;
    std::string format;
    std::int64_t paths = -1;
    std::int64_t steps = -1;
    std::int64_t seed = -1;
    std::int64_t threads = -1;
    std::int64_t lsmc_degree = -1;
    double control_scale = std::numeric_limits<double>::quiet_NaN();
    double mp_tolerance = std::numeric_limits<double>::quiet_NaN();
    bool emit_paths = false;
};

prospect::RunConfig merge_run_flags(const RunFlags& f) {
    prospect::RunConfig cfg = load_run_config(f.config);
    if (!f.scenario.empty())
        cfg.scenario = prospect::parse_scenario_name(f.scenario);
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (f.paths >= 0) cfg.n_paths = static_cast<std::size_t>(f.paths);
    if (f.steps >= 0) cfg.steps = static_cast<std::size_t>(f.steps);
    if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
    if (f.threads >= 0) cfg.threads = static_cast<unsigned>(f.threads);
    if (f.lsmc_degree >= 0)
        cfg.lsmc_degree = static_cast<std::size_t>(f.lsmc_degree);
    if (std::isfinite(f.control_scale)) cfg.control_scale = f.control_scale;
    if (std::isfinite(f.mp_tolerance)) cfg.mp_tolerance = f.mp_tolerance;
    if (f.emit_paths) cfg.emit_paths = true;
    if (!f.format.empty()) {
        if (f.format == "json") cfg.format = prospect::ReportFormat::json;
        else if (f.format == "csv") cfg.format = prospect::ReportFormat::csv;
        else if (f.format == "both") cfg.format = prospect::ReportFormat::both;
        else
            throw prospect::ConfigError(
                "run: --format must be json, csv or both");
    }
    return cfg;
}

int cmd_run(const RunFlags& flags) {
    const prospect::RunConfig cfg = merge_run_flags(flags);
    prospect::PipelineResult res = prospect::run_pipeline(cfg);
    const prospect::RunArtifacts& a = res.artifacts;

    const std::filesystem::path dir(cfg.out_dir);
    if (cfg.format != prospect::ReportFormat::csv)
        prospect::atomic_write_file(dir / "report.json",
                                    prospect::run_report_json(a).dump(2) + "\n");
    if (cfg.format != prospect::ReportFormat::json)
        prospect::atomic_write_file(dir / "summary.csv",
                                    prospect::run_summary_csv(a));
    if (cfg.emit_paths)
        prospect::atomic_write_file(dir / "paths.csv",
                                    prospect::paths_csv(res.ens));

    std::cout << "scenario " << a.scenario << ": J = " << a.objective.total
              << " (se " << a.objective.std_error << ")";
    if (a.residual)
        std::cout << ", stationarity rms = " << a.residual->overall_rms;
    std::cout << ", verdict " << a.verdict() << "\n";
    return a.consistent() ? kExitOk : kExitViolated;
}

// ---------------------------------------------------------------------------
// choquet
// ---------------------------------------------------------------------------

std::vector<double> read_sample_file(const std::string& path) {
    std::istream* in = &std::cin;
    std::ifstream file;
    if (path != "-") {
        file.open(path, std::ios::binary);
        if (!file)
            throw prospect::ConfigError("cannot open sample file '" + path + "'");
        in = &file;
    }
    std::vector<double> out;
    std::string token;
    // Values separated by whitespace, newlines or commas; blank tokens are
    // skipped so plain one-column and comma-separated files both work.
    std::string line;
    while (std::getline(*in, line)) {
        for (char& c : line)
            if (c == ',' || c == ';') c = ' ';
        std::istringstream ls(line);
        while (ls >> token) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(token, &pos);
                if (pos != token.size()) throw std::invalid_argument(token);
                out.push_back(v);
            } catch (const std::exception&) {
                throw prospect::ConfigError("sample file: cannot parse '" +
                                            token + "' as a number");
            }
        }
    }
    if (out.empty())
        throw prospect::ConfigError("sample file '" + path +
                                    "' contains no values");
    return out;
}

prospect::UtilityFn parse_utility(const std::string& text) {
    if (text.rfind("power:", 0) == 0)
        return prospect::UtilityFn::power(std::stod(text.substr(6)));
    throw prospect::ConfigError(
        "choquet: --utility expects power:<exponent>, got '" + text + "'");
}

prospect::DistortionFn parse_distortion(const std::string& text) {
    if (text == "identity") return prospect::DistortionFn::identity();
    if (text.rfind("inverse_s:", 0) == 0) {
        double nu = 0, a = 0, b = 0;
        char c1 = 0, c2 = 0;
        std::istringstream ss(text.substr(10));
        if (!(ss >> nu >> c1 >> a >> c2 >> b) || c1 != ',' || c2 != ',')
            throw prospect::ConfigError(
                "choquet: --distortion inverse_s expects nu,a,b");
        return prospect::DistortionFn::inverse_s(nu, a, b);
    }
    if (text.rfind("power:", 0) == 0) {
        // w(p) = p^k as the nu = 1 branch of the inverse-S family.
        const double k = std::stod(text.substr(6));
        if (!(k >= 1.0))
            throw prospect::ConfigError(
                "choquet: --distortion power expects an exponent >= 1");
        return prospect::DistortionFn::inverse_s(1.0, k - 1.0, 0.0);
    }
    throw prospect::ConfigError(
        "choquet: --distortion expects identity, power:<k> or "
        "inverse_s:<nu>,<a>,<b>, got '" + text + "'");
}

int cmd_choquet(const std::string& input, const std::string& utility,
                const std::string& distortion) {
    const std::vector<double> sample = read_sample_file(input);
    const prospect::UtilityFn util = parse_utility(utility);
    const prospect::DistortionFn dist = parse_distortion(distortion);
    const prospect::ChoquetEstimate os =
        prospect::choquet_order_stat(sample, util, dist);
    const prospect::ChoquetEstimate pl =
        prospect::choquet_plugin(sample, util, dist);

    prospect::ordered_json j;
    j["schema"] = prospect::kReportSchemaVersion;
    j["command"] = "choquet";
    j["n"] = sample.size();
    j["utility"] = utility;
    j["distortion"] = distortion;
    j["order_stat"] = {{"value", os.value}, {"std_error", os.std_error}};
    j["plugin"] = {{"value", pl.value}, {"std_error", pl.std_error}};
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(const std::string& suite_name, std::uint64_t seed,
               unsigned threads, const std::string& out_dir) {
    const prospect::VerifySuite suite =
        prospect::verify_suite_from_name(suite_name);
    const prospect::VerifyReport rep = prospect::run_verify(suite, seed, threads);
    std::cout << prospect::verify_table_text(rep);
    prospect::atomic_write_file(std::filesystem::path(out_dir) / "report.json",
                                prospect::verify_report_json(rep).dump(2) + "\n");
    return rep.pass() ? kExitOk : kExitViolated;
}

// ---------------------------------------------------------------------------
// dump-paths
// ---------------------------------------------------------------------------

int cmd_dump_paths(const std::string& scenario, std::size_t paths,
                   std::size_t steps, std::uint64_t seed,
                   const std::string& out_dir) {
    prospect::RunConfig cfg;
    cfg.scenario = prospect::parse_scenario_name(scenario);
    cfg.n_paths = paths;
    cfg.steps = steps;
    cfg.seed = seed;
    cfg.validate();
    const prospect::Scenario sc =
        prospect::build_scenario(cfg.scenario, cfg.params);
    const prospect::TimeGrid grid(sc.params.horizon, cfg.steps);
    const prospect::CandidateRun run =
        prospect::make_candidate_run(sc, grid, cfg.n_paths, cfg.seed);
    const std::filesystem::path file =
        std::filesystem::path(out_dir) / "paths.csv";
    prospect::atomic_write_file(file, prospect::paths_csv(run.ens));
    std::cout << "wrote " << file.string() << " (" << cfg.n_paths << " paths, "
              << grid.nodes() << " nodes)\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo toolkit for distorted-expectation portfolio "
                 "objectives: controlled simulation, adjoint construction, "
                 "and optimality verification"};
    app.require_subcommand(1);

    RunFlags rf;
    CLI::App* run = app.add_subcommand("run", "simulate and verify a scenario");
    run->add_option("--scenario", rf.scenario,
                    "market, zero_control, consumption, fixed_mix or "
                    "bet_overlay");
    run->add_option("--config", rf.config, "key = value configuration file");
    run->add_option("--paths", rf.paths, "number of Monte Carlo paths");
    run->add_option("--steps", rf.steps, "number of time steps");
    run->add_option("--seed", rf.seed, "master seed");
    run->add_option("--threads", rf.threads, "worker threads for simulation");
    run->add_option("--out", rf.out_dir, "output directory");
    run->add_option("--format", rf.format, "report format: json, csv or both");
    run->add_option("--control-scale", rf.control_scale,
                    "multiply the candidate control by this factor");
    run->add_option("--mp-tol", rf.mp_tolerance,
                    "stationarity residual tolerance override");
    run->add_option("--lsmc-degree", rf.lsmc_degree,
                    "regression basis degree for the numerical adjoint");
    run->add_flag("--emit-paths", rf.emit_paths, "also write paths.csv");

    std::string ch_input, ch_utility = "power:0.5", ch_distortion = "identity";
    CLI::App* cho = app.add_subcommand(
        "choquet", "distorted expectation of a sample file (both estimators)");
    cho->add_option("--input", ch_input, "sample file, or - for stdin")
        ->required();
    cho->add_option("--utility", ch_utility, "power:<exponent>");
    cho->add_option("--distortion", ch_distortion,
                    "identity, power:<k> or inverse_s:<nu>,<a>,<b>");

    std::string vf_suite = "all", vf_out;
    std::int64_t vf_seed = 7;
    unsigned vf_threads = 1;
    CLI::App* ver = app.add_subcommand("verify", "run an invariant suite");
    ver->add_option("--suite", vf_suite,
                    "all, pit, duality, gateaux or residual");
    ver->add_option("--seed", vf_seed, "master seed");
    ver->add_option("--threads", vf_threads,
                    "worker threads (results are thread-count invariant)");
    ver->add_option("--out", vf_out, "output directory for report.json");

    std::string dp_scenario = "consumption", dp_out;
    std::int64_t dp_paths = 100, dp_steps = 50, dp_seed = 7;
    CLI::App* dump =
        app.add_subcommand("dump-paths", "write simulated paths as CSV");
    dump->add_option("--scenario", dp_scenario, "scenario name");
    dump->add_option("--paths", dp_paths, "number of Monte Carlo paths");
    dump->add_option("--steps", dp_steps, "number of time steps");
    dump->add_option("--seed", dp_seed, "master seed");
    dump->add_option("--out", dp_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(rf);
        if (cho->parsed()) return cmd_choquet(ch_input, ch_utility, ch_distortion);
        if (ver->parsed())
            return cmd_verify(vf_suite, static_cast<std::uint64_t>(vf_seed),
                              vf_threads,
                              vf_out.empty() ? default_out_dir() : vf_out);
        if (dump->parsed())
            return cmd_dump_paths(dp_scenario,
                                  static_cast<std::size_t>(dp_paths),
                                  static_cast<std::size_t>(dp_steps),
                                  static_cast<std::uint64_t>(dp_seed),
                                  dp_out.empty() ? default_out_dir() : dp_out);
    } catch (const prospect::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const prospect::DataError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const prospect::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const prospect::DomainError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}
