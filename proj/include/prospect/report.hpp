// Report emission: run/verify reports as JSON ("schema": 1), the one-row
// run summary CSV, and path dumps.  All files are written atomically
// (temp file in the target directory, then rename) so readers never see
// a partial report.  Serialization is deterministic: no timestamps, no
// pointers, shortest round-trip float representation in JSON and fixed
// "%.17g" in CSV.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "prospect/errors.hpp"
#include "prospect/ensemble.hpp"
#include "prospect/maximum_principle.hpp"
#include "prospect/objective.hpp"
#include "prospect/scenarios.hpp"

namespace prospect {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Atomic file writing
// ---------------------------------------------------------------------------

inline void atomic_write_file(const std::filesystem::path& path,
                              const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.parent_path().empty() ? fs::path(".")
                                                    : path.parent_path();
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DataError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw DataError("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, path, ec);
    if (ec)
        throw DataError("rename '" + tmp.string() + "' -> '" + path.string() +
                        "' failed: " + ec.message());
}

// ---------------------------------------------------------------------------
// Number formatting (CSV)
// ---------------------------------------------------------------------------

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Run artifacts -> report.json / summary.csv
// ---------------------------------------------------------------------------

struct RunArtifacts {
    std::string scenario;
    std::size_t n_paths = 0;
    std::size_t steps = 0;
    std::uint64_t seed = 0;
    double horizon = 0.0;
    double x0 = 0.0;
    double control_scale = 1.0;
    ObjectiveValue objective;
    // Present for candidate scenarios; evaluation-only scenarios skip the
    // optimality checks and carry verdict "evaluated".
    std::optional<ResidualReport> residual;
    std::optional<GateauxResult> gateaux;
    std::optional<DualityResult> duality;
    std::optional<double> budget_multiplier;
    std::size_t floor_hits = 0;

    std::string verdict() const {
        return residual ? residual->verdict() : std::string("evaluated");
    }
    bool consistent() const { return !residual || residual->consistent; }
};

inline ordered_json objective_json(const ObjectiveValue& v) {
    ordered_json j;
    j["running_gain"] = v.running_gain;
    j["running_loss"] = v.running_loss;
    j["smooth_running"] = v.smooth_running;
    j["terminal"] = v.terminal;
    j["total"] = v.total;
    j["std_error"] = v.std_error;
    return j;
}

inline ordered_json residual_json(const ResidualReport& r) {
    ordered_json j;
    j["overall_rms"] = r.overall_rms;
    j["pooled_std_error"] = r.pooled_std_error;
    j["tolerance"] = r.tolerance;
    j["included_points"] = r.included;
    j["excluded_points"] = r.excluded;
    j["verdict"] = r.verdict();
    ordered_json per_time = ordered_json::array();
    for (const auto& pt : r.per_time) {
        ordered_json e;
        e["t"] = pt.t;
        e["rms"] = pt.rms;
        e["max_abs"] = pt.max_abs;
        e["included"] = pt.included;
        per_time.push_back(std::move(e));
    }
    j["per_time"] = std::move(per_time);
    return j;
}

inline ordered_json gateaux_json(const GateauxResult& g) {
    ordered_json j;
    j["eps"] = g.eps;
    j["fd"] = g.fd;
    j["fd_extrapolated"] = g.fd_extrapolated;
    j["fd_std_error"] = g.fd_std_error;
    j["analytic"] = g.analytic;
    j["analytic_std_error"] = g.analytic_std_error;
    j["gap"] = g.gap;
    j["gap_std_error"] = g.gap_std_error;
    return j;
}

inline ordered_json duality_json(const DualityResult& d) {
    ordered_json j;
    j["lhs"] = d.lhs;
    j["rhs"] = d.rhs;
    j["gap"] = d.gap;
    j["gap_std_error"] = d.gap_std_error;
    j["lhs_std_error"] = d.lhs_std_error;
    j["rhs_std_error"] = d.rhs_std_error;
    return j;
}

inline ordered_json run_report_json(const RunArtifacts& a) {
    ordered_json j;
    j["schema"] = kReportSchemaVersion;
    j["command"] = "run";
    j["scenario"] = a.scenario;
    ordered_json cfg;
    cfg["n_paths"] = a.n_paths;
    cfg["steps"] = a.steps;
    cfg["seed"] = a.seed;
    cfg["horizon"] = a.horizon;
    cfg["x0"] = a.x0;
    cfg["control_scale"] = a.control_scale;
    j["config"] = std::move(cfg);
    j["objective"] = objective_json(a.objective);
    if (a.residual) j["stationarity"] = residual_json(*a.residual);
    if (a.gateaux) j["directional_derivative"] = gateaux_json(*a.gateaux);
    if (a.duality) j["duality"] = duality_json(*a.duality);
    if (a.budget_multiplier) j["budget_multiplier"] = *a.budget_multiplier;
    j["floor_hits"] = a.floor_hits;
    j["verdict"] = a.verdict();
    return j;
}

inline std::string run_summary_csv(const RunArtifacts& a) {
    std::string out =
        "scenario,n_paths,steps,seed,J_total,mp_rms,gateaux_gap,duality_gap,"
        "verdict\n";
    out += a.scenario;
    out += ',' + std::to_string(a.n_paths);
    out += ',' + std::to_string(a.steps);
    out += ',' + std::to_string(a.seed);
    out += ',' + format_g17(a.objective.total);
    out += ',' + (a.residual ? format_g17(a.residual->overall_rms)
                             : std::string("nan"));
    out += ',' + (a.gateaux ? format_g17(a.gateaux->gap) : std::string("nan"));
    out += ',' + (a.duality ? format_g17(a.duality->gap) : std::string("nan"));
    out += ',' + a.verdict();
    out += '\n';
    return out;
}

// ---------------------------------------------------------------------------
// Path dumps
// ---------------------------------------------------------------------------

// CSV with one row per (path, time node): path,node,t,state,control[,kernel].
inline std::string paths_csv(const PathEnsemble& ens) {
    const bool kernel = ens.has_kernel();
    std::string out = kernel ? "path,node,t,state,control,kernel\n"
                             : "path,node,t,state,control\n";
    const std::size_t nodes = ens.grid.nodes();
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
        for (std::size_t i = 0; i < nodes; ++i) {
            out += std::to_string(p);
            out += ',' + std::to_string(i);
            out += ',' + format_g17(ens.grid.t(i));
            out += ',' + format_g17(ens.state.at(i, p));
            out += ',' + format_g17(ens.control.at(i, p));
            if (kernel) out += ',' + format_g17(ens.kernel.at(i, p));
            out += '\n';
        }
    }
    return out;
}

} // namespace prospect
