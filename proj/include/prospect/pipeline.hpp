// End-to-end run pipeline: build the scenario, produce the candidate (or
// perturbed) ensemble, attach an adjoint pair, and run the optimality
// checks.  This is the engine behind the CLI's `run` command; tests call
// it directly.
//
// Adjoint selection: the unscaled candidate of a worked scenario carries
// its closed-form adjoint.  Any scaled control (control_scale != 1) goes
// through the honest numerical route instead — scheme simulation of the
// scaled control plus the regression adjoint solver — because the
// closed-form pair belongs to the candidate only.
#pragma once

#include <cmath>
#include <optional>

#include "prospect/config.hpp"
#include "prospect/report.hpp"
#include "prospect/scenarios.hpp"

namespace prospect {

struct PipelineResult {
    RunArtifacts artifacts;
    PathEnsemble ens;  // kept for optional path dumps
};

namespace detail {

inline ObjectiveValue market_candidate_objective(const CandidateRun& run,
                                                 const Scenario& sc) {
    ObjectiveValue v;
    const ChoquetEstimate est =
        choquet_plugin(run.terminal_wealth, sc.objective.pref.terminal,
                       sc.objective.pref.weight_terminal);
    v.terminal = est.value;
    v.total = est.value;
    v.std_error = est.std_error;
    v.n_paths = est.n;
    return v;
}

} // namespace detail

inline PipelineResult run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    const Scenario sc = build_scenario(cfg.scenario, cfg.params);
    const TimeGrid grid(sc.params.horizon, cfg.steps);

    PipelineResult out;
    RunArtifacts& a = out.artifacts;
    a.scenario = sc.name;
    a.n_paths = cfg.n_paths;
    a.steps = cfg.steps;
    a.seed = cfg.seed;
    a.horizon = sc.params.horizon;
    a.x0 = sc.params.x0;
    a.control_scale = cfg.control_scale;

    // Evaluation-only scenarios: objective estimate, no optimality story.
    if (sc.id == ScenarioId::bet_overlay) {
        BetRun br = bet_overlay_run(sc, grid, cfg.n_paths, cfg.seed, cfg.threads);
        a.objective = bet_overlay_objective(br, sc);
        a.floor_hits = br.ens.floor_hits;
        out.ens = std::move(br.ens);
        return out;
    }
    if (sc.id == ScenarioId::fixed_mix) {
        SimOptions opts;
        opts.threads = cfg.threads;
        out.ens = simulate_state(sc.model, grid,
                                 sc.candidate.scaled(cfg.control_scale),
                                 cfg.n_paths, sc.params.x0, cfg.seed, opts);
        a.objective = evaluate_objective(out.ens, sc.objective);
        a.floor_hits = out.ens.floor_hits;
        return out;
    }

    // Candidate scenarios: market, zero_control, consumption.
    AdjointPair adj;
    const bool scaled = cfg.control_scale != 1.0;
    if (!scaled) {
        CandidateRun run =
            make_candidate_run(sc, grid, cfg.n_paths, cfg.seed, cfg.threads);
        adj = std::move(run.adjoint);
        a.objective = sc.id == ScenarioId::market
                          ? detail::market_candidate_objective(run, sc)
                          : evaluate_objective(run.ens, sc.objective);
        if (sc.id == ScenarioId::market) a.budget_multiplier = run.lambda;
        out.ens = std::move(run.ens);
    } else {
        // Open-loop rescaling of the realized candidate: take the control
        // the candidate ensemble actually used, scale it pointwise, and
        // re-simulate under the same driving noise.  (Scaling the
        // consumption *feedback rate* instead would drain wealth to zero
        // in finite time for any scale, because the closed-form rate
        // spends the whole budget; the realized table stays admissible.)
        const std::size_t nodes = grid.nodes();
        std::vector<double> table(nodes * cfg.n_paths);
        {
            const CandidateRun base =
                make_candidate_run(sc, grid, cfg.n_paths, cfg.seed, cfg.threads);
            for (std::size_t i = 0; i < nodes; ++i)
                for (std::size_t j = 0; j < cfg.n_paths; ++j)
                    table[i * cfg.n_paths + j] =
                        cfg.control_scale * base.ens.control.at(i, j);
        }
        SimOptions opts;
        opts.threads = cfg.threads;
        const ControlSpec control =
            ControlSpec::per_path(std::move(table), nodes, cfg.n_paths);
        out.ens = simulate_state(sc.model, grid, control, cfg.n_paths,
                                 sc.params.x0, cfg.seed, opts);
        std::vector<double> terminal_p(cfg.n_paths, 0.0);
        if (sc.objective.terminal_enabled)
            terminal_p = terminal_condition(out.ens.state.row(cfg.steps),
                                            sc.objective.pref.terminal,
                                            sc.objective.pref.weight_terminal);
        adj = solve_adjoint_lsmc(out.ens, sc.model, terminal_p,
                                 lsmc_options_for(sc, cfg.lsmc_degree));
        a.objective = evaluate_objective(out.ens, sc.objective);
    }
    a.floor_hits = out.ens.floor_hits;

    ResidualOptions ropts;
    ropts.tolerance = cfg.mp_tolerance;
    a.residual = mp_residual(out.ens, adj, sc.model, sc.objective, ropts);

    const ControlSpec direction = duality_const_direction(sc, 0.1);
    GateauxOptions gopts;
    gopts.threads = cfg.threads;
    a.gateaux = gateaux_derivative(out.ens, sc.model, sc.objective, direction,
                                   sc.params.x0, gopts);
    a.duality = duality_check(out.ens, adj, sc.model, sc.objective, direction,
                              cfg.threads);
    return out;
}

} // namespace prospect
