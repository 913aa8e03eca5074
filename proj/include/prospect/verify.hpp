// Self-verification suites: named bundles of invariant checks with
// pinned sample sizes and fixed seeds, producing a machine-readable
// pass/fail table.  Every check is deterministic for a given seed and
// independent of the thread count, so a verify report is byte-stable
// across runs and across --threads settings.
//
// Suites:
//   pit       distributional invariants (self-PIT uniformity, pricing
//             kernel law, kernel/wealth anti-monotonicity, budget,
//             pathwise drift identity)
//   residual  stationarity residual on candidate and perturbed controls,
//             including the regression-based adjoint solver
//   duality   variational/adjoint integration-by-parts identity
//   gateaux   finite-difference vs analytic directional derivatives
//   all       union of the above plus the estimator cross-checks
//
// The estimator cross-checks re-derive the order-statistic distortion
// increments independently of the estimator header.  Setting the
// environment variable PROSPECT_SKEW_CHOQUET_WEIGHTS=1 deliberately
// skews that re-derivation; the telescoping and self-consistency checks
// must then fail, which demonstrates that the verify machinery can
// actually reject a broken weight scheme.
#pragma once

#include <cstdlib>
#include <string>
#include <vector>

#include "prospect/choquet.hpp"
#include "prospect/config.hpp"
#include "prospect/report.hpp"
#include "prospect/scenarios.hpp"

namespace prospect {

struct CheckResult {
    std::string suite;
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    std::size_t failures() const {
        std::size_t k = 0;
        for (const auto& c : checks)
            if (!c.pass) ++k;
        return k;
    }
};

enum class VerifySuite { all, pit, duality, gateaux, residual };

inline VerifySuite verify_suite_from_name(const std::string& name) {
    if (name == "all") return VerifySuite::all;
    if (name == "pit") return VerifySuite::pit;
    if (name == "duality") return VerifySuite::duality;
    if (name == "gateaux") return VerifySuite::gateaux;
    if (name == "residual") return VerifySuite::residual;
    throw ConfigError("verify: unknown suite '" + name +
                      "' (expected all, pit, duality, gateaux or residual)");
}

inline std::string verify_suite_name(VerifySuite s) {
    switch (s) {
        case VerifySuite::all: return "all";
        case VerifySuite::pit: return "pit";
        case VerifySuite::duality: return "duality";
        case VerifySuite::gateaux: return "gateaux";
        case VerifySuite::residual: return "residual";
    }
    return "all";
}

namespace detail {

inline bool skew_choquet_weights_enabled() {
    const char* v = std::getenv("PROSPECT_SKEW_CHOQUET_WEIGHTS");
    return v != nullptr && std::string(v) != "0" && std::string(v) != "";
}

inline void push_check(VerifyReport& rep, const std::string& suite,
                       const std::string& name, double measured,
                       double threshold, bool pass, std::string detail = {}) {
    CheckResult c;
    c.suite = suite;
    c.name = name;
    c.measured = measured;
    c.threshold = threshold;
    c.pass = pass;
    c.detail = std::move(detail);
    rep.checks.push_back(std::move(c));
}

// Upper-bound check: pass iff measured <= threshold.
inline void push_le(VerifyReport& rep, const std::string& suite,
                    const std::string& name, double measured, double threshold,
                    std::string detail = {}) {
    push_check(rep, suite, name, measured, threshold,
               measured <= threshold, std::move(detail));
}

// Lognormal sample from a dedicated stream away from the path streams.
inline std::vector<double> verify_lognormal_sample(std::uint64_t seed,
                                                   std::uint64_t tag,
                                                   std::size_t n, double mu,
                                                   double sigma) {
    const std::uint64_t key = rng_stream_key(seed, (1ull << 41) + tag);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::exp(mu + sigma * rng_normal(key, i));
    return out;
}

// ---------------------------------------------------------------------------
// Estimator cross-checks (suite "estimators", included in "all")
// ---------------------------------------------------------------------------

inline void verify_estimators(VerifyReport& rep, std::uint64_t seed) {
    const std::string s = "estimators";
    const auto sqrt_util = [](double x) { return std::sqrt(x); };

    // Frozen two-point oracle: sample {1, 4}, utility sqrt(x), distortion
    // w(p) = p^2.  Order-statistic: 1*(w(1)-w(1/2)) + 2*(w(1/2)-w(0)) =
    // 0.75 + 0.5; plugin: (1*w'(3/4) + 2*w'(1/4))/2 = (1.5 + 1.0)/2.
    {
        const std::vector<double> sample = {1.0, 4.0};
        const DistortionFn w = DistortionFn::inverse_s(1.0, 1.0, 0.0);
        const double os = choquet_order_stat_fn(sample, sqrt_util, w).value;
        const double pl = choquet_plugin_fn(sample, sqrt_util, w).value;
        push_le(rep, s, "two_point_order_stat", std::fabs(os - 1.25), 1e-12);
        push_le(rep, s, "two_point_plugin", std::fabs(pl - 1.25), 1e-12);
    }

    // Identity distortion must reduce both estimators to the sample mean
    // of the utilities: the plugin bitwise (identical arithmetic), the
    // order-statistic version up to rounding of the weight increments.
    {
        const auto sample = verify_lognormal_sample(seed, 1, 1000, 0.0, 0.5);
        std::vector<double> utils(sample.size());
        for (std::size_t i = 0; i < sample.size(); ++i)
            utils[i] = sqrt_util(sample[i]);
        const double mean_util =
            pairwise_sum(utils) / static_cast<double>(utils.size());
        const DistortionFn id = DistortionFn::identity();
        const double pl = choquet_plugin_fn(sample, sqrt_util, id).value;
        const double os = choquet_order_stat_fn(sample, sqrt_util, id).value;
        push_le(rep, s, "identity_weight_plugin_is_mean",
                std::fabs(pl - mean_util), 0.0);
        push_le(rep, s, "identity_weight_order_stat_is_mean",
                std::fabs(os - mean_util) / std::fabs(mean_util), 1e-14);
    }

    // Dual-route agreement on a lognormal sample under a genuine
    // inverse-S distortion.
    {
        const auto sample = verify_lognormal_sample(seed, 2, 10000, 0.0, 0.5);
        const UtilityFn util = UtilityFn::power(0.5);
        const DistortionFn w = DistortionFn::inverse_s(0.3, 1.0, 1.0);
        const ChoquetEstimate os = choquet_order_stat(sample, util, w);
        const ChoquetEstimate pl = choquet_plugin(sample, util, w);
        const double se = std::sqrt(os.std_error * os.std_error +
                                    pl.std_error * pl.std_error);
        push_le(rep, s, "order_stat_vs_plugin_lognormal",
                std::fabs(os.value - pl.value), 3.0 * se);
    }

    // Independent re-derivation of the order-statistic weight increments
    // w(1-(i-1)/n) - w(1-i/n).  This block hosts the deliberate-breakage
    // hook: under PROSPECT_SKEW_CHOQUET_WEIGHTS the first increment is
    // inflated by 5%, and both checks below must go red.
    {
        const std::size_t n = 64;
        const auto sample = verify_lognormal_sample(seed, 3, n, 0.0, 0.5);
        const DistortionFn w = DistortionFn::inverse_s(0.3, 1.0, 1.0);
        std::vector<double> sorted(sample);
        std::sort(sorted.begin(), sorted.end());
        const double nd = static_cast<double>(n);
        std::vector<double> incr(n);
        for (std::size_t i = 1; i <= n; ++i)
            incr[i - 1] = w.value(1.0 - (static_cast<double>(i) - 1.0) / nd) -
                          w.value(1.0 - static_cast<double>(i) / nd);
        if (skew_choquet_weights_enabled()) incr[0] *= 1.05;

        const double total = pairwise_sum(incr);
        const double span = w.value(1.0) - w.value(0.0);
        push_le(rep, s, "weight_increments_telescope",
                std::fabs(total - span), 1e-12,
                "sum of order-statistic weight increments vs w(1) - w(0)");

        std::vector<double> terms(n);
        for (std::size_t i = 0; i < n; ++i)
            terms[i] = std::sqrt(sorted[i]) * incr[i];
        const double rederived = pairwise_sum(terms);
        const double direct = choquet_order_stat_fn(sample, sqrt_util, w).value;
        push_le(rep, s, "order_stat_self_consistency",
                std::fabs(rederived - direct), 1e-12,
                "independent weight re-derivation vs estimator");
    }
}

// ---------------------------------------------------------------------------
// pit suite
// ---------------------------------------------------------------------------

inline void verify_pit(VerifyReport& rep, std::uint64_t seed, unsigned threads) {
    const std::string s = "pit";
    const std::size_t n = 20000, steps = 50;
    const double ks_tol = 1.63 / std::sqrt(static_cast<double>(n)) +
                          1.0 / static_cast<double>(n);

    const Scenario sc = build_scenario(ScenarioId::market, ScenarioParams{});
    const TimeGrid grid(sc.params.horizon, steps);
    const CandidateRun run = make_candidate_run(sc, grid, n, seed, threads);

    // Self-PIT of the simulated terminal state must be uniform.
    {
        const auto xt = run.ens.state.row(steps);
        const auto pit = pit_transform(xt);
        push_le(rep, s, "terminal_state_self_pit_ks",
                ks_distance_uniform(pit), ks_tol);
    }

    // The simulated pricing kernel must follow its analytic terminal law.
    {
        const auto rho = run.ens.kernel.row(steps);
        std::vector<double> pit(rho.size());
        for (std::size_t j = 0; j < rho.size(); ++j)
            pit[j] = kernel_terminal_cdf(rho[j], sc.params);
        push_le(rep, s, "kernel_terminal_law_ks", ks_distance_uniform(pit),
                ks_tol);
    }

    // Candidate terminal wealth is anti-monotone in the kernel:
    // F_rho(rho) + F_X(X) = 1 up to empirical-CDF error.
    {
        const auto rho = run.ens.kernel.row(steps);
        EmpiricalCdf fx(run.terminal_wealth);
        double worst = 0.0;
        for (std::size_t j = 0; j < rho.size(); ++j) {
            const double gap = kernel_terminal_cdf(rho[j], sc.params) +
                               fx(run.terminal_wealth[j]) - 1.0;
            worst = std::max(worst, std::fabs(gap));
        }
        push_le(rep, s, "kernel_wealth_anti_monotone", worst, ks_tol);
    }

    // Budget feasibility of the candidate terminal wealth.
    {
        const auto rho = run.ens.kernel.row(steps);
        std::vector<double> priced(rho.size());
        for (std::size_t j = 0; j < rho.size(); ++j)
            priced[j] = rho[j] * run.terminal_wealth[j];
        const double cost = mean(priced);
        push_le(rep, s, "candidate_budget", std::fabs(cost - sc.params.x0),
                1e-3 * sc.params.x0);
    }

    // Pathwise drift identity of the kernel-proportional adjoint:
    // p * b_u + q * s_u vanishes for every node and path.
    {
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.nodes(); ++i) {
            const auto x = run.ens.state.row(i);
            const auto p = run.adjoint.p.row(i);
            const auto q = run.adjoint.q.row(i);
            for (std::size_t j = 0; j < x.size(); ++j) {
                const double bu = sc.model.drift_u(grid.t(i), 0.0, x[j]);
                const double su = sc.model.vol_u(grid.t(i), 0.0, x[j]);
                worst = std::max(worst, std::fabs(p[j] * bu + q[j] * su));
            }
        }
        push_le(rep, s, "kernel_adjoint_drift_identity", worst, 1e-12);
    }
}

// ---------------------------------------------------------------------------
// residual suite
// ---------------------------------------------------------------------------

inline void verify_residual(VerifyReport& rep, std::uint64_t seed,
                            unsigned threads) {
    const std::string s = "residual";
    SimOptions sim;
    sim.threads = threads;

    // Candidate consumption plan: stationarity residual should vanish.
    {
        const Scenario sc = build_scenario(ScenarioId::consumption, ScenarioParams{});
        const TimeGrid grid(sc.params.horizon, 100);
        const CandidateRun run = make_candidate_run(sc, grid, 4000, seed, threads);
        const ResidualReport rr =
            mp_residual(run.ens, run.adjoint, sc.model, sc.objective);
        push_check(rep, s, "consumption_candidate_consistent", rr.overall_rms,
                   rr.tolerance, rr.consistent && rr.overall_rms <= 1e-2,
                   "closed-form candidate with analytic adjoint");
    }

    // Suboptimal consumption plan through the full numerical pipeline:
    // simulate a constant rate, regression adjoint, residual -> violated.
    // (The optimal rate is strongly time-varying, so a constant one must
    // leave a stationarity residual far above the noise floor.)
    {
        const Scenario sc = build_scenario(ScenarioId::consumption, ScenarioParams{});
        const TimeGrid grid(sc.params.horizon, 100);
        const PathEnsemble ens =
            simulate_state(sc.model, grid, ControlSpec::constant(0.5), 2000,
                           sc.params.x0, seed, sim);
        std::vector<double> terminal_p(ens.n_paths, 0.0);
        const AdjointPair adj = solve_adjoint_lsmc(ens, sc.model, terminal_p,
                                                   lsmc_options_for(sc));
        const ResidualReport rr = mp_residual(ens, adj, sc.model, sc.objective);
        push_check(rep, s, "consumption_const_rate_violated",
                   rr.overall_rms, rr.tolerance, !rr.consistent,
                   "constant consumption rate 0.5 must be rejected");
    }

    // Zero-control scenario: the regression adjoint of the zero candidate
    // is identically (0, 0).
    {
        const Scenario sc = build_scenario(ScenarioId::zero_control, ScenarioParams{});
        const TimeGrid grid(sc.params.horizon, 50);
        const CandidateRun run = make_candidate_run(sc, grid, 2000, seed, threads);
        std::vector<double> terminal_p(run.ens.n_paths, 0.0);
        const AdjointPair adj = solve_adjoint_lsmc(run.ens, sc.model, terminal_p,
                                                   lsmc_options_for(sc));
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.nodes(); ++i) {
            const auto p = adj.p.row(i);
            const auto q = adj.q.row(i);
            for (std::size_t j = 0; j < p.size(); ++j)
                worst = std::max(worst,
                                 std::max(std::fabs(p[j]), std::fabs(q[j])));
        }
        push_le(rep, s, "zero_control_lsmc_adjoint_zero", worst, 1e-10);
    }

    // A nonzero constant control in the zero-control scenario must be
    // flagged: the distorted marginal reward at the control is far from 0.
    {
        const Scenario sc = build_scenario(ScenarioId::zero_control, ScenarioParams{});
        const TimeGrid grid(sc.params.horizon, 50);
        const PathEnsemble ens =
            simulate_state(sc.model, grid, ControlSpec::constant(0.5), 2000,
                           sc.params.x0, seed, sim);
        std::vector<double> terminal_p(ens.n_paths, 0.0);
        const AdjointPair adj = solve_adjoint_lsmc(ens, sc.model, terminal_p,
                                                   lsmc_options_for(sc));
        const ResidualReport rr = mp_residual(ens, adj, sc.model, sc.objective);
        push_check(rep, s, "zero_control_const_violated", rr.overall_rms,
                   rr.tolerance, !rr.consistent,
                   "constant control 0.5 must be rejected");
    }

    // Market candidate: with the kernel-proportional adjoint the residual
    // reduces to the pathwise drift identity.
    {
        const Scenario sc = build_scenario(ScenarioId::market, ScenarioParams{});
        const TimeGrid grid(sc.params.horizon, 50);
        const CandidateRun run = make_candidate_run(sc, grid, 2000, seed, threads);
        const ResidualReport rr =
            mp_residual(run.ens, run.adjoint, sc.model, sc.objective);
        push_check(rep, s, "market_candidate_consistent", rr.overall_rms, 1e-12,
                   rr.consistent && rr.overall_rms <= 1e-12,
                   "kernel-proportional adjoint annihilates the control drift");
    }
}

// ---------------------------------------------------------------------------
// duality suite
// ---------------------------------------------------------------------------

inline void verify_duality_one(VerifyReport& rep, const Scenario& sc,
                               const PathEnsemble& ens, const AdjointPair& adj,
                               const ControlSpec& direction,
                               const std::string& name, unsigned threads) {
    const DualityResult d =
        duality_check(ens, adj, sc.model, sc.objective, direction, threads);
    const double tol = std::max(3.0 * d.gap_std_error, 1e-12);
    push_le(rep, "duality", name, std::fabs(d.gap), tol,
            "E[p_T Z_T] vs E ∫ [v (p b_u + q s_u) - Z g_x] dt");
}

inline void verify_duality(VerifyReport& rep, std::uint64_t seed,
                           unsigned threads) {
    const std::size_t n = 10000, steps = 200;

    {
        const Scenario sc = build_scenario(ScenarioId::market, ScenarioParams{});
        const TimeGrid grid(sc.params.horizon, steps);
        const CandidateRun run = make_candidate_run(sc, grid, n, seed, threads);
        verify_duality_one(rep, sc, run.ens, run.adjoint,
                           duality_const_direction(sc, 0.1),
                           "market_const_direction", threads);
        verify_duality_one(rep, sc, run.ens, run.adjoint,
                           duality_candidate_direction(sc, run.ens, 0.5),
                           "market_candidate_direction", threads);
    }
    {
        const Scenario sc = build_scenario(ScenarioId::zero_control, ScenarioParams{});
        const TimeGrid grid(sc.params.horizon, steps);
        const CandidateRun run = make_candidate_run(sc, grid, n, seed, threads);
        verify_duality_one(rep, sc, run.ens, run.adjoint,
                           duality_const_direction(sc, 0.1),
                           "zero_control_const_direction", threads);
    }
    {
        const Scenario sc = build_scenario(ScenarioId::consumption, ScenarioParams{});
        const TimeGrid grid(sc.params.horizon, steps);
        const CandidateRun run = make_candidate_run(sc, grid, n, seed, threads);
        verify_duality_one(rep, sc, run.ens, run.adjoint,
                           duality_const_direction(sc, 0.1),
                           "consumption_const_direction", threads);
        verify_duality_one(rep, sc, run.ens, run.adjoint,
                           duality_candidate_direction(sc, run.ens, 0.5),
                           "consumption_candidate_direction", threads);
    }
}

// ---------------------------------------------------------------------------
// gateaux suite
// ---------------------------------------------------------------------------

inline void verify_gateaux_one(VerifyReport& rep, const Scenario& sc,
                               const PathEnsemble& ens,
                               const ControlSpec& direction,
                               const std::string& name, unsigned threads) {
    GateauxOptions gopts;
    gopts.threads = threads;
    const GateauxResult g = gateaux_derivative(ens, sc.model, sc.objective,
                                               direction, sc.params.x0, gopts);
    const double se = std::sqrt(g.fd_std_error * g.fd_std_error +
                                g.analytic_std_error * g.analytic_std_error);
    const double tol = std::max(3.0 * se, 5e-3 * std::fabs(g.analytic));
    push_le(rep, "gateaux", name, std::fabs(g.gap), tol,
            "extrapolated finite difference vs first-variation formula");
}

inline void verify_gateaux(VerifyReport& rep, std::uint64_t seed,
                           unsigned threads) {
    const std::size_t n = 5000, steps = 50;
    SimOptions sim;
    sim.threads = threads;

    {
        const Scenario sc = build_scenario(ScenarioId::market, ScenarioParams{});
        const TimeGrid grid(sc.params.horizon, steps);
        const PathEnsemble ens = simulate_state(sc.model, grid, sc.candidate, n,
                                                sc.params.x0, seed, sim);
        verify_gateaux_one(rep, sc, ens, ControlSpec::constant(0.1),
                           "market_terminal_objective", threads);
    }
    {
        const Scenario sc = build_scenario(ScenarioId::zero_control, ScenarioParams{});
        const TimeGrid grid(sc.params.horizon, steps);
        const PathEnsemble ens =
            simulate_state(sc.model, grid, ControlSpec::constant(0.5), n,
                           sc.params.x0, seed, sim);
        verify_gateaux_one(rep, sc, ens, ControlSpec::constant(0.3),
                           "zero_control_interior_point", threads);
    }
    {
        const Scenario sc = build_scenario(ScenarioId::consumption, ScenarioParams{});
        const TimeGrid grid(sc.params.horizon, steps);
        const PathEnsemble ens =
            simulate_state(sc.model, grid, ControlSpec::constant(0.3), n,
                           sc.params.x0, seed, sim);
        verify_gateaux_one(rep, sc, ens, ControlSpec::constant(0.1),
                           "consumption_nonoptimal_const", threads);
    }
}

} // namespace detail

inline VerifyReport run_verify(VerifySuite suite, std::uint64_t seed = 7,
                               unsigned threads = 1) {
    VerifyReport rep;
    rep.suite = verify_suite_name(suite);
    rep.seed = seed;
    const bool all = suite == VerifySuite::all;
    if (all) detail::verify_estimators(rep, seed);
    if (all || suite == VerifySuite::pit) detail::verify_pit(rep, seed, threads);
    if (all || suite == VerifySuite::residual)
        detail::verify_residual(rep, seed, threads);
    if (all || suite == VerifySuite::duality)
        detail::verify_duality(rep, seed, threads);
    if (all || suite == VerifySuite::gateaux)
        detail::verify_gateaux(rep, seed, threads);
    return rep;
}

inline ordered_json verify_report_json(const VerifyReport& rep) {
    ordered_json j;
    j["schema"] = kReportSchemaVersion;
    j["command"] = "verify";
    j["suite"] = rep.suite;
    j["seed"] = rep.seed;
    ordered_json checks = ordered_json::array();
    for (const auto& c : rep.checks) {
        ordered_json e;
        e["suite"] = c.suite;
        e["name"] = c.name;
        e["pass"] = c.pass;
        e["measured"] = c.measured;
        e["threshold"] = c.threshold;
        if (!c.detail.empty()) e["detail"] = c.detail;
        checks.push_back(std::move(e));
    }
    j["checks"] = std::move(checks);
    j["pass"] = rep.pass();
    return j;
}

// Fixed-width text table, one row per check, for terminal output.
inline std::string verify_table_text(const VerifyReport& rep) {
    std::string out = "status suite      check                                "
                      "measured      threshold\n";
    char buf[160];
    for (const auto& c : rep.checks) {
        std::snprintf(buf, sizeof(buf), "%-6s %-10s %-36s %-13.6g %-13.6g\n",
                      c.pass ? "PASS" : "FAIL", c.suite.c_str(), c.name.c_str(),
                      c.measured, c.threshold);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "verify: %zu checks, %zu failed\n",
                  rep.checks.size(), rep.failures());
    out += buf;
    return out;
}

} // namespace prospect
