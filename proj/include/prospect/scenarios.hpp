// Worked scenario presets: model + preferences + candidate optimal
// control, together with the closed forms the test-suite pins them to.
//
//   market       — terminal-wealth objective in a log-normal market,
//                  candidate terminal wealth built from the pricing
//                  kernel and a budget-matching multiplier;
//   zero_control — running control cost with multiplicative noise whose
//                  candidate optimum is u = 0 and adjoint pair (0, 0);
//   consumption  — running reward on the consumption rate u*X plus the
//                  state level, with a singular closed-form candidate
//                  consumption path and adjoint p_t = T - t;
//   fixed_mix    — constant-fraction investment with consumption, for
//                  objective-evaluation cross-checks;
//   bet_overlay  — repeated small bets layered on a diffusion, evaluated
//                  through the same distorted running functional.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "prospect/adjoint.hpp"
#include "prospect/choquet.hpp"
#include "prospect/ensemble.hpp"
#include "prospect/errors.hpp"
#include "prospect/maximum_principle.hpp"
#include "prospect/model.hpp"
#include "prospect/numerics.hpp"
#include "prospect/objective.hpp"
#include "prospect/preference.hpp"
#include "prospect/rng.hpp"
#include "prospect/simulate.hpp"

namespace prospect {

enum class ScenarioId { market, zero_control, consumption, fixed_mix, bet_overlay };

inline std::string scenario_name(ScenarioId id) {
    switch (id) {
        case ScenarioId::market: return "market";
        case ScenarioId::zero_control: return "zero_control";
        case ScenarioId::consumption: return "consumption";
        case ScenarioId::fixed_mix: return "fixed_mix";
        case ScenarioId::bet_overlay: return "bet_overlay";
    }
    return "unknown";
}

inline ScenarioId scenario_from_name(const std::string& name) {
    if (name == "market") return ScenarioId::market;
    if (name == "zero_control") return ScenarioId::zero_control;
    if (name == "consumption") return ScenarioId::consumption;
    if (name == "fixed_mix") return ScenarioId::fixed_mix;
    if (name == "bet_overlay") return ScenarioId::bet_overlay;
    throw ConfigError("unknown scenario '" + name + "'");
}

// All scenario knobs in one bag; each scenario reads the fields it uses.
struct ScenarioParams {
    double horizon = 1.0;
    double x0 = 1.0;

    // Market block.
    double rate = 0.02;
    double growth = 0.06;
    double vol = 0.2;
    double market_price_of_risk = std::numeric_limits<double>::quiet_NaN();  // derived
    double gamma = 0.5;          // terminal utility exponent
    double term_nu = 0.3, term_a = 1.0, term_b = 1.0;  // terminal distortion
    bool terminal_identity_weight = false;             // override: w = id

    // Running-term block.
    double alpha = 0.5;                                // running gain exponent
    double run_nu = 0.0, run_a = 1.0, run_b = 0.0;     // running gain distortion
    double zero_control_nu = 0.3, zero_control_a = 1.0, zero_control_b = 1.0;

    // Fixed-mix / bet block.
    double invested_fraction = 0.6;
    double consumption_rate = 0.3;
    double bet_stake = 0.2;
    double bet_gain = 1.0;     // payoff multiple on a win, per unit staked
    double bet_win_prob = 0.5;

    double theta() const {
        if (std::isfinite(market_price_of_risk)) return market_price_of_risk;
        return (growth - rate) / vol;
    }
};

struct Scenario {
    ScenarioId id{};
    std::string name;
    ScenarioParams params;
    ModelSpec model = ModelSpec::linear_in_x(0, 0, 0, 0);
    ObjectiveSpec objective;
    ControlSpec candidate = ControlSpec::constant(0.0);
    bool needs_kernel = false;
};

// ---------------------------------------------------------------------------
// Closed forms

// Candidate consumption rate c(t) = ((T - t)/C)^(1/(alpha-1)) with
// C = (1 - nu)(b + 1) the top-rank weight of the running distortion.
// Blows up at t -> T: the marginal running reward of the last unit of
// consumption must match an adjoint that vanishes at the horizon.
inline double consumption_rate_closed_form(double t, const ScenarioParams& p) {
    if (!(t < p.horizon))
        throw DomainError("consumption rate: defined only for t < horizon");
    const double top_weight = (1.0 - p.run_nu) * (p.run_b + 1.0);
    if (!(top_weight > 0.0))
        throw ConfigError("consumption rate: degenerate running distortion");
    return std::pow((p.horizon - t) / top_weight, 1.0 / (p.alpha - 1.0));
}

// E[X_t] for the candidate consumption path: x0 + ∫_0^t c(s) ds, because
// the noise factor has unit expectation.
inline double consumption_mean_state(double t, const ScenarioParams& p) {
    const double top_weight = (1.0 - p.run_nu) * (p.run_b + 1.0);
    const double m = 1.0 / (p.alpha - 1.0);
    const double cpow = std::pow(top_weight, -m);
    const double integral =
        (std::pow(p.horizon, m + 1.0) - std::pow(p.horizon - t, m + 1.0)) / (m + 1.0);
    return p.x0 + cpow * integral;
}

// Log-normal CDF of the pricing kernel at the horizon:
//   log rho_T ~ N( -(r + theta^2/2) T, theta^2 T ).
inline double kernel_terminal_cdf(double rho, const ScenarioParams& p) {
    if (!(rho > 0.0)) return 0.0;
    const double T = p.horizon;
    const double th = p.theta();
    const double m = -(p.rate + 0.5 * th * th) * T;
    const double s = th * std::sqrt(T);
    if (s == 0.0) return rho >= std::exp(m) ? 1.0 : 0.0;
    return norm_cdf((std::log(rho) - m) / s);
}

// Candidate terminal wealth per kernel sample:
//   X_T = (l')^{-1}( lambda rho / w'(F_rho(rho)) ).
// Anti-monotone in rho by construction: large kernel states (bad worlds)
// receive low wealth, and the distortion derivative is evaluated at the
// kernel's own rank, which equals one minus the wealth rank.
inline std::vector<double> market_terminal_wealth(std::span<const double> rho_terminal,
                                                  double lambda,
                                                  const UtilityFn& terminal_util,
                                                  const DistortionFn& terminal_weight,
                                                  const ScenarioParams& p) {
    std::vector<double> out(rho_terminal.size());
    for (std::size_t j = 0; j < rho_terminal.size(); ++j) {
        const double rho = rho_terminal[j];
        const double w = terminal_weight.deriv(kernel_terminal_cdf(rho, p));
        out[j] = terminal_util.deriv_inverse(lambda * rho / w);
    }
    return out;
}

// Budget-matching multiplier: bisection on log(lambda) until the kernel
// price of the candidate terminal wealth matches the initial endowment
// to |E[rho X] - x0| <= budget_tol * x0.
inline double solve_budget_multiplier(std::span<const double> rho_terminal,
                                      const UtilityFn& terminal_util,
                                      const DistortionFn& terminal_weight,
                                      const ScenarioParams& p,
                                      double budget_tol = 1e-4) {
    const std::size_t n = rho_terminal.size();
    std::vector<double> priced(n);
    const auto budget = [&](double lambda) {
        const std::vector<double> x =
            market_terminal_wealth(rho_terminal, lambda, terminal_util,
                                   terminal_weight, p);
        for (std::size_t j = 0; j < n; ++j) priced[j] = rho_terminal[j] * x[j];
        return pairwise_sum(priced) / static_cast<double>(n);
    };

    double lo = std::log(1e-8), hi = std::log(1e8);
    // The priced budget is strictly decreasing in lambda (marginal utility
    // inverse has a negative exponent), so bisection applies directly.
    if (!(budget(std::exp(lo)) >= p.x0 && budget(std::exp(hi)) <= p.x0))
        throw NumericalError("budget multiplier: root not bracketed in [1e-8, 1e8]");
    double mid = 0.0;
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double value = budget(std::exp(mid));
        if (std::fabs(value - p.x0) <= budget_tol * p.x0) return std::exp(mid);
        (value > p.x0 ? lo : hi) = mid;
    }
    throw NumericalError("budget multiplier: bisection failed to reach tolerance");
}

// ---------------------------------------------------------------------------
// Scenario builders

inline Scenario build_scenario(ScenarioId id, const ScenarioParams& params) {
    Scenario sc;
    sc.id = id;
    sc.name = scenario_name(id);
    sc.params = params;
    const double th = params.theta();

    switch (id) {
        case ScenarioId::market: {
            if (std::isfinite(params.market_price_of_risk) &&
                std::fabs(params.vol * th - (params.growth - params.rate)) > 1e-12)
                throw ConfigError(
                    "market scenario: vol * market_price_of_risk must equal "
                    "growth - rate");
            // Wealth with invested fraction u:
            //   dX = (r + (mu - r) u) X dt + sigma u X dW.
            sc.model = ModelSpec::linear_in_x(params.rate, params.growth - params.rate,
                                              0.0, params.vol);
            sc.objective.pref.terminal = UtilityFn::power(params.gamma);
            sc.objective.pref.weight_terminal =
                params.terminal_identity_weight
                    ? DistortionFn::identity()
                    : DistortionFn::inverse_s(params.term_nu, params.term_a,
                                              params.term_b);
            sc.objective.running.enabled = false;
            sc.objective.terminal_enabled = true;
            // Stand-in candidate fraction; the kernel-proportional adjoint
            // annihilates p b_u + q s_u for every control, so verification
            // quantities do not depend on this choice.
            sc.candidate = ControlSpec::constant(th / params.vol);
            sc.needs_kernel = true;
            break;
        }
        case ScenarioId::zero_control: {
            // dX = -u X dt + X dW; running cost on the control itself, no
            // terminal reward.  Candidate optimum: do nothing.
            sc.model = ModelSpec::linear_in_x(0.0, -1.0, 1.0, 0.0);
            sc.objective.pref.running_gain = UtilityFn::power(params.alpha);
            sc.objective.pref.running_loss = UtilityFn::power(params.alpha);
            sc.objective.pref.weight_gain = DistortionFn::inverse_s(
                params.zero_control_nu, params.zero_control_a, params.zero_control_b);
            sc.objective.pref.weight_loss = DistortionFn::inverse_s(
                params.zero_control_nu, params.zero_control_a, params.zero_control_b);
            sc.objective.pref.terminal = UtilityFn::zero();
            sc.objective.running.enabled = true;
            sc.objective.running.transform = ControlTransform::raw_control;
            sc.objective.terminal_enabled = false;
            sc.candidate = ControlSpec::constant(0.0);
            break;
        }
        case ScenarioId::consumption: {
            // dX = -u X dt + X dW with consumption rate u X; running reward
            // zeta(uX) distorted, plus the state level itself.
            if (!(params.run_a > 0.0))
                throw ConfigError(
                    "consumption scenario: running distortion needs a > 0 so the "
                    "top-rank weight is the b-branch value (1-nu)(b+1)");
            sc.model = ModelSpec::linear_in_x(0.0, -1.0, 1.0, 0.0);
            sc.objective.pref.running_gain = UtilityFn::power(params.alpha);
            sc.objective.pref.running_loss = UtilityFn::power(params.alpha);
            sc.objective.pref.weight_gain =
                DistortionFn::inverse_s(params.run_nu, params.run_a, params.run_b);
            sc.objective.pref.weight_loss = DistortionFn::identity();
            sc.objective.pref.terminal = UtilityFn::zero();
            sc.objective.running.enabled = true;
            sc.objective.running.transform = ControlTransform::control_times_state;
            sc.objective.smooth = SmoothRunningTerm::state_level();
            sc.objective.terminal_enabled = false;
            sc.candidate = ControlSpec::constant(0.0);  // replaced per-ensemble
            break;
        }
        case ScenarioId::fixed_mix: {
            // Constant invested fraction pi, consumption control c:
            //   dX = ((r + (mu - r) pi) - c) X dt + sigma pi X dW.
            const double pi = params.invested_fraction;
            sc.model = ModelSpec::linear_in_x(params.rate + (params.growth - params.rate) * pi,
                                              -1.0, params.vol * pi, 0.0);
            sc.objective.pref.running_gain = UtilityFn::power(params.gamma);
            sc.objective.pref.running_loss = UtilityFn::power(params.gamma);
            sc.objective.pref.weight_gain = DistortionFn::identity();
            sc.objective.pref.weight_loss = DistortionFn::identity();
            sc.objective.pref.terminal = UtilityFn::power(params.gamma);
            sc.objective.pref.weight_terminal =
                params.terminal_identity_weight
                    ? DistortionFn::identity()
                    : DistortionFn::inverse_s(params.term_nu, params.term_a,
                                              params.term_b);
            sc.objective.running.enabled = true;
            sc.objective.running.transform = ControlTransform::control_times_state;
            sc.objective.terminal_enabled = true;
            sc.candidate = ControlSpec::constant(params.consumption_rate);
            break;
        }
        case ScenarioId::bet_overlay: {
            const double pi = params.invested_fraction;
            sc.model = ModelSpec::linear_in_x(params.rate + (params.growth - params.rate) * pi,
                                              0.0, params.vol * pi, 0.0);
            sc.objective.pref.running_gain = UtilityFn::power(params.alpha);
            sc.objective.pref.running_loss = UtilityFn::power(params.alpha);
            sc.objective.pref.weight_gain = DistortionFn::inverse_s(
                params.zero_control_nu, params.zero_control_a, params.zero_control_b);
            sc.objective.pref.weight_loss = DistortionFn::inverse_s(
                params.zero_control_nu, params.zero_control_a, params.zero_control_b);
            sc.objective.pref.terminal = UtilityFn::power(params.gamma);
            sc.objective.pref.weight_terminal = DistortionFn::inverse_s(
                params.term_nu, params.term_a, params.term_b);
            // The distorted running term is evaluated on bet outcomes, not
            // on the control; see bet_overlay_run below.
            sc.objective.running.enabled = false;
            sc.objective.terminal_enabled = true;
            sc.candidate = ControlSpec::constant(params.bet_stake);
            break;
        }
    }
    return sc;
}

// ---------------------------------------------------------------------------
// Candidate ensembles

struct CandidateRun {
    PathEnsemble ens;
    AdjointPair adjoint;
    double lambda = 0.0;                  // market only
    std::vector<double> terminal_wealth;  // market only: formula X_T per path
};

// Builds the scenario's candidate ensemble together with its closed-form
// adjoint pair.
//
// market: simulate wealth under the stand-in fraction, attach the exact
// pricing kernel, solve the budget multiplier, and record the candidate
// terminal wealth implied by the kernel.  Adjoint: (lambda rho, -lambda
// theta rho).
//
// consumption: the candidate state is the noise factor V times
// (x0 + ∫ c/V), the candidate control the consumption rate c / X; the
// final node takes one exponential model step so the stored path stays
// inside the scheme's state space.  Adjoint: (T - t, 0).
inline CandidateRun make_candidate_run(const Scenario& sc, const TimeGrid& grid,
                                       std::size_t n_paths, std::uint64_t seed,
                                       unsigned threads = 1) {
    CandidateRun run;
    SimOptions opts;
    opts.threads = threads;

    switch (sc.id) {
        case ScenarioId::market: {
            run.ens = simulate_state(sc.model, grid, sc.candidate, n_paths,
                                     sc.params.x0, seed, opts);
            simulate_pricing_kernel(run.ens, sc.params.rate, sc.params.theta(),
                                    threads);
            const auto rho_T = run.ens.kernel.row(grid.steps);
            run.lambda = solve_budget_multiplier(rho_T, sc.objective.pref.terminal,
                                                 sc.objective.pref.weight_terminal,
                                                 sc.params);
            run.terminal_wealth = market_terminal_wealth(
                rho_T, run.lambda, sc.objective.pref.terminal,
                sc.objective.pref.weight_terminal, sc.params);
            run.adjoint = adjoint_kernel_proportional(run.ens, run.lambda,
                                                      sc.params.theta());
            break;
        }
        case ScenarioId::zero_control: {
            run.ens = simulate_state(sc.model, grid, sc.candidate, n_paths,
                                     sc.params.x0, seed, opts);
            run.adjoint = adjoint_zero(run.ens);
            break;
        }
        case ScenarioId::consumption: {
            // Noise factor V: unit-volatility, driftless exponential paths.
            const ModelSpec noise = ModelSpec::linear_in_x(0.0, 0.0, 1.0, 0.0);
            run.ens = simulate_state(noise, grid, ControlSpec::constant(0.0),
                                     n_paths, 1.0, seed, opts);
            const std::size_t steps = grid.steps;
            const double dt = grid.dt();
            std::vector<double> c(steps);
            for (std::size_t i = 0; i < steps; ++i)
                c[i] = consumption_rate_closed_form(grid.t(i), sc.params);

            for (std::size_t j = 0; j < n_paths; ++j) {
                double integral = 0.0;
                double v_prev = run.ens.state.at(0, j);
                double x_prev = sc.params.x0;
                run.ens.state.at(0, j) = x_prev;
                run.ens.control.at(0, j) = c[0] / x_prev;
                for (std::size_t i = 1; i < steps; ++i) {
                    const double v_cur = run.ens.state.at(i, j);
                    integral += 0.5 * dt * (c[i - 1] / v_prev + c[i] / v_cur);
                    const double x_cur = v_cur * (sc.params.x0 + integral);
                    run.ens.state.at(i, j) = x_cur;
                    run.ens.control.at(i, j) = c[i] / x_cur;
                    v_prev = v_cur;
                    x_prev = x_cur;
                }
                // Terminal node: one exponential model step under the last
                // control value (the closed-form rate is singular at T).
                const double u_last = run.ens.control.at(steps - 1, j);
                const double beta = -u_last;
                const double dw = run.ens.increments.at(steps - 1, j);
                run.ens.state.at(steps, j) =
                    x_prev * std::exp((beta - 0.5) * dt + dw);
                run.ens.control.at(steps, j) = u_last;
            }
            run.adjoint = adjoint_time_to_horizon(run.ens);
            break;
        }
        case ScenarioId::fixed_mix:
        case ScenarioId::bet_overlay: {
            run.ens = simulate_state(sc.model, grid, sc.candidate, n_paths,
                                     sc.params.x0, seed, opts);
            run.adjoint = adjoint_zero(run.ens);
            break;
        }
    }
    return run;
}

// ---------------------------------------------------------------------------
// Perturbation directions for the variational checks
//
// The consumption candidate's rate blows up at the horizon, and the
// variational identity's quadrature error grows with u^2 dt near that
// singularity.  Directions for the consumption scenario therefore fade
// linearly to zero over [T/2, 0.6 T]: the identity being checked holds
// for every admissible direction, and a direction supported away from
// the singular endpoint keeps the discretization bias far below the
// Monte Carlo resolution.  Other scenarios use the direction unchanged.
// ---------------------------------------------------------------------------

inline double direction_taper(double t, double t0, double t1) {
    if (t <= t0) return 1.0;
    if (t >= t1) return 0.0;
    return (t1 - t) / (t1 - t0);
}

inline ControlSpec duality_const_direction(const Scenario& sc, double level) {
    if (sc.id != ScenarioId::consumption) return ControlSpec::constant(level);
    const double t0 = 0.5 * sc.params.horizon;
    const double t1 = 0.6 * sc.params.horizon;
    return ControlSpec::feedback(
        [level, t0, t1](double t, double) {
            return level * direction_taper(t, t0, t1);
        },
        "tapered_constant");
}

// Direction proportional to the realized candidate control (v = share * u).
inline ControlSpec duality_candidate_direction(const Scenario& sc,
                                               const PathEnsemble& ens,
                                               double share) {
    const std::size_t nodes = ens.grid.nodes();
    const std::size_t n = ens.n_paths;
    const double t0 = 0.5 * sc.params.horizon;
    const double t1 = 0.6 * sc.params.horizon;
    std::vector<double> table(nodes * n);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double r = sc.id == ScenarioId::consumption
                             ? direction_taper(ens.grid.t(i), t0, t1)
                             : 1.0;
        const auto u_row = ens.control.row(i);
        for (std::size_t j = 0; j < n; ++j)
            table[i * n + j] = share * r * u_row[j];
    }
    return ControlSpec::per_path(std::move(table), nodes, n);
}

// Batch extra-drift callback for the adjoint solver, forwarding the
// scenario objective's state-gradient (used when running rewards depend
// on the state).
inline LsmcOptions lsmc_options_for(const Scenario& sc, std::size_t degree = 3) {
    LsmcOptions opts;
    opts.basis_degree = degree;
    const ObjectiveSpec spec = sc.objective;
    opts.extra_drift = [spec](std::size_t, double t, std::span<const double> u_row,
                              std::span<const double> x_row, std::span<double> out) {
        running_state_gradient(spec, t, u_row, x_row, out);
    };
    return opts;
}

// ---------------------------------------------------------------------------
// Bet overlay

struct BetRun {
    PathEnsemble ens;      // wealth including bet outcomes
    TimeMajor pnl_rate;    // bet profit-and-loss rate K c X at nodes 0..N-1
};

// Wealth follows the market step and is then scaled by (1 + K c dt) where
// K is +gain with the win probability and -1 otherwise.  Bet outcomes
// draw from a dedicated stream block, so the Brownian increments match
// the plain scenario ensemble path-for-path.
inline BetRun bet_overlay_run(const Scenario& sc, const TimeGrid& grid,
                              std::size_t n_paths, std::uint64_t seed,
                              unsigned threads = 1) {
    if (sc.id != ScenarioId::bet_overlay)
        throw ConfigError("bet_overlay_run: wrong scenario");
    BetRun run;
    run.ens.grid = grid;
    run.ens.n_paths = n_paths;
    run.ens.seed = seed;
    run.ens.increments = TimeMajor(grid.steps, n_paths);
    run.ens.state = TimeMajor(grid.nodes(), n_paths);
    run.ens.control = TimeMajor(grid.nodes(), n_paths);
    run.pnl_rate = TimeMajor(grid.steps, n_paths);

    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);
    const double stake = sc.params.bet_stake;
    const double beta = sc.model.lin_drift0();
    const double s = sc.model.lin_vol0();

    parallel_for(n_paths, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            const std::uint64_t key =
                rng_stream_key(seed, rng_streams::kStatePaths + p);
            const std::uint64_t bet_key =
                rng_stream_key(seed, rng_streams::kOverlay + p);
            double x = sc.params.x0;
            run.ens.state.at(0, p) = x;
            for (std::size_t i = 0; i < grid.steps; ++i) {
                run.ens.control.at(i, p) = stake;
                const double dw = sqdt * rng_normal(key, i);
                run.ens.increments.at(i, p) = dw;
                const double win = rng_uniform(bet_key, i) < sc.params.bet_win_prob;
                const double outcome = win ? sc.params.bet_gain : -1.0;
                run.pnl_rate.at(i, p) = outcome * stake * x;
                x *= std::exp((beta - 0.5 * s * s) * dt + s * dw);
                x *= 1.0 + outcome * stake * dt;
                run.ens.state.at(i + 1, p) = x;
            }
            run.ens.control.at(grid.steps, p) = stake;
        }
    });
    return run;
}

// Distorted running value of the bet overlay: at each node, the Choquet
// functional of the positive and negative parts of the bet P&L rate,
// integrated over time; plus the usual terminal term.
inline ObjectiveValue bet_overlay_objective(const BetRun& run, const Scenario& sc) {
    const std::size_t n = run.ens.n_paths;
    const std::size_t steps = run.ens.grid.steps;
    const std::vector<double> wq = trapezoid_weights(steps, run.ens.grid.dt());
    std::vector<double> gw(n), lw(n), scratch(n);
    std::vector<double> node_gain(steps, 0.0), node_loss(steps, 0.0);

    for (std::size_t i = 0; i < steps; ++i) {
        const auto pnl = run.pnl_rate.row(i);
        signed_rank_weights(pnl, sc.objective.pref.weight_gain,
                            sc.objective.pref.weight_loss,
                            /*substitute_const_limit=*/false, gw, lw);
        for (std::size_t j = 0; j < n; ++j)
            scratch[j] = pnl[j] > 0.0
                             ? sc.objective.pref.running_gain.value(pnl[j]) * gw[j]
                             : 0.0;
        node_gain[i] = wq[i] * pairwise_sum(scratch) / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j)
            scratch[j] = pnl[j] < 0.0
                             ? sc.objective.pref.running_loss.value(-pnl[j]) * lw[j]
                             : 0.0;
        node_loss[i] = wq[i] * pairwise_sum(scratch) / static_cast<double>(n);
    }

    ObjectiveValue out;
    out.n_paths = n;
    out.running_gain = pairwise_sum(node_gain);
    out.running_loss = pairwise_sum(node_loss);
    const auto est = choquet_plugin(run.ens.state.row(steps),
                                    sc.objective.pref.terminal,
                                    sc.objective.pref.weight_terminal);
    out.terminal = est.value;
    out.total = out.running_gain - out.running_loss + out.terminal;
    return out;
}

} // namespace prospect
