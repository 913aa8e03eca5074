// Necessary-condition machinery for candidate optimal controls.
//
// Three independent checks, kept deliberately separate because their
// agreement is the evidence the toolkit exists to produce:
//
//   * mp_residual       — pointwise stationarity residual along paths,
//       p b_u + q s_u + f_u + zeta_+'(k^+) w_+'(...) 1{u>0}
//                        + zeta_-'(k^-) w_-'(...) 1{u<0},
//     which must vanish along an optimal control;
//   * duality_check     — the integration-by-parts identity tying the
//     first-variation process Z to the adjoint pair (p, q);
//   * gateaux_derivative — directional derivatives of the simulated
//     objective, by common-random-number finite differences and by the
//     first-variation formula.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "prospect/adjoint.hpp"
#include "prospect/ensemble.hpp"
#include "prospect/errors.hpp"
#include "prospect/model.hpp"
#include "prospect/numerics.hpp"
#include "prospect/objective.hpp"
#include "prospect/simulate.hpp"

namespace prospect {

// ---------------------------------------------------------------------------
// Shared helpers

// ∂/∂x of the running reward (distorted part plus smooth part) on one
// time-slice.  Zero unless the running argument is u*x or a smooth term
// is present.  Distortion weights use the population tie limit w'(0),
// matching the drift the adjoint equation carries.
inline void running_state_gradient(const ObjectiveSpec& spec, double t,
                                   std::span<const double> u_row,
                                   std::span<const double> x_row,
                                   std::span<double> out) {
    const std::size_t n = u_row.size();
    for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
    if (spec.running.enabled &&
        spec.running.transform == ControlTransform::control_times_state) {
        std::vector<double> args(n), gw(n), lw(n);
        for (std::size_t j = 0; j < n; ++j) args[j] = u_row[j] * x_row[j];
        signed_rank_weights(args, spec.pref.weight_gain, spec.pref.weight_loss,
                            /*substitute_const_limit=*/true, gw, lw);
        for (std::size_t j = 0; j < n; ++j) {
            if (args[j] > 0.0)
                out[j] = spec.pref.running_gain.deriv(args[j]) * u_row[j] * gw[j];
            else if (args[j] < 0.0)
                out[j] = spec.pref.running_loss.deriv(-args[j]) * u_row[j] * lw[j];
        }
    }
    if (spec.smooth.enabled)
        for (std::size_t j = 0; j < n; ++j)
            out[j] += spec.smooth.df_dx(t, u_row[j], x_row[j]);
}

// ---------------------------------------------------------------------------
// Stationarity residual

struct ResidualTimePoint {
    double t = 0.0;
    double rms = 0.0;
    double max_abs = 0.0;
    std::size_t included = 0;
    double excluded_fraction = 0.0;
};

struct ResidualReport {
    std::vector<ResidualTimePoint> per_time;
    double overall_rms = 0.0;
    double pooled_std_error = 0.0;  // MC error of the mean residual
    double tolerance = 0.0;
    std::size_t included = 0;
    std::size_t excluded = 0;
    bool consistent = false;
    std::string verdict() const { return consistent ? "consistent" : "violated"; }
};

struct ResidualOptions {
    // Explicit tolerance; non-finite means auto: max(1e-2, 5 * pooled se).
    double tolerance = std::numeric_limits<double>::quiet_NaN();
};

// Evaluates the stationarity residual at every (time node, path) with a
// nonzero control, over nodes 0..N-1.  Points with u = 0 are excluded:
// the running utilities have an unbounded marginal at 0+, so the
// one-sided terms are not defined there.  Distortion weights substitute
// the population tie limit w'(0) on constant cross-sections — a constant
// control sits at the top of its own distribution with survival
// probability zero.
inline ResidualReport mp_residual(const PathEnsemble& ens, const AdjointPair& adj,
                                  const ModelSpec& model, const ObjectiveSpec& spec,
                                  const ResidualOptions& opts = {}) {
    const std::size_t n = ens.n_paths;
    const std::size_t steps = ens.grid.steps;
    ResidualReport rep;
    rep.per_time.reserve(steps);

    std::vector<double> args(n), gw(n), lw(n), res(n);
    std::vector<double> node_sum(steps, 0.0), node_sumsq(steps, 0.0);
    std::vector<double> scratch(n);

    for (std::size_t i = 0; i < steps; ++i) {
        const double t = ens.grid.t(i);
        const auto u_row = ens.control.row(i);
        const auto x_row = ens.state.row(i);

        if (spec.running.enabled) {
            for (std::size_t j = 0; j < n; ++j)
                args[j] = running_argument(spec.running.transform, u_row[j], x_row[j]);
            signed_rank_weights(args, spec.pref.weight_gain, spec.pref.weight_loss,
                                /*substitute_const_limit=*/true, gw, lw);
        }

        ResidualTimePoint pt;
        pt.t = t;
        std::size_t m = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const double u = u_row[j];
            if (u == 0.0) continue;
            const double x = x_row[j];
            double r = adj.p.at(i, j) * model.drift_u(t, u, x) +
                       adj.q.at(i, j) * model.vol_u(t, u, x);
            if (spec.smooth.enabled) r += spec.smooth.df_du(t, u, x);
            if (spec.running.enabled) {
                const double chain =
                    spec.running.transform == ControlTransform::raw_control ? 1.0 : x;
                if (args[j] > 0.0)
                    r += spec.pref.running_gain.deriv(args[j]) * chain * gw[j];
                else if (args[j] < 0.0)
                    r += spec.pref.running_loss.deriv(-args[j]) * chain * lw[j];
            }
            res[m++] = r;
        }

        pt.included = m;
        pt.excluded_fraction =
            n == 0 ? 0.0 : static_cast<double>(n - m) / static_cast<double>(n);
        if (m > 0) {
            for (std::size_t k = 0; k < m; ++k) scratch[k] = res[k] * res[k];
            const double sumsq = pairwise_sum(scratch.data(), m);
            node_sumsq[i] = sumsq;
            node_sum[i] = pairwise_sum(res.data(), m);
            pt.rms = std::sqrt(sumsq / static_cast<double>(m));
            double mx = 0.0;
            for (std::size_t k = 0; k < m; ++k) mx = std::max(mx, std::fabs(res[k]));
            pt.max_abs = mx;
        }
        rep.included += m;
        rep.excluded += n - m;
        rep.per_time.push_back(pt);
    }

    const double count = static_cast<double>(rep.included);
    if (rep.included > 0) {
        const double total_sq = pairwise_sum(node_sumsq);
        const double total = pairwise_sum(node_sum);
        rep.overall_rms = std::sqrt(total_sq / count);
        if (rep.included > 1) {
            const double var =
                std::max(0.0, (total_sq - total * total / count) / (count - 1.0));
            rep.pooled_std_error = std::sqrt(var / count);
        }
    }
    rep.tolerance = std::isfinite(opts.tolerance)
                        ? opts.tolerance
                        : std::max(1e-2, 5.0 * rep.pooled_std_error);
    rep.consistent = rep.overall_rms <= rep.tolerance;
    return rep;
}

// ---------------------------------------------------------------------------
// Duality identity

struct DualityResult {
    double lhs = 0.0;  // E[p_T Z_T]
    double rhs = 0.0;  // E ∫ [ v (p b_u + q s_u) - Z g_x ] dt
    double gap = 0.0;
    double gap_std_error = 0.0;  // MC error of the pathwise lhs-rhs difference
    double lhs_std_error = 0.0;
    double rhs_std_error = 0.0;
};

// Integration-by-parts identity connecting the first-variation process to
// the adjoint pair.  The g_x term compensates the extra drift the adjoint
// carries when running rewards depend on the state; for control-only
// running terms it vanishes and the identity reduces to
// E[p_T Z_T] = E ∫ v (p b_u + q s_u) dt.
inline DualityResult duality_check(const PathEnsemble& ens, const AdjointPair& adj,
                                   const ModelSpec& model, const ObjectiveSpec& spec,
                                   const ControlSpec& direction,
                                   unsigned threads = 1) {
    const std::size_t n = ens.n_paths;
    const std::size_t steps = ens.grid.steps;
    const TimeMajor z = simulate_variational(ens, model, direction, threads);

    // The time integral runs over the full horizon [0, T] (all grid
    // nodes): the identity balances against p_T Z_T at the terminal node,
    // so dropping the last interval would leave an O(dt) boundary bias.
    // The integrand is well defined at t = T because the realized control
    // carries its last step value forward.
    const std::vector<double> wq = trapezoid_weights(ens.grid.nodes(),
                                                     ens.grid.dt());
    std::vector<double> rhs_path(n, 0.0), gx(n);
    for (std::size_t i = 0; i < ens.grid.nodes(); ++i) {
        const double t = ens.grid.t(i);
        const auto u_row = ens.control.row(i);
        const auto x_row = ens.state.row(i);
        running_state_gradient(spec, t, u_row, x_row, gx);
        for (std::size_t j = 0; j < n; ++j) {
            const double x = x_row[j];
            const std::size_t dir_node = i < steps ? i : steps - 1;
            const double v = direction.value(dir_node, t, x, j);
            const double hamilton_u = adj.p.at(i, j) * model.drift_u(t, u_row[j], x) +
                                      adj.q.at(i, j) * model.vol_u(t, u_row[j], x);
            rhs_path[j] += wq[i] * (v * hamilton_u - z.at(i, j) * gx[j]);
        }
    }

    std::vector<double> lhs_path(n), diff(n);
    for (std::size_t j = 0; j < n; ++j) {
        lhs_path[j] = adj.p.at(steps, j) * z.at(steps, j);
        diff[j] = lhs_path[j] - rhs_path[j];
    }

    DualityResult out;
    out.lhs = mean(lhs_path);
    out.rhs = mean(rhs_path);
    out.gap = std::fabs(out.lhs - out.rhs);
    out.gap_std_error = std_error_of_mean(diff);
    out.lhs_std_error = std_error_of_mean(lhs_path);
    out.rhs_std_error = std_error_of_mean(rhs_path);
    return out;
}

// ---------------------------------------------------------------------------
// Gateaux (directional) derivative

struct GateauxOptions {
    std::vector<double> eps = {0.1, 0.05, 0.025};
    unsigned threads = 1;
};

struct GateauxResult {
    std::vector<double> eps;
    std::vector<double> fd;          // (J(u + eps v) - J(u)) / eps
    double fd_extrapolated = 0.0;    // Richardson limit from the last two
    double fd_std_error = 0.0;
    double analytic = 0.0;           // first-variation formula on the base ensemble
    double analytic_std_error = 0.0;
    double gap = 0.0;                // |fd_extrapolated - analytic|
    double gap_std_error = 0.0;      // from pathwise differences (common numbers)
};

// Directional derivative of J at the ensemble's realized control, along
// `direction`.  The finite-difference side re-simulates open-loop
// perturbations u + eps v with the same increments (common random
// numbers); the analytic side evaluates the first-variation formula
//
//   E ∫ [ zeta'(k) w'(rank) Dk + f_u v + f_x Z ] dt + E[ p_T-hat Z_T ],
//
// with Dk = v (control argument) or v X + u Z (u*x argument), using the
// same empirical ranks the objective itself produces.
inline GateauxResult gateaux_derivative(const PathEnsemble& ens, const ModelSpec& model,
                                        const ObjectiveSpec& spec,
                                        const ControlSpec& direction, double x0,
                                        const GateauxOptions& opts = {}) {
    const std::size_t n = ens.n_paths;
    const std::size_t steps = ens.grid.steps;
    const std::size_t nodes = ens.grid.nodes();
    if (opts.eps.size() < 2)
        throw ConfigError("gateaux_derivative: need at least two step sizes");

    // Realized control and direction tables (node-major), shared by the
    // re-simulations and the variational recursion.
    std::vector<double> u_table(nodes * n), v_table(nodes * n);
    for (std::size_t i = 0; i < nodes; ++i) {
        const auto u_row = ens.control.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            u_table[i * n + j] = u_row[j];
            const std::size_t node_for_dir = i < steps ? i : steps - 1;
            v_table[i * n + j] =
                direction.value(node_for_dir, ens.grid.t(node_for_dir),
                                ens.state.at(node_for_dir, j), j);
        }
    }

    SimOptions sim_opts;
    sim_opts.threads = opts.threads;
    sim_opts.check_bounds = false;
    sim_opts.store_increments = false;

    const auto run_j = [&](double eps, std::vector<double>& per_path) {
        std::vector<double> table(nodes * n);
        for (std::size_t k = 0; k < nodes * n; ++k)
            table[k] = u_table[k] + eps * v_table[k];
        const auto ctrl = ControlSpec::per_path(std::move(table), nodes, n);
        const PathEnsemble pert =
            simulate_state(model, ens.grid, ctrl, n, x0, ens.seed, sim_opts);
        const ObjectiveValue val = evaluate_objective(pert, spec, &per_path);
        return val.total;
    };

    GateauxResult out;
    out.eps = opts.eps;

    std::vector<double> base_path;
    run_j(0.0, base_path);

    std::vector<std::vector<double>> fd_paths;
    for (double eps : opts.eps) {
        std::vector<double> pert_path;
        const double jp = run_j(eps, pert_path);
        (void)jp;
        std::vector<double> fdp(n);
        for (std::size_t j = 0; j < n; ++j)
            fdp[j] = (pert_path[j] - base_path[j]) / eps;
        out.fd.push_back(mean(fdp));
        fd_paths.push_back(std::move(fdp));
    }

    // Richardson extrapolation from the two smallest step sizes; exact
    // for the eps and eps/2 ladder, general-ratio formula otherwise.
    const std::size_t last = opts.eps.size() - 1;
    const double e1 = opts.eps[last - 1], e2 = opts.eps[last];
    const double w2 = e1 / (e1 - e2);
    std::vector<double> extrap(n);
    for (std::size_t j = 0; j < n; ++j)
        extrap[j] = w2 * fd_paths[last][j] + (1.0 - w2) * fd_paths[last - 1][j];
    out.fd_extrapolated = mean(extrap);
    out.fd_std_error = std_error_of_mean(extrap);

    // Analytic side on the base ensemble.
    const auto v_ctrl = ControlSpec::per_path(v_table, nodes, n);
    const TimeMajor z = simulate_variational(ens, model, v_ctrl, opts.threads);
    const std::vector<double> wq = trapezoid_weights(steps, ens.grid.dt());
    std::vector<double> a_path(n, 0.0), args(n), gw(n), lw(n);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = ens.grid.t(i);
        const auto u_row = ens.control.row(i);
        const auto x_row = ens.state.row(i);
        if (spec.running.enabled) {
            for (std::size_t j = 0; j < n; ++j)
                args[j] = running_argument(spec.running.transform, u_row[j], x_row[j]);
            signed_rank_weights(args, spec.pref.weight_gain, spec.pref.weight_loss,
                                /*substitute_const_limit=*/false, gw, lw);
            for (std::size_t j = 0; j < n; ++j) {
                const double v = v_table[i * n + j];
                const double dk =
                    spec.running.transform == ControlTransform::raw_control
                        ? v
                        : v * x_row[j] + u_row[j] * z.at(i, j);
                if (args[j] > 0.0)
                    a_path[j] += wq[i] * spec.pref.running_gain.deriv(args[j]) *
                                 gw[j] * dk;
                else if (args[j] < 0.0)
                    a_path[j] += wq[i] * spec.pref.running_loss.deriv(-args[j]) *
                                 lw[j] * dk;
            }
        }
        if (spec.smooth.enabled) {
            for (std::size_t j = 0; j < n; ++j) {
                const double v = v_table[i * n + j];
                a_path[j] += wq[i] * (spec.smooth.df_du(t, u_row[j], x_row[j]) * v +
                                      spec.smooth.df_dx(t, u_row[j], x_row[j]) *
                                          z.at(i, j));
            }
        }
    }
    if (spec.terminal_enabled) {
        const std::vector<double> pT = terminal_condition(
            ens.state.row(steps), spec.pref.terminal, spec.pref.weight_terminal);
        for (std::size_t j = 0; j < n; ++j) a_path[j] += pT[j] * z.at(steps, j);
    }
    out.analytic = mean(a_path);
    out.analytic_std_error = std_error_of_mean(a_path);

    std::vector<double> diff(n);
    for (std::size_t j = 0; j < n; ++j) diff[j] = extrap[j] - a_path[j];
    out.gap = std::fabs(out.fd_extrapolated - out.analytic);
    out.gap_std_error = std_error_of_mean(diff);
    return out;
}

} // namespace prospect
