// Evaluation of the distorted control objective
//
//   J(u) = E ∫_0^T [ zeta_+(k_t^+) w_+'(1 - F_{k+}(k_t^+))
//                  - zeta_-(k_t^-) w_-'(1 - F_{k-}(k_t^-)) ] dt
//        + E ∫_0^T f(t, u_t, X_t) dt                      (optional smooth term)
//        + E [ l(X_T) w_T'(1 - F_{X_T}(X_T)) ],           (optional terminal)
//
// where k_t is either the control itself or the consumption-style product
// u_t X_t, and the distributions are replaced by per-time cross-sectional
// empirical CDFs over the ensemble (midpoint ranks).  Running integrals
// use trapezoidal quadrature over nodes 0..N-1; the terminal node carries
// only the terminal term.
#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "prospect/choquet.hpp"
#include "prospect/empirical.hpp"
#include "prospect/ensemble.hpp"
#include "prospect/errors.hpp"
#include "prospect/numerics.hpp"
#include "prospect/preference.hpp"

namespace prospect {

enum class ControlTransform { raw_control, control_times_state };

struct RunningTermSpec {
    bool enabled = false;
    ControlTransform transform = ControlTransform::raw_control;
};

// Additional undistorted running reward f(t,u,x), entering the objective
// as a plain expectation.  Partial derivatives are carried alongside
// because the optimality checker and the variational calculus need them.
struct SmoothRunningTerm {
    bool enabled = false;
    std::function<double(double, double, double)> f;      // f(t,u,x)
    std::function<double(double, double, double)> df_du;  // ∂f/∂u
    std::function<double(double, double, double)> df_dx;  // ∂f/∂x
    std::string name = "none";

    static SmoothRunningTerm none() { return {}; }

    // f(t,u,x) = x — the canonical "state enters the running reward" case.
    static SmoothRunningTerm state_level() {
        SmoothRunningTerm s;
        s.enabled = true;
        s.f = [](double, double, double x) { return x; };
        s.df_du = [](double, double, double) { return 0.0; };
        s.df_dx = [](double, double, double) { return 1.0; };
        s.name = "state_level";
        return s;
    }
};

struct ObjectiveSpec {
    PreferenceSpec pref;
    RunningTermSpec running;
    SmoothRunningTerm smooth;
    bool terminal_enabled = true;
};

struct ObjectiveValue {
    double running_gain = 0.0;
    double running_loss = 0.0;
    double smooth_running = 0.0;
    double terminal = 0.0;
    double total = 0.0;      // gain - loss + smooth + terminal
    double std_error = 0.0;  // Monte Carlo error of total, from per-path sums
    std::size_t n_paths = 0;
};

// ---------------------------------------------------------------------------
// Cross-sectional distortion weights

// Fills gain_w / loss_w with the distortion derivative evaluated at the
// empirical survival rank of each entry's positive (resp. negative) part;
// entries on the other side get weight 0.  If substitute_const_limit is
// set and a side's nonzero subsample is a single repeated value, the
// population weight w'(0) is used for that side instead of the midpoint
// tie rank: the population survival probability of "at or above the
// maximum" is zero, and the optimality checker works with that limit.
inline void signed_rank_weights(std::span<const double> args,
                                const DistortionFn& w_gain,
                                const DistortionFn& w_loss,
                                bool substitute_const_limit,
                                std::span<double> gain_w,
                                std::span<double> loss_w) {
    const std::size_t n = args.size();
    std::vector<double> pos, neg;
    pos.reserve(n);
    neg.reserve(n);
    for (double a : args) {
        if (a > 0.0) pos.push_back(a);
        else if (a < 0.0) neg.push_back(-a);
    }

    const auto side_weight = [&](const std::vector<double>& sub,
                                 const DistortionFn& w) {
        // Returns an evaluator for the side; empty optional-like via size.
        struct Eval {
            bool constant = false;
            double const_weight = 0.0;
            const DistortionFn* dist = nullptr;
            std::vector<double> sorted;
            double weight(double v) const {
                if (constant) return const_weight;
                // Inline midpoint-rank ECDF on the sorted subsample.
                const auto up = std::upper_bound(sorted.begin(), sorted.end(), v);
                const double count = static_cast<double>(up - sorted.begin());
                const double nn = static_cast<double>(sorted.size());
                const double rank = count > 0.0 ? (count - 0.5) / nn : 0.0;
                return dist->deriv(1.0 - rank);
            }
        };
        Eval e;
        e.dist = &w;
        if (sub.empty()) return e;
        e.sorted = sub;
        std::sort(e.sorted.begin(), e.sorted.end());
        if (substitute_const_limit && e.sorted.front() == e.sorted.back()) {
            e.constant = true;
            e.const_weight = w.deriv(0.0);
        } else if (e.sorted.size() == 1) {
            e.constant = true;
            e.const_weight = w.deriv(0.5);
        }
        return e;
    };

    const auto gain_eval = side_weight(pos, w_gain);
    const auto loss_eval = side_weight(neg, w_loss);
    for (std::size_t j = 0; j < n; ++j) {
        gain_w[j] = args[j] > 0.0 ? gain_eval.weight(args[j]) : 0.0;
        loss_w[j] = args[j] < 0.0 ? loss_eval.weight(-args[j]) : 0.0;
    }
}

// Running-term argument at one (node, path): the control or u*x.
inline double running_argument(ControlTransform tf, double u, double x) {
    return tf == ControlTransform::raw_control ? u : u * x;
}

// ---------------------------------------------------------------------------
// Objective evaluation

// Evaluates J on a simulated ensemble.  If per_path_out is given it
// receives each path's contribution to the total (running quadrature plus
// terminal term), whose mean equals `total` up to roundoff — these are
// the common-random-number workhorse for standard errors of differences.
inline ObjectiveValue evaluate_objective(const PathEnsemble& ens,
                                         const ObjectiveSpec& spec,
                                         std::vector<double>* per_path_out = nullptr) {
    const std::size_t n = ens.n_paths;
    const std::size_t steps = ens.grid.steps;
    if (n < 2) throw DataError("evaluate_objective: need at least two paths");

    ObjectiveValue out;
    out.n_paths = n;
    std::vector<double> per_path(n, 0.0);

    const std::vector<double> wq = trapezoid_weights(steps, ens.grid.dt());
    std::vector<double> node_gain(steps, 0.0), node_loss(steps, 0.0),
        node_smooth(steps, 0.0);
    std::vector<double> args(n), gain_w(n), loss_w(n), scratch(n);

    for (std::size_t i = 0; i < steps; ++i) {
        const double t = ens.grid.t(i);
        const auto u_row = ens.control.row(i);
        const auto x_row = ens.state.row(i);

        if (spec.running.enabled) {
            for (std::size_t j = 0; j < n; ++j)
                args[j] = running_argument(spec.running.transform, u_row[j], x_row[j]);
            signed_rank_weights(args, spec.pref.weight_gain, spec.pref.weight_loss,
                                /*substitute_const_limit=*/false, gain_w, loss_w);
            for (std::size_t j = 0; j < n; ++j)
                scratch[j] = args[j] > 0.0
                                 ? spec.pref.running_gain.value(args[j]) * gain_w[j]
                                 : 0.0;
            node_gain[i] = pairwise_sum(scratch) / static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j)
                per_path[j] += wq[i] * scratch[j];
            for (std::size_t j = 0; j < n; ++j)
                scratch[j] = args[j] < 0.0
                                 ? spec.pref.running_loss.value(-args[j]) * loss_w[j]
                                 : 0.0;
            node_loss[i] = pairwise_sum(scratch) / static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j)
                per_path[j] -= wq[i] * scratch[j];
        }

        if (spec.smooth.enabled) {
            for (std::size_t j = 0; j < n; ++j)
                scratch[j] = spec.smooth.f(t, u_row[j], x_row[j]);
            node_smooth[i] = pairwise_sum(scratch) / static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j)
                per_path[j] += wq[i] * scratch[j];
        }
    }

    for (std::size_t i = 0; i < steps; ++i) {
        node_gain[i] *= wq[i];
        node_loss[i] *= wq[i];
        node_smooth[i] *= wq[i];
    }
    out.running_gain = pairwise_sum(node_gain);
    out.running_loss = pairwise_sum(node_loss);
    out.smooth_running = pairwise_sum(node_smooth);

    if (spec.terminal_enabled) {
        std::vector<double> terms;
        const auto est = choquet_plugin(ens.state.row(steps), spec.pref.terminal,
                                        spec.pref.weight_terminal, &terms);
        out.terminal = est.value;
        for (std::size_t j = 0; j < n; ++j) per_path[j] += terms[j];
    }

    out.total = out.running_gain - out.running_loss + out.smooth_running + out.terminal;
    out.std_error = std_error_of_mean(per_path);
    if (per_path_out) *per_path_out = std::move(per_path);
    return out;
}

} // namespace prospect
