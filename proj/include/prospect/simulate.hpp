// Forward simulation: controlled state paths, the pricing kernel, and the
// first-variation process of the state with respect to a control direction.
//
// Linear-in-x models use the exact exponential step
//   X_{i+1} = X_i * exp[(beta - s^2/2) dt + s dW],  beta = b0 + b1 u,
// so positivity is structural and the only discretisation error is the
// step-function approximation of the control.  Tabulated models fall back
// to Euler–Maruyama with a positivity floor.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "prospect/ensemble.hpp"
#include "prospect/errors.hpp"
#include "prospect/model.hpp"
#include "prospect/numerics.hpp"
#include "prospect/rng.hpp"

namespace prospect {

inline constexpr double kPositivityFloor = 1e-12;

struct SimOptions {
    unsigned threads = 1;
    bool check_bounds = true;
    // Perturbed re-simulations that only feed the objective can skip the
    // increment matrix to cut peak memory.
    bool store_increments = true;
};

// Simulates n_paths trajectories of the controlled state.  Each path p
// draws its increments from stream p of `seed`, one normal per step, so
// the ensemble is reproducible for any thread partition.
inline PathEnsemble simulate_state(const ModelSpec& model, const TimeGrid& grid,
                                   const ControlSpec& control, std::size_t n_paths,
                                   double x0, std::uint64_t seed,
                                   const SimOptions& opts = {}) {
    if (n_paths == 0) throw ConfigError("simulate_state: n_paths must be positive");
    if (!(x0 > 0.0)) throw ConfigError("simulate_state: x0 must be positive");

    PathEnsemble ens;
    ens.grid = grid;
    ens.n_paths = n_paths;
    ens.seed = seed;
    if (opts.store_increments) ens.increments = TimeMajor(grid.steps, n_paths);
    ens.state = TimeMajor(grid.nodes(), n_paths);
    ens.control = TimeMajor(grid.nodes(), n_paths);

    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);
    std::vector<std::size_t> floor_hits_per_path(n_paths, 0);

    parallel_for(n_paths, opts.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            const std::uint64_t key =
                rng_stream_key(seed, rng_streams::kStatePaths + p);
            double x = x0;
            ens.state.at(0, p) = x;
            for (std::size_t i = 0; i < grid.steps; ++i) {
                const double t = grid.t(i);
                const double u = control.value(i, t, x, p);
                if (opts.check_bounds && !control.admissible(u))
                    throw DomainError("simulate_state: control value " +
                                      std::to_string(u) +
                                      " outside the admissible interval");
                ens.control.at(i, p) = u;
                const double dw = sqdt * rng_normal(key, i);
                if (opts.store_increments) ens.increments.at(i, p) = dw;
                if (model.kind() == ModelKind::linear_in_x) {
                    const double beta = model.drift_x(t, u, x);  // (b0 + b1 u)
                    const double s = model.vol_x(t, u, x);       // (s0 + s1 u)
                    x *= std::exp((beta - 0.5 * s * s) * dt + s * dw);
                } else {
                    x += model.drift(t, u, x) * dt + model.vol(t, u, x) * dw;
                    if (x < kPositivityFloor) {
                        x = kPositivityFloor;
                        ++floor_hits_per_path[p];
                    }
                }
                ens.state.at(i + 1, p) = x;
            }
            // Controls are left-continuous step processes; the terminal node
            // stores the last interval's value (a deterministic table may
            // pin its own terminal entry instead).
            const double u_last =
                control.kind() == ControlKind::deterministic ||
                        control.kind() == ControlKind::per_path
                    ? control.value(grid.steps, grid.horizon, x, p)
                    : ens.control.at(grid.steps - 1, p);
            ens.control.at(grid.steps, p) = u_last;
        }
    });

    for (std::size_t p = 0; p < n_paths; ++p) ens.floor_hits += floor_hits_per_path[p];
    return ens;
}

// State-price density / pricing kernel for a log-normal market:
//   rho_{i+1} = rho_i * exp[-(r + theta^2/2) dt - theta dW_i],
// driven by the same increments as the state ensemble (common random
// numbers by construction).  Stored into ens.kernel.
inline void simulate_pricing_kernel(PathEnsemble& ens, double r, double theta,
                                    unsigned threads = 1) {
    ens.kernel = TimeMajor(ens.grid.nodes(), ens.n_paths);
    const double dt = ens.grid.dt();
    parallel_for(ens.n_paths, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            double rho = 1.0;
            ens.kernel.at(0, p) = rho;
            for (std::size_t i = 0; i < ens.grid.steps; ++i) {
                rho *= std::exp(-(r + 0.5 * theta * theta) * dt -
                                theta * ens.increments.at(i, p));
                ens.kernel.at(i + 1, p) = rho;
            }
        }
    });
}

// First-variation process Z of the state along a control direction v:
//   dZ = (b_x Z + b_u v) dt + (s_x Z + s_u v) dW,  Z_0 = 0.
//
// For linear-in-x models the recursion differentiates the exponential
// scheme itself (write X_{i+1} = X_i G_i and differentiate through G_i),
//   Z_{i+1} = Z_i G_i + X_i G_i v_i [(b1 - s s1) dt + s1 dW_i],
// so finite-difference ratios of simulated paths converge to Z at the
// scheme level, not merely in the continuous-time limit.  Direction
// values are evaluated on the base ensemble (node, t, X, path).
inline TimeMajor simulate_variational(const PathEnsemble& ens, const ModelSpec& model,
                                      const ControlSpec& direction,
                                      unsigned threads = 1) {
    TimeMajor z(ens.grid.nodes(), ens.n_paths);
    const double dt = ens.grid.dt();
    parallel_for(ens.n_paths, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            double zval = 0.0;
            z.at(0, p) = zval;
            for (std::size_t i = 0; i < ens.grid.steps; ++i) {
                const double t = ens.grid.t(i);
                const double x = ens.state.at(i, p);
                const double u = ens.control.at(i, p);
                const double dw = ens.increments.at(i, p);
                const double v = direction.value(i, t, x, p);
                if (model.kind() == ModelKind::linear_in_x) {
                    const double beta = model.drift_x(t, u, x);
                    const double s = model.vol_x(t, u, x);
                    const double g = std::exp((beta - 0.5 * s * s) * dt + s * dw);
                    const double b1 = model.lin_drift_u();
                    const double s1 = model.lin_vol_u();
                    zval = zval * g +
                           x * g * v * ((b1 - s * s1) * dt + s1 * dw);
                } else {
                    zval += (model.drift_x(t, u, x) * zval +
                             model.drift_u(t, u, x) * v) * dt +
                            (model.vol_x(t, u, x) * zval +
                             model.vol_u(t, u, x) * v) * dw;
                }
                z.at(i + 1, p) = zval;
            }
        }
    });
    return z;
}

} // namespace prospect
