// Backward (adjoint) pair (p, q) solving
//
//   dp_t = -( b_x p_t + s_x q_t + g_x(t) ) dt + q_t dW_t,
//   p_T  = l'(X_T) w_T'(1 - F_{X_T}(X_T)),
//
// where g_x is an optional extra drift collecting state-derivatives of
// running rewards.  Solvers: least-squares Monte Carlo regression on the
// simulated ensemble, and closed forms for the worked examples.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prospect/empirical.hpp"
#include "prospect/ensemble.hpp"
#include "prospect/errors.hpp"
#include "prospect/model.hpp"
#include "prospect/numerics.hpp"
#include "prospect/preference.hpp"

namespace prospect {

enum class AdjointSource { analytic, lsmc };

struct AdjointPair {
    TimeMajor p;  // rows = nodes
    TimeMajor q;  // rows = nodes; terminal row unused (zero)
    AdjointSource source = AdjointSource::analytic;
};

// Terminal value of the adjoint: marginal utility at the terminal state,
// weighted by the distortion derivative at the empirical survival rank.
// With an all-tied cross-section every path sits at the top midpoint rank
// and receives w'(0.5/n); no population-limit substitution here — this is
// the exact derivative structure of the simulated terminal term.
inline std::vector<double> terminal_condition(std::span<const double> x_terminal,
                                              const UtilityFn& terminal_util,
                                              const DistortionFn& terminal_weight) {
    if (x_terminal.size() < 2)
        throw DataError("terminal_condition: need at least two paths");
    EmpiricalCdf cdf(x_terminal);
    std::vector<double> out(x_terminal.size());
    for (std::size_t j = 0; j < x_terminal.size(); ++j)
        out[j] = terminal_util.deriv(x_terminal[j]) *
                 terminal_weight.deriv(1.0 - cdf(x_terminal[j]));
    return out;
}

// ---------------------------------------------------------------------------
// Polynomial least squares on a scalar regressor

// Least-squares polynomial in the z-scored logarithm of a positive
// regressor.  The z-scoring makes the fit invariant under affine
// rescaling of log-x and keeps the normal equations well conditioned for
// the low degrees used here.
class LogPolynomialFit {
public:
    // Throws NumericalError when the design is rank-deficient (duplicate
    // support too thin for the requested degree) or has zero variance.
    LogPolynomialFit(std::span<const double> xs, std::span<const double> ys,
                     std::size_t degree)
        : degree_(degree) {
        const std::size_t n = xs.size();
        const std::size_t m = degree + 1;
        if (n < m) throw NumericalError("polynomial fit: fewer points than coefficients");
        std::vector<double> zs(n);
        for (std::size_t j = 0; j < n; ++j) {
            if (!(xs[j] > 0.0))
                throw DomainError("polynomial fit: regressor must be positive");
            zs[j] = std::log(xs[j]);
        }
        mean_ = prospect::mean(zs);
        sd_ = sample_std(zs);
        if (sd_ == 0.0)
            throw NumericalError("polynomial fit: regressor has zero variance");
        for (double& z : zs) z = (z - mean_) / sd_;

        // Normal equations, accumulated with fixed-order pairwise sums so
        // the fit is bit-reproducible.
        std::vector<double> gram(m * m, 0.0), rhs(m, 0.0), scratch(n);
        std::vector<double> powers(n * m);
        for (std::size_t j = 0; j < n; ++j) {
            double zp = 1.0;
            for (std::size_t k = 0; k < m; ++k) {
                powers[k * n + j] = zp;
                zp *= zs[j];
            }
        }
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a; b < m; ++b) {
                for (std::size_t j = 0; j < n; ++j)
                    scratch[j] = powers[a * n + j] * powers[b * n + j];
                gram[a * m + b] = gram[b * m + a] = pairwise_sum(scratch);
            }
            for (std::size_t j = 0; j < n; ++j)
                scratch[j] = powers[a * n + j] * ys[j];
            rhs[a] = pairwise_sum(scratch);
        }
        coeffs_ = solve_spd(gram, rhs, m);
    }

    double operator()(double x) const {
        const double z = (std::log(x) - mean_) / sd_;
        double acc = 0.0;
        for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * z + coeffs_[k];
        return acc;
    }

private:
    std::size_t degree_;
    double mean_ = 0.0, sd_ = 1.0;
    std::vector<double> coeffs_;

    // Gaussian elimination with partial pivoting; the pivot-ratio serves
    // as a cheap condition estimate for the error message.
    static std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b,
                                         std::size_t m) {
        double max_pivot = 0.0, min_pivot = std::numeric_limits<double>::infinity();
        for (std::size_t col = 0; col < m; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < m; ++r)
                if (std::fabs(a[r * m + col]) > std::fabs(a[piv * m + col])) piv = r;
            if (piv != col) {
                for (std::size_t c = 0; c < m; ++c)
                    std::swap(a[col * m + c], a[piv * m + c]);
                std::swap(b[col], b[piv]);
            }
            const double pivot = std::fabs(a[col * m + col]);
            max_pivot = std::max(max_pivot, pivot);
            min_pivot = std::min(min_pivot, pivot);
            if (pivot == 0.0 || max_pivot / pivot > 1e12)
                throw NumericalError(
                    "polynomial fit: rank-deficient normal equations "
                    "(condition estimate " +
                    std::to_string(pivot == 0.0 ? std::numeric_limits<double>::infinity()
                                                : max_pivot / min_pivot) +
                    ")");
            for (std::size_t r = col + 1; r < m; ++r) {
                const double f = a[r * m + col] / a[col * m + col];
                for (std::size_t c = col; c < m; ++c) a[r * m + c] -= f * a[col * m + c];
                b[r] -= f * b[col];
            }
        }
        std::vector<double> x(m, 0.0);
        for (std::size_t r = m; r-- > 0;) {
            double acc = b[r];
            for (std::size_t c = r + 1; c < m; ++c) acc -= a[r * m + c] * x[c];
            x[r] = acc / a[r * m + r];
        }
        return x;
    }
};

// ---------------------------------------------------------------------------
// Least-squares Monte Carlo backward solver

struct LsmcOptions {
    std::size_t basis_degree = 3;
    // Optional extra drift g_x added inside the conditional expectation —
    // state-derivatives of running terms.  Called once per time node with
    // the node index, time, control row and state row; fills the output
    // span with one value per path.  Rank-dependent terms need the whole
    // cross-section, hence the batch signature.
    std::function<void(std::size_t, double, std::span<const double>,
                       std::span<const double>, std::span<double>)>
        extra_drift;
};

// Regression-based backward recursion:
//   q_i = E[ p_{i+1} dW_i / dt | X_i ],
//   p_i = E[ p_{i+1} + (b_x p_{i+1} + s_x q_i + g_x) dt | X_i ],
// with conditional expectations replaced by polynomial projections on
// the time-i cross-section.  A bitwise-constant cross-section (e.g. the
// initial node) projects onto its plain mean, which is the exact
// conditional expectation there.
inline AdjointPair solve_adjoint_lsmc(const PathEnsemble& ens, const ModelSpec& model,
                                      std::span<const double> terminal_p,
                                      const LsmcOptions& opts = {}) {
    const std::size_t n = ens.n_paths;
    const std::size_t steps = ens.grid.steps;
    if (terminal_p.size() != n)
        throw DataError("solve_adjoint_lsmc: terminal vector size mismatch");
    if (ens.increments.empty())
        throw DataError("solve_adjoint_lsmc: ensemble has no stored increments");
    if (n < 10 * (opts.basis_degree + 1))
        throw ConfigError("solve_adjoint_lsmc: need n_paths >= 10 * (degree + 1)");

    AdjointPair adj;
    adj.source = AdjointSource::lsmc;
    adj.p = TimeMajor(ens.grid.nodes(), n);
    adj.q = TimeMajor(ens.grid.nodes(), n);
    for (std::size_t j = 0; j < n; ++j) adj.p.at(steps, j) = terminal_p[j];

    const double dt = ens.grid.dt();
    std::vector<double> y(n), fitted(n), gx(n, 0.0);

    const auto project = [&](std::span<const double> x_row,
                             std::span<const double> targets,
                             std::span<double> out) {
        bool constant = true;
        for (std::size_t j = 1; j < n && constant; ++j)
            constant = x_row[j] == x_row[0];
        if (constant) {
            const double m = pairwise_sum(targets) / static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) out[j] = m;
            return;
        }
        LogPolynomialFit fit(x_row, targets, opts.basis_degree);
        for (std::size_t j = 0; j < n; ++j) out[j] = fit(x_row[j]);
    };

    for (std::size_t i = steps; i-- > 0;) {
        const double t = ens.grid.t(i);
        const auto x_row = ens.state.row(i);
        const auto u_row = ens.control.row(i);
        const auto p_next = adj.p.row(i + 1);

        for (std::size_t j = 0; j < n; ++j)
            y[j] = p_next[j] * ens.increments.at(i, j) / dt;
        project(x_row, y, fitted);
        for (std::size_t j = 0; j < n; ++j) adj.q.at(i, j) = fitted[j];

        if (opts.extra_drift) opts.extra_drift(i, t, u_row, x_row, gx);
        for (std::size_t j = 0; j < n; ++j) {
            y[j] = p_next[j] +
                   (model.drift_x(t, u_row[j], x_row[j]) * p_next[j] +
                    model.vol_x(t, u_row[j], x_row[j]) * adj.q.at(i, j) + gx[j]) *
                       dt;
        }
        project(x_row, y, fitted);
        for (std::size_t j = 0; j < n; ++j) adj.p.at(i, j) = fitted[j];
    }
    return adj;
}

// ---------------------------------------------------------------------------
// Closed-form adjoints for the worked examples

// p_t = lambda * rho_t, q_t = -lambda * theta * rho_t (requires the
// pricing kernel to be attached to the ensemble).
inline AdjointPair adjoint_kernel_proportional(const PathEnsemble& ens, double lambda,
                                               double theta) {
    if (!ens.has_kernel())
        throw DataError("adjoint_kernel_proportional: ensemble has no pricing kernel");
    AdjointPair adj;
    adj.source = AdjointSource::analytic;
    adj.p = TimeMajor(ens.grid.nodes(), ens.n_paths);
    adj.q = TimeMajor(ens.grid.nodes(), ens.n_paths);
    for (std::size_t i = 0; i < ens.grid.nodes(); ++i)
        for (std::size_t j = 0; j < ens.n_paths; ++j) {
            const double rho = ens.kernel.at(i, j);
            adj.p.at(i, j) = lambda * rho;
            adj.q.at(i, j) = -lambda * theta * rho;
        }
    return adj;
}

inline AdjointPair adjoint_zero(const PathEnsemble& ens) {
    AdjointPair adj;
    adj.source = AdjointSource::analytic;
    adj.p = TimeMajor(ens.grid.nodes(), ens.n_paths);
    adj.q = TimeMajor(ens.grid.nodes(), ens.n_paths);
    return adj;
}

// p_t = T - t deterministically, q = 0.
inline AdjointPair adjoint_time_to_horizon(const PathEnsemble& ens) {
    AdjointPair adj;
    adj.source = AdjointSource::analytic;
    adj.p = TimeMajor(ens.grid.nodes(), ens.n_paths);
    adj.q = TimeMajor(ens.grid.nodes(), ens.n_paths);
    for (std::size_t i = 0; i < ens.grid.nodes(); ++i) {
        const double val = ens.grid.horizon - ens.grid.t(i);
        for (std::size_t j = 0; j < ens.n_paths; ++j) adj.p.at(i, j) = val;
    }
    return adj;
}

} // namespace prospect
