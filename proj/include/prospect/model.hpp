// Controlled scalar diffusion models and control processes.
//
//   dX_t = b(t, u_t, X_t) dt + s(t, u_t, X_t) dW_t,   X_0 = x0 > 0.
//
// Two families cover everything this toolkit simulates:
//   * linear_in_x:  b = (b0 + b1 u) x,  s = (s0 + s1 u) x — all the
//     wealth-equation examples are of this form, and it admits an exact
//     exponential step;
//   * tabulated:    b = b(x), s = s(x) interpolated, control-free.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "prospect/errors.hpp"
#include "prospect/interp.hpp"

namespace prospect {

struct TimeGrid {
    double horizon = 1.0;
    std::size_t steps = 1;

    TimeGrid() = default;
    TimeGrid(double T, std::size_t n) : horizon(T), steps(n) {
        if (!(T > 0.0)) throw ConfigError("TimeGrid: horizon must be positive");
        if (n < 1) throw ConfigError("TimeGrid: need at least one step");
    }

    double dt() const { return horizon / static_cast<double>(steps); }
    double t(std::size_t i) const {
        return horizon * static_cast<double>(i) / static_cast<double>(steps);
    }
    std::size_t nodes() const { return steps + 1; }
};

enum class ModelKind { linear_in_x, tabulated };

class ModelSpec {
public:
    // b = (drift0 + drift_u * u) x,  s = (vol0 + vol_u * u) x.
    static ModelSpec linear_in_x(double drift0, double drift_u, double vol0,
                                 double vol_u) {
        ModelSpec m;
        m.kind_ = ModelKind::linear_in_x;
        m.b0_ = drift0;
        m.b1_ = drift_u;
        m.s0_ = vol0;
        m.s1_ = vol_u;
        return m;
    }

    // Control-free coefficients interpolated in x.  Both tables should
    // vanish at x = 0 if paths are meant to stay nonnegative; that is the
    // caller's responsibility and checked by validate_at.
    static ModelSpec tabulated(MonotoneCubic drift_of_x, MonotoneCubic vol_of_x) {
        ModelSpec m;
        m.kind_ = ModelKind::tabulated;
        m.b_tab_ = std::move(drift_of_x);
        m.s_tab_ = std::move(vol_of_x);
        return m;
    }

    ModelKind kind() const { return kind_; }
    double lin_drift0() const { return b0_; }
    double lin_drift_u() const { return b1_; }
    double lin_vol0() const { return s0_; }
    double lin_vol_u() const { return s1_; }

    double drift(double, double u, double x) const {
        return kind_ == ModelKind::linear_in_x ? (b0_ + b1_ * u) * x
                                               : b_tab_.value(x);
    }
    double vol(double, double u, double x) const {
        return kind_ == ModelKind::linear_in_x ? (s0_ + s1_ * u) * x
                                               : s_tab_.value(x);
    }
    double drift_x(double, double u, double x) const {
        return kind_ == ModelKind::linear_in_x ? (b0_ + b1_ * u)
                                               : b_tab_.deriv(x);
    }
    double drift_u(double, double, double x) const {
        return kind_ == ModelKind::linear_in_x ? b1_ * x : 0.0;
    }
    double vol_x(double, double u, double x) const {
        return kind_ == ModelKind::linear_in_x ? (s0_ + s1_ * u)
                                               : s_tab_.deriv(x);
    }
    double vol_u(double, double, double x) const {
        return kind_ == ModelKind::linear_in_x ? s1_ * x : 0.0;
    }

    // Largest absolute mismatch between the analytic partials above and
    // central finite differences, over a (u, x) probe grid.  Exposed so a
    // test can pin the coefficients to their own derivatives.
    double validate_at(double t, double u, double x, double h = 1e-5) const {
        const auto fd = [](double fp, double fm, double hh) {
            return (fp - fm) / (2.0 * hh);
        };
        double worst = 0.0;
        worst = std::max(worst, std::fabs(fd(drift(t, u, x + h), drift(t, u, x - h), h) -
                                          drift_x(t, u, x)));
        worst = std::max(worst, std::fabs(fd(drift(t, u + h, x), drift(t, u - h, x), h) -
                                          drift_u(t, u, x)));
        worst = std::max(worst, std::fabs(fd(vol(t, u, x + h), vol(t, u, x - h), h) -
                                          vol_x(t, u, x)));
        worst = std::max(worst, std::fabs(fd(vol(t, u + h, x), vol(t, u - h, x), h) -
                                          vol_u(t, u, x)));
        return worst;
    }

private:
    ModelKind kind_ = ModelKind::linear_in_x;
    double b0_ = 0.0, b1_ = 0.0, s0_ = 0.0, s1_ = 0.0;
    MonotoneCubic b_tab_, s_tab_;
};

// ---------------------------------------------------------------------------
// Controls

enum class ControlKind { constant, deterministic, feedback, per_path };

// A control process u_t taking values in a declared admissible interval.
// Controls are step processes, constant on [t_i, t_{i+1}); the value used
// on that interval is the one evaluated at the left endpoint.
class ControlSpec {
public:
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    static ControlSpec constant(double v) {
        ControlSpec c;
        c.kind_ = ControlKind::constant;
        c.const_ = v;
        return c;
    }

    // One value per grid node (steps + 1 entries).
    static ControlSpec deterministic(std::vector<double> values) {
        if (values.size() < 2)
            throw ConfigError("control: deterministic table needs >= 2 nodes");
        ControlSpec c;
        c.kind_ = ControlKind::deterministic;
        c.values_ = std::move(values);
        return c;
    }

    // Markov feedback u = phi(t, x).
    static ControlSpec feedback(std::function<double(double, double)> phi,
                                std::string name = "feedback") {
        ControlSpec c;
        c.kind_ = ControlKind::feedback;
        c.feedback_ = std::move(phi);
        c.name_ = std::move(name);
        return c;
    }

    // Explicit per-path, per-node table (node-major: node * n_paths + path).
    // This is how open-loop perturbations u + eps*v of a realized control
    // are fed back into the simulator.
    static ControlSpec per_path(std::vector<double> table, std::size_t nodes,
                                std::size_t n_paths) {
        if (table.size() != nodes * n_paths)
            throw ConfigError("control: per-path table has wrong size");
        ControlSpec c;
        c.kind_ = ControlKind::per_path;
        c.values_ = std::move(table);
        c.nodes_ = nodes;
        c.n_paths_ = n_paths;
        return c;
    }

    ControlSpec with_bounds(double lo, double hi) const {
        if (!(lo < hi)) throw ConfigError("control: empty admissible interval");
        ControlSpec c = *this;
        c.lower = lo;
        c.upper = hi;
        return c;
    }

    // The control pointwise multiplied by `factor` (bounds are kept).
    ControlSpec scaled(double factor) const {
        ControlSpec c = *this;
        if (c.kind_ == ControlKind::feedback) {
            auto base = c.feedback_;
            c.feedback_ = [base, factor](double t, double x) {
                return factor * base(t, x);
            };
        } else {
            c.const_ *= factor;
            for (double& v : c.values_) v *= factor;
        }
        return c;
    }

    ControlKind kind() const { return kind_; }
    const std::string& name() const { return name_; }

    double value(std::size_t node, double t, double x, std::size_t path) const {
        switch (kind_) {
            case ControlKind::constant:
                return const_;
            case ControlKind::deterministic:
                return values_[std::min(node, values_.size() - 1)];
            case ControlKind::feedback:
                return feedback_(t, x);
            case ControlKind::per_path:
                return values_[std::min(node, nodes_ - 1) * n_paths_ + path];
        }
        return const_;
    }

    bool admissible(double v) const { return v >= lower && v <= upper; }

private:
    ControlKind kind_ = ControlKind::constant;
    double const_ = 0.0;
    std::vector<double> values_;
    std::size_t nodes_ = 0, n_paths_ = 0;
    std::function<double(double, double)> feedback_;
    std::string name_ = "constant";
};

} // namespace prospect
