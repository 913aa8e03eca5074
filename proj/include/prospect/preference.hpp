// Utility functions and probability distortions.
//
// A preference bundle holds three utilities (running gains, running
// losses, terminal) and three distortions.  Utilities are concave and
// vanish at zero; distortions map [0,1] onto [0,1] increasingly.  Both
// come in closed-form and tabulated (shape-preserving cubic) flavours.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "prospect/errors.hpp"
#include "prospect/interp.hpp"

namespace prospect {

// Below this wealth level marginal utilities of power type overflow;
// derivative queries are rejected rather than silently returning inf.
inline constexpr double kUtilityDerivFloor = 1e-300;

// ---------------------------------------------------------------------------
// Utilities

enum class UtilityKind { power, tabulated };

class UtilityFn {
public:
    // u(x) = x^gamma / gamma with gamma in (0,1).
    static UtilityFn power(double gamma) {
        if (!(gamma > 0.0 && gamma < 1.0))
            throw ConfigError("utility: power exponent must lie in (0,1), got " +
                              std::to_string(gamma));
        UtilityFn f;
        f.kind_ = UtilityKind::power;
        f.gamma_ = gamma;
        return f;
    }

    // Interpolated utility on [x_0, x_k]; continues linearly beyond the
    // last knot.  Knots must start at x = 0 so that u(0) is defined.
    static UtilityFn tabulated(std::vector<double> xs, std::vector<double> ys) {
        if (xs.empty() || xs.front() != 0.0)
            throw ConfigError("utility: tabulated knots must start at x = 0");
        UtilityFn f;
        f.kind_ = UtilityKind::tabulated;
        f.table_ = MonotoneCubic(std::move(xs), std::move(ys));
        return f;
    }

    // The identically-zero utility (used to switch a term off).
    static UtilityFn zero() { return tabulated({0.0, 1.0}, {0.0, 0.0}); }

    UtilityKind kind() const { return kind_; }
    double power_exponent() const { return gamma_; }

    double value(double x) const {
        if (!(x >= 0.0))
            throw DomainError("utility: value requires x >= 0");
        switch (kind_) {
            case UtilityKind::power:
                return std::pow(x, gamma_) / gamma_;
            default:
                return table_.value(x);
        }
    }

    // First or second derivative.  Rejected for x below the derivative
    // floor: power-type marginal utility is unbounded at the origin and
    // the caller must decide how to handle that limit explicitly.
    double deriv(double x, int order = 1) const {
        if (order != 1 && order != 2)
            throw DomainError("utility: derivative order must be 1 or 2");
        if (!(x >= kUtilityDerivFloor))
            throw DomainError("utility: derivative requires x >= 1e-300");
        switch (kind_) {
            case UtilityKind::power:
                if (order == 1) return std::pow(x, gamma_ - 1.0);
                return (gamma_ - 1.0) * std::pow(x, gamma_ - 2.0);
            default:
                return order == 1 ? table_.deriv(x) : table_.deriv2(x);
        }
    }

    // Inverse of the first derivative.  The utilities handled here are
    // strictly concave, so u' is strictly decreasing and the inverse is
    // well defined on its range.
    double deriv_inverse(double y) const {
        switch (kind_) {
            case UtilityKind::power: {
                if (!(y > 0.0))
                    throw DomainError("utility: inverse marginal requires y > 0");
                return std::pow(y, 1.0 / (gamma_ - 1.0));
            }
            default: {
                double lo = std::max(kUtilityDerivFloor, table_.x_min());
                double hi = table_.x_max();
                double flo = table_.deriv(lo), fhi = table_.deriv(hi);
                if (!(flo > fhi))
                    throw NumericalError("utility: tabulated marginal is not decreasing");
                if (y > flo || y < fhi)
                    throw DomainError("utility: inverse marginal argument outside range");
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (table_.deriv(mid) >= y) lo = mid; else hi = mid;
                    if (hi - lo <= 1e-14 * std::max(1.0, hi)) break;
                }
                return 0.5 * (lo + hi);
            }
        }
    }

private:
    UtilityKind kind_ = UtilityKind::power;
    double gamma_ = 0.5;
    MonotoneCubic table_;
};

// ---------------------------------------------------------------------------
// Distortions

enum class DistortionKind { identity, inverse_s, tabulated };

class DistortionFn {
public:
    static DistortionFn identity() {
        DistortionFn d;
        d.kind_ = DistortionKind::identity;
        return d;
    }

    // Two-parameter-family inverse-S weighting
    //   w(p) = nu * p^(a+1) + (1 - nu) * (1 - (1-p)^(b+1)),
    // convex near 0 for nu ~ 1, concave near 0 for nu ~ 0.  nu in [0,1],
    // a >= 0, b >= 0.
    static DistortionFn inverse_s(double nu, double a, double b) {
        if (!(nu >= 0.0 && nu <= 1.0))
            throw ConfigError("distortion: mixing weight must lie in [0,1]");
        if (!(a >= 0.0) || !(b >= 0.0))
            throw ConfigError("distortion: curvature exponents must be >= 0");
        DistortionFn d;
        d.kind_ = DistortionKind::inverse_s;
        d.nu_ = nu;
        d.a_ = a;
        d.b_ = b;
        return d;
    }

    // Interpolated distortion with knots spanning [0,1].
    static DistortionFn tabulated(std::vector<double> ps, std::vector<double> ws) {
        if (ps.empty() || ps.front() != 0.0 || ps.back() != 1.0)
            throw ConfigError("distortion: tabulated knots must span [0,1]");
        DistortionFn d;
        d.kind_ = DistortionKind::tabulated;
        d.table_ = MonotoneCubic(std::move(ps), std::move(ws));
        return d;
    }

    DistortionKind kind() const { return kind_; }
    double nu() const { return nu_; }
    double a() const { return a_; }
    double b() const { return b_; }

    double value(double p) const {
        check_prob(p);
        switch (kind_) {
            case DistortionKind::identity:
                return p;
            case DistortionKind::inverse_s:
                return nu_ * std::pow(p, a_ + 1.0) +
                       (1.0 - nu_) * (1.0 - std::pow(1.0 - p, b_ + 1.0));
            default:
                return table_.value(p);
        }
    }

    // w'(p).  With pow(0,0) == 1, the closed form covers the boundary
    // values; in particular w'(0) = (1-nu)(b+1) when a > 0, which is the
    // weight attached to the top outcome of a distorted expectation.
    double deriv(double p) const {
        check_prob(p);
        switch (kind_) {
            case DistortionKind::identity:
                return 1.0;
            case DistortionKind::inverse_s:
                return nu_ * (a_ + 1.0) * std::pow(p, a_) +
                       (1.0 - nu_) * (b_ + 1.0) * std::pow(1.0 - p, b_);
            default:
                return table_.deriv(p);
        }
    }

private:
    static void check_prob(double p) {
        if (!(p >= 0.0 && p <= 1.0))
            throw DomainError("distortion: probability outside [0,1]");
    }

    DistortionKind kind_ = DistortionKind::identity;
    double nu_ = 0.0, a_ = 0.0, b_ = 0.0;
    MonotoneCubic table_;
};

// ---------------------------------------------------------------------------
// Preference bundle and validation

struct PreferenceSpec {
    UtilityFn running_gain = UtilityFn::power(0.5);
    UtilityFn running_loss = UtilityFn::power(0.5);
    UtilityFn terminal = UtilityFn::power(0.5);
    DistortionFn weight_gain = DistortionFn::identity();
    DistortionFn weight_loss = DistortionFn::identity();
    DistortionFn weight_terminal = DistortionFn::identity();
};

struct ValidationFinding {
    std::string component;  // e.g. "terminal_utility"
    std::string property;   // e.g. "monotone"
    double location = 0.0;  // grid point where the defect was seen
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationFinding> violations;  // hard shape defects
    std::vector<ValidationFinding> warnings;    // soft (e.g. bounded slope at 0)
    bool ok() const { return violations.empty(); }
};

namespace detail {

inline void validate_utility(const UtilityFn& u, const std::string& name,
                             double x_max, std::size_t grid_n,
                             ValidationReport& rep) {
    if (std::fabs(u.value(0.0)) > 1e-12)
        rep.violations.push_back({name, "vanishes_at_zero", 0.0,
                                  "u(0) = " + std::to_string(u.value(0.0))});
    double prev = u.value(0.0);
    double prev_slope = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= grid_n; ++i) {
        const double x = x_max * static_cast<double>(i) / static_cast<double>(grid_n);
        const double v = u.value(x);
        if (!(v > prev))
            rep.violations.push_back({name, "strictly_monotone", x,
                                      "value failed to increase"});
        const double xp = x_max * static_cast<double>(i - 1) / static_cast<double>(grid_n);
        const double slope = (v - prev) / (x - xp);
        if (slope > prev_slope * (1.0 + 1e-9) + 1e-12)
            rep.violations.push_back({name, "concave", x, "secant slope increased"});
        prev = v;
        prev_slope = slope;
    }
    // Unbounded marginal utility at the origin holds automatically for the
    // power family; a tabulated utility always has a finite slope, which is
    // worth flagging but does not invalidate it.
    if (u.kind() == UtilityKind::tabulated) {
        const double x0 = x_max / static_cast<double>(grid_n) * 1e-3;
        double slope0 = 0.0;
        try {
            slope0 = u.deriv(std::max(x0, kUtilityDerivFloor));
        } catch (const DomainError&) {
            slope0 = 0.0;
        }
        if (slope0 < 1e6)
            rep.warnings.push_back({name, "unbounded_slope_at_zero", 0.0,
                                    "marginal utility near 0 is bounded (" +
                                        std::to_string(slope0) + ")"});
    }
}

inline void validate_distortion(const DistortionFn& w, const std::string& name,
                                std::size_t grid_n, ValidationReport& rep) {
    if (std::fabs(w.value(0.0)) > 1e-12)
        rep.violations.push_back({name, "fixes_zero", 0.0, "w(0) != 0"});
    if (std::fabs(w.value(1.0) - 1.0) > 1e-12)
        rep.violations.push_back({name, "fixes_one", 1.0, "w(1) != 1"});
    double prev = w.value(0.0);
    for (std::size_t i = 1; i <= grid_n; ++i) {
        const double p = static_cast<double>(i) / static_cast<double>(grid_n);
        const double v = w.value(p);
        if (!(v >= prev))
            rep.violations.push_back({name, "monotone", p, "value decreased"});
        if (w.deriv(p) < 0.0)
            rep.violations.push_back({name, "nonnegative_slope", p, "w' < 0"});
        prev = v;
    }
}

} // namespace detail

// Checks shape properties of every component on a uniform grid and
// reports what fails.  Nothing throws: degenerate components (such as a
// deliberately zero utility) are legal to evaluate, and the caller
// decides what to do with the findings.
inline ValidationReport validate_preference(const PreferenceSpec& pref,
                                            double x_max = 10.0,
                                            std::size_t grid_n = 256) {
    ValidationReport rep;
    detail::validate_utility(pref.running_gain, "running_gain_utility", x_max, grid_n, rep);
    detail::validate_utility(pref.running_loss, "running_loss_utility", x_max, grid_n, rep);
    detail::validate_utility(pref.terminal, "terminal_utility", x_max, grid_n, rep);
    detail::validate_distortion(pref.weight_gain, "gain_distortion", grid_n, rep);
    detail::validate_distortion(pref.weight_loss, "loss_distortion", grid_n, rep);
    detail::validate_distortion(pref.weight_terminal, "terminal_distortion", grid_n, rep);
    return rep;
}

} // namespace prospect
