// Shape-preserving cubic interpolation (Fritsch–Carlson / PCHIP).
//
// Used for tabulated utilities, distortions and state-dependent model
// coefficients.  Monotone data yields a monotone interpolant, which is
// what keeps tabulated preference functions valid where the inputs are.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "prospect/errors.hpp"

namespace prospect {

class MonotoneCubic {
public:
    MonotoneCubic() = default;

    MonotoneCubic(std::vector<double> xs, std::vector<double> ys)
        : xs_(std::move(xs)), ys_(std::move(ys)) {
        const std::size_t n = xs_.size();
        if (n < 2 || ys_.size() != n)
            throw DataError("MonotoneCubic: need at least two (x,y) knots");
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!(xs_[i] < xs_[i + 1]))
                throw DataError("MonotoneCubic: knots must be strictly increasing");
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i]))
                throw DataError("MonotoneCubic: non-finite knot");
        build();
    }

    double x_min() const { return xs_.front(); }
    double x_max() const { return xs_.back(); }

    // Value; continues linearly (with the boundary slope) outside the knots.
    double value(double x) const { return eval(x, 0); }
    // First derivative (piecewise quadratic inside, constant outside).
    double deriv(double x) const { return eval(x, 1); }
    // Second derivative (piecewise linear inside, zero outside; may jump
    // at knots — evaluated on the right-hand interval).
    double deriv2(double x) const { return eval(x, 2); }

private:
    std::vector<double> xs_, ys_, ds_;

    // Fritsch–Carlson tangents: harmonic-mean limiter at interior knots,
    // shape-limited three-point estimates at the ends.  Zero tangent
    // wherever adjacent secants disagree in sign, so no overshoot.
    void build() {
        const std::size_t n = xs_.size();
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = xs_[i + 1] - xs_[i];
            delta[i] = (ys_[i + 1] - ys_[i]) / h[i];
        }
        ds_.assign(n, 0.0);
        if (n == 2) {
            ds_[0] = ds_[1] = delta[0];
            return;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] == 0.0 || delta[i] == 0.0 ||
                (delta[i - 1] > 0.0) != (delta[i] > 0.0)) {
                ds_[i] = 0.0;
            } else {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                ds_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        ds_[0] = end_tangent(h[0], h[1], delta[0], delta[1]);
        ds_[n - 1] = end_tangent(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }

    static double end_tangent(double h0, double h1, double d0, double d1) {
        double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (d * d0 <= 0.0) {
            d = 0.0;
        } else if ((d0 > 0.0) != (d1 > 0.0) && std::fabs(d) > 3.0 * std::fabs(d0)) {
            d = 3.0 * d0;
        }
        return d;
    }

    double eval(double x, int order) const {
        if (!std::isfinite(x)) throw DomainError("MonotoneCubic: non-finite query");
        if (x <= xs_.front()) {
            switch (order) {
                case 0: return ys_.front() + ds_.front() * (x - xs_.front());
                case 1: return ds_.front();
                default: return 0.0;
            }
        }
        if (x >= xs_.back()) {
            switch (order) {
                case 0: return ys_.back() + ds_.back() * (x - xs_.back());
                case 1: return ds_.back();
                default: return 0.0;
            }
        }
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
        const double h = xs_[i + 1] - xs_[i];
        const double s = (x - xs_[i]) / h;
        const double y0 = ys_[i], y1 = ys_[i + 1];
        const double d0 = ds_[i] * h, d1 = ds_[i + 1] * h;
        switch (order) {
            case 0: {
                // Cubic Hermite basis.
                const double s2 = s * s, s3 = s2 * s;
                return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * d0 +
                       (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * d1;
            }
            case 1: {
                const double s2 = s * s;
                return ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * d0 +
                        (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * d1) / h;
            }
            default: {
                return ((12 * s - 6) * y0 + (6 * s - 4) * d0 +
                        (-12 * s + 6) * y1 + (6 * s - 2) * d1) / (h * h);
            }
        }
    }
};

} // namespace prospect
