// Empirical CDFs with midpoint ranks, probability integral transforms,
// and the Kolmogorov–Smirnov distance against the uniform law.
//
// Rank convention: the i-th order statistic (1-based) carries rank
// (i - 0.5)/n; tied values all receive the rank of the highest tied
// position.  Queries are right-continuous and return 0 strictly below
// the smallest sample.  The half-sample offset keeps transformed values
// strictly inside (0,1), which downstream distortion derivatives need.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "prospect/errors.hpp"
#include "prospect/numerics.hpp"

namespace prospect {

class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::span<const double> samples) {
        if (samples.size() < 2)
            throw DataError("EmpiricalCdf: need at least two samples");
        sorted_.assign(samples.begin(), samples.end());
        for (double v : sorted_)
            if (!std::isfinite(v))
                throw DataError("EmpiricalCdf: non-finite sample");
        std::sort(sorted_.begin(), sorted_.end());
    }

    std::size_t size() const { return sorted_.size(); }
    const std::vector<double>& sorted() const { return sorted_; }

    // F_hat(x) = (#{v <= x} - 0.5)/n, clamped to 0 below the sample range.
    // Counting "<= x" automatically assigns tied values their highest rank.
    double operator()(double x) const {
        const auto up = std::upper_bound(sorted_.begin(), sorted_.end(), x);
        const std::size_t count = static_cast<std::size_t>(up - sorted_.begin());
        if (count == 0) return 0.0;
        const double n = static_cast<double>(sorted_.size());
        return (static_cast<double>(count) - 0.5) / n;
    }

private:
    std::vector<double> sorted_;
};

// Midpoint ranks of each sample within its own sample set — the
// probability integral transform evaluated in input order.
inline std::vector<double> pit_transform(std::span<const double> samples) {
    EmpiricalCdf cdf(samples);
    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) out[i] = cdf(samples[i]);
    return out;
}

// Kolmogorov–Smirnov distance between values (must lie in [0,1]) and the
// uniform law on [0,1]:  D = max_i max(i/n - v_(i), v_(i) - (i-1)/n).
inline double ks_distance_uniform(std::span<const double> values) {
    if (values.empty()) throw DataError("ks_distance_uniform: empty sample");
    std::vector<double> v(values.begin(), values.end());
    for (double x : v)
        if (!(x >= 0.0 && x <= 1.0))
            throw DomainError("ks_distance_uniform: value outside [0,1]");
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double hi = (static_cast<double>(i) + 1.0) / n - v[i];
        const double lo = v[i] - static_cast<double>(i) / n;
        d = std::max(d, std::max(hi, lo));
    }
    return d;
}

} // namespace prospect
