// Small numerical toolbox: deterministic reductions, normal distribution
// helpers, trapezoidal quadrature weights, and a minimal thread pool loop.
//
// Every reduction in the library funnels through pairwise_sum so that
// results are bit-for-bit reproducible regardless of how the surrounding
// work was partitioned across threads.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "prospect/errors.hpp"

namespace prospect {

// Pairwise (cascade) summation.  O(log n) error growth instead of O(n),
// and a fixed association order, so the result does not depend on thread
// partitioning as long as the input order is fixed.
inline double pairwise_sum(const double* data, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

inline double pairwise_sum(std::span<const double> data) {
    return pairwise_sum(data.data(), data.size());
}

inline double mean(std::span<const double> data) {
    if (data.empty()) throw DataError("mean: empty sample");
    return pairwise_sum(data) / static_cast<double>(data.size());
}

// Unbiased sample variance (two-pass).  Returns 0 for n < 2.
inline double sample_variance(std::span<const double> data) {
    const std::size_t n = data.size();
    if (n < 2) return 0.0;
    const double m = mean(data);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = data[i] - m;
        sq[i] = d * d;
    }
    return pairwise_sum(sq) / static_cast<double>(n - 1);
}

inline double sample_std(std::span<const double> data) {
    return std::sqrt(sample_variance(data));
}

// Monte Carlo standard error of the mean: sd / sqrt(n).
inline double std_error_of_mean(std::span<const double> data) {
    if (data.empty()) return 0.0;
    return sample_std(data) / std::sqrt(static_cast<double>(data.size()));
}

// Standard normal CDF.
inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Inverse standard normal CDF (quantile function), Wichura's algorithm
// AS 241 (PPND16 variant).  Accurate to ~1e-16 relative over (0,1);
// this is what turns counter-based uniforms into Gaussian increments, so
// it must be deterministic and consume exactly one uniform per normal.
inline double inv_norm_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("inv_norm_cdf: p must lie strictly inside (0,1)");

    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }

    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        val = num / den;
    }
    return (q < 0.0) ? -val : val;
}

// Trapezoidal weights for integrating a function known at the first
// `nodes` grid points of a uniform grid with spacing dt, i.e. over
// [t_0, t_{nodes-1}].  Running-cost integrals in this library always use
// this rule over nodes 0..N-1 (the terminal node is handled separately).
inline std::vector<double> trapezoid_weights(std::size_t nodes, double dt) {
    std::vector<double> w(nodes, dt);
    if (nodes == 0) return w;
    if (nodes == 1) { w[0] = 0.0; return w; }
    w.front() = 0.5 * dt;
    w.back() = 0.5 * dt;
    return w;
}

// Runs fn(lo, hi) over a partition of [0, total) on `threads` workers.
// Workers write to disjoint slots; callers do any reductions serially, so
// numeric output is independent of the thread count.  The first exception
// thrown by a worker is rethrown on the calling thread after the join.
template <typename Fn>
inline void parallel_for(std::size_t total, unsigned threads, Fn&& fn) {
    if (threads <= 1 || total < 2) {
        fn(std::size_t{0}, total);
        return;
    }
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(threads, total));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (total + workers - 1) / workers;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = static_cast<std::size_t>(w) * chunk;
        const std::size_t hi = std::min(total, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn, &first_error, &error_mutex] {
            try {
                fn(lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace prospect
