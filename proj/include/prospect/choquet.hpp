// Distorted (rank-dependent) expectation estimators.
//
// The target functional is the Choquet integral of util(X) under a
// distorted tail probability:  E_w[util(X)] = ∫ util d(w ∘ P-tail).
// Two estimators are provided and kept deliberately independent:
//
//   * order_stat — exact Riemann–Stieltjes sum over order statistics,
//     with distortion increments  w(1-(i-1)/n) - w(1-i/n);
//   * plugin    — average of util(x_i) * w'(1 - F_hat(x_i)) using
//     midpoint ranks.
//
// Agreement of the two on common inputs is itself a correctness check
// used throughout the test-suite; do not merge their implementations.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "prospect/empirical.hpp"
#include "prospect/errors.hpp"
#include "prospect/numerics.hpp"
#include "prospect/preference.hpp"

namespace prospect {

enum class ChoquetEstimator { order_stat, plugin };

struct ChoquetEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    ChoquetEstimator estimator = ChoquetEstimator::order_stat;
};

namespace detail {

inline void check_choquet_sample(std::span<const double> samples) {
    if (samples.empty()) throw DataError("choquet: empty sample");
    for (double v : samples) {
        if (!std::isfinite(v)) throw DataError("choquet: non-finite sample");
        if (v < 0.0) throw DomainError("choquet: samples must be nonnegative");
    }
}

template <class UtilF>
inline double order_stat_value(std::vector<double>& sorted, const UtilF& util,
                               const DistortionFn& dist) {
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double nd = static_cast<double>(n);
    std::vector<double> terms(n);
    double upper = dist.value(1.0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double lower = dist.value(1.0 - static_cast<double>(i) / nd);
        terms[i - 1] = util(sorted[i - 1]) * (upper - lower);
        upper = lower;
    }
    return pairwise_sum(terms);
}

} // namespace detail

// Order-statistic estimator.  The standard error comes from K-fold sample
// splitting (K = min(20, n), round-robin by input index): each fold is
// re-estimated on its own, and the spread of the fold values divided by
// sqrt(K) estimates the error of the pooled value.  `util` is any
// callable double -> double.
template <class UtilF>
inline ChoquetEstimate choquet_order_stat_fn(std::span<const double> samples,
                                             const UtilF& util,
                                             const DistortionFn& dist) {
    detail::check_choquet_sample(samples);
    std::vector<double> sorted(samples.begin(), samples.end());
    ChoquetEstimate est;
    est.estimator = ChoquetEstimator::order_stat;
    est.n = samples.size();
    est.value = detail::order_stat_value(sorted, util, dist);

    const std::size_t k = std::min<std::size_t>(20, samples.size());
    if (k >= 2) {
        std::vector<double> fold_vals(k);
        std::vector<double> fold;
        for (std::size_t f = 0; f < k; ++f) {
            fold.clear();
            for (std::size_t i = f; i < samples.size(); i += k)
                fold.push_back(samples[i]);
            fold_vals[f] = detail::order_stat_value(fold, util, dist);
        }
        est.std_error = sample_std(fold_vals) / std::sqrt(static_cast<double>(k));
    }
    return est;
}

inline ChoquetEstimate choquet_order_stat(std::span<const double> samples,
                                          const UtilityFn& util,
                                          const DistortionFn& dist) {
    return choquet_order_stat_fn(
        samples, [&util](double x) { return util.value(x); }, dist);
}

// Plugin estimator: mean of util(x_i) * w'(1 - F_hat(x_i)).  Its standard
// error is the plain Monte Carlo error of the per-sample terms, which also
// makes the terms reusable as per-path contributions by the objective
// evaluator.
template <class UtilF>
inline ChoquetEstimate choquet_plugin_fn(std::span<const double> samples,
                                         const UtilF& util,
                                         const DistortionFn& dist,
                                         std::vector<double>* terms_out = nullptr) {
    detail::check_choquet_sample(samples);
    if (samples.size() < 2)
        throw DataError("choquet: plugin estimator needs at least two samples");
    EmpiricalCdf cdf(samples);
    const std::size_t n = samples.size();
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i)
        terms[i] = util(samples[i]) * dist.deriv(1.0 - cdf(samples[i]));
    ChoquetEstimate est;
    est.estimator = ChoquetEstimator::plugin;
    est.n = n;
    est.value = pairwise_sum(terms) / static_cast<double>(n);
    est.std_error = std_error_of_mean(terms);
    if (terms_out) *terms_out = std::move(terms);
    return est;
}

inline ChoquetEstimate choquet_plugin(std::span<const double> samples,
                                      const UtilityFn& util,
                                      const DistortionFn& dist,
                                      std::vector<double>* terms_out = nullptr) {
    return choquet_plugin_fn(
        samples, [&util](double x) { return util.value(x); }, dist, terms_out);
}

} // namespace prospect
