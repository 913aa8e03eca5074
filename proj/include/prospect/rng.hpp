// Counter-based random number generation.
//
// Each (seed, stream) pair defines an independent stream keyed by a
// SplitMix64-style finalizer; draw k of a stream is a pure function of
// (key, k).  Simulations assign one stream per sample path, so any thread
// may compute any path and the ensemble is identical for every thread
// count.  One uniform is consumed per normal (inverse-CDF method), which
// keeps draw indices aligned with time steps.
#pragma once

#include <cstdint>

#include "prospect/numerics.hpp"

namespace prospect {

namespace detail {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
} // namespace detail

// Well-separated stream key for (seed, stream).  Two rounds of mixing so
// that nearby seeds/stream ids do not produce correlated keys.
inline std::uint64_t rng_stream_key(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t a = detail::mix64(seed + detail::kGolden * (stream + 1));
    return detail::mix64(a ^ 0xD1B54A32D192ED03ull);
}

inline std::uint64_t rng_u64(std::uint64_t key, std::uint64_t counter) {
    return detail::mix64(key + detail::kGolden * counter);
}

// Uniform draw strictly inside (0,1): 53 random bits, offset by half an ulp
// so 0 and 1 are unreachable (inv_norm_cdf needs the open interval).
inline double rng_uniform(std::uint64_t key, std::uint64_t counter) {
    const std::uint64_t bits = rng_u64(key, counter) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

// Standard normal draw, one uniform consumed, via the AS 241 quantile.
inline double rng_normal(std::uint64_t key, std::uint64_t counter) {
    return inv_norm_cdf(rng_uniform(key, counter));
}

// Stream id tags.  Path p of the main state ensemble uses stream p;
// auxiliary randomness (e.g. discrete bet outcomes layered on top of a
// diffusion) lives in a disjoint block so it never collides with the
// Brownian increments.
namespace rng_streams {
constexpr std::uint64_t kStatePaths = 0;            // stream = p
constexpr std::uint64_t kOverlay = 1ull << 40;      // stream = kOverlay + p
} // namespace rng_streams

} // namespace prospect
