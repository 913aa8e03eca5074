// Empirical distribution helpers: midpoint-rank CDF, the probability
// integral transform, and the Kolmogorov–Smirnov distance to uniformity.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "prospect/empirical.hpp"
#include "prospect/rng.hpp"

using namespace prospect;

TEST_CASE("midpoint-rank cdf on a distinct four-point sample", "[empirical]") {
    const std::vector<double> s = {1.0, 2.0, 3.0, 4.0};
    const EmpiricalCdf f(s);
    CHECK(f(0.5) == 0.0);              // below the range: clamped
    CHECK(f(1.0) == 0.125);            // (1 - 0.5)/4
    CHECK(f(2.0) == 0.375);
    CHECK(f(2.5) == 0.375);            // right-continuous between points
    CHECK(f(4.0) == 0.875);
    CHECK(f(100.0) == 0.875);          // above the range: top midpoint rank
    CHECK(f.size() == 4);
}

TEST_CASE("tied values share their highest midpoint rank", "[empirical]") {
    const std::vector<double> s = {1.0, 1.0, 2.0};
    const EmpiricalCdf f(s);
    CHECK(f(1.0) == Catch::Approx((2.0 - 0.5) / 3.0).epsilon(1e-15));
    CHECK(f(2.0) == Catch::Approx((3.0 - 0.5) / 3.0).epsilon(1e-15));
}

TEST_CASE("cdf construction rejects degenerate input", "[empirical]") {
    CHECK_THROWS_AS(EmpiricalCdf(std::vector<double>{1.0}), DataError);
    CHECK_THROWS_AS(EmpiricalCdf(std::vector<double>{
                        1.0, std::numeric_limits<double>::quiet_NaN()}),
                    DataError);
}

TEST_CASE("self transform of a distinct sample gives exact midpoint ranks",
          "[empirical]") {
    const std::vector<double> s = {0.7, -1.2, 3.4, 0.1, 2.2};
    const auto pit = pit_transform(s);
    REQUIRE(pit.size() == s.size());
    // Sorting the transformed values must give (i + 0.5)/n exactly.
    std::vector<double> sorted(pit);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        CHECK(sorted[i] ==
              Catch::Approx((static_cast<double>(i) + 0.5) / 5.0).epsilon(1e-15));
    }
    // Order is preserved: the transform of the largest input is the top rank.
    CHECK(pit[2] == sorted.back());
}

TEST_CASE("ks distance frozen hand values", "[empirical]") {
    // Singleton at the middle: D = max(1 - 0.5, 0.5 - 0) = 0.5.
    CHECK(ks_distance_uniform(std::vector<double>{0.5}) == 0.5);
    // {0.1, 0.2, 0.9}: the largest one-sided gap is 2/3 - 0.2.
    CHECK(ks_distance_uniform(std::vector<double>{0.1, 0.2, 0.9}) ==
          Catch::Approx(2.0 / 3.0 - 0.2).epsilon(1e-14));
    // Perfect midpoint grid: D = 0.5/n.
    std::vector<double> grid(40);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = (static_cast<double>(i) + 0.5) / 40.0;
    CHECK(ks_distance_uniform(grid) == Catch::Approx(0.5 / 40.0).epsilon(1e-13));
}

TEST_CASE("ks distance rejects values outside the unit interval", "[empirical]") {
    CHECK_THROWS_AS(ks_distance_uniform(std::vector<double>{}), DataError);
    CHECK_THROWS_AS(ks_distance_uniform(std::vector<double>{0.5, 1.2}),
                    DomainError);
    CHECK_THROWS_AS(ks_distance_uniform(std::vector<double>{-0.1, 0.5}),
                    DomainError);
}

TEST_CASE("uniform stream passes its own distribution test", "[empirical]") {
    const std::size_t n = 20000;
    const std::uint64_t key = rng_stream_key(99, 0);
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = rng_uniform(key, i);
    CHECK(ks_distance_uniform(u) <= 1.63 / std::sqrt(static_cast<double>(n)) +
                                        1.0 / static_cast<double>(n));
}

TEST_CASE("pit of a sample against its own cdf is uniform", "[empirical]") {
    const std::size_t n = 5000;
    const std::uint64_t key = rng_stream_key(41, 5);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = std::exp(0.4 * rng_normal(key, i));
    const auto pit = pit_transform(x);
    // Distinct samples almost surely, so the self-PIT is the exact midpoint
    // grid and the distance collapses to 0.5/n.
    CHECK(ks_distance_uniform(pit) ==
          Catch::Approx(0.5 / static_cast<double>(n)).epsilon(1e-10));
}
