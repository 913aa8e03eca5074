// Controlled state simulation: exact log-normal stepping, control recording
// conventions, reproducibility across seeds and thread counts, the pricing
// kernel, and the first-variation (sensitivity) recursion.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "prospect/model.hpp"
#include "prospect/numerics.hpp"
#include "prospect/rng.hpp"
#include "prospect/simulate.hpp"

using namespace prospect;

TEST_CASE("log-normal stepping matches a pathwise replay", "[simulate]") {
    const auto model = ModelSpec::linear_in_x(0.02, 0.04, 0.2, 0.1);
    const TimeGrid grid(1.0, 16);
    const double u = 0.5, x0 = 1.3;
    const auto ens = simulate_state(model, grid, ControlSpec::constant(u), 8,
                                    x0, 2024);
    const double dt = grid.dt();
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
        double x = x0;
        CHECK(ens.state.at(0, p) == x);
        for (std::size_t i = 0; i < grid.steps; ++i) {
            const double t = grid.t(i);
            const double beta = model.drift_x(t, u, x);
            const double s = model.vol_x(t, u, x);
            x *= std::exp((beta - 0.5 * s * s) * dt + s * ens.increments.at(i, p));
            CHECK(ens.state.at(i + 1, p) == x);  // bitwise: same update
        }
    }
}

TEST_CASE("uncontrolled terminal mean matches the growth factor", "[simulate]") {
    const double r = 0.05, sigma = 0.2, x0 = 1.0, T = 1.0;
    const auto model = ModelSpec::linear_in_x(r, 0.0, sigma, 0.0);
    const auto ens = simulate_state(model, TimeGrid(T, 50),
                                    ControlSpec::constant(0.0), 20000, x0, 7);
    const auto terminal = ens.state.row(ens.grid.steps);
    const double m = mean(terminal);
    const double se = std_error_of_mean(terminal);
    CHECK(std::abs(m - x0 * std::exp(r * T)) <= 3.0 * se);
}

TEST_CASE("same seed reproduces, different seed differs", "[simulate]") {
    const auto model = ModelSpec::linear_in_x(0.0, 0.0, 0.3, 0.0);
    const TimeGrid grid(1.0, 10);
    const auto a = simulate_state(model, grid, ControlSpec::constant(0.0), 32,
                                  1.0, 5);
    const auto b = simulate_state(model, grid, ControlSpec::constant(0.0), 32,
                                  1.0, 5);
    const auto c = simulate_state(model, grid, ControlSpec::constant(0.0), 32,
                                  1.0, 6);
    bool same = true, differs = false;
    for (std::size_t i = 0; i <= grid.steps; ++i)
        for (std::size_t p = 0; p < 32; ++p) {
            same = same && (a.state.at(i, p) == b.state.at(i, p));
            differs = differs || (a.state.at(i, p) != c.state.at(i, p));
        }
    CHECK(same);
    CHECK(differs);
}

TEST_CASE("results are invariant to the thread partition", "[simulate]") {
    const auto model = ModelSpec::linear_in_x(0.01, 0.05, 0.25, 0.15);
    const TimeGrid grid(1.0, 20);
    SimOptions one;
    one.threads = 1;
    SimOptions four;
    four.threads = 4;
    const auto a = simulate_state(model, grid, ControlSpec::constant(0.4), 101,
                                  1.0, 99, one);
    const auto b = simulate_state(model, grid, ControlSpec::constant(0.4), 101,
                                  1.0, 99, four);
    for (std::size_t i = 0; i <= grid.steps; ++i)
        for (std::size_t p = 0; p < 101; ++p)
            REQUIRE(a.state.at(i, p) == b.state.at(i, p));
}

TEST_CASE("control recording conventions", "[simulate]") {
    const auto model = ModelSpec::linear_in_x(0.0, 0.0, 0.2, 0.0);
    const TimeGrid grid(1.0, 4);

    SECTION("constant control fills every node including the terminal one") {
        const auto ens =
            simulate_state(model, grid, ControlSpec::constant(0.7), 3, 1.0, 1);
        for (std::size_t i = 0; i <= grid.steps; ++i)
            for (std::size_t p = 0; p < 3; ++p)
                CHECK(ens.control.at(i, p) == 0.7);
    }

    SECTION("deterministic table is read per node and clamped at the end") {
        const auto ens = simulate_state(
            model, grid, ControlSpec::deterministic({0.1, 0.2, 0.3}), 2, 1.0, 1);
        CHECK(ens.control.at(0, 0) == 0.1);
        CHECK(ens.control.at(1, 0) == 0.2);
        CHECK(ens.control.at(2, 0) == 0.3);
        CHECK(ens.control.at(3, 0) == 0.3);  // clamped past the table
        CHECK(ens.control.at(4, 0) == 0.3);  // terminal node
    }

    SECTION("feedback control is evaluated at the left endpoint") {
        const double c0 = 0.6, x0 = 2.5;
        const auto phi = [c0](double, double x) { return c0 / x; };
        const auto ens = simulate_state(
            model, grid, ControlSpec::feedback(phi, "reciprocal"), 2, x0, 1);
        CHECK(ens.control.at(0, 0) == c0 / x0);
        CHECK(ens.control.at(0, 1) == c0 / x0);
        // Terminal node carries the last interval's value forward.
        CHECK(ens.control.at(grid.steps, 0) ==
              ens.control.at(grid.steps - 1, 0));
    }

    SECTION("per-path table round-trips through the recorded control") {
        const std::size_t nodes = grid.steps + 1, n_paths = 3;
        std::vector<double> table(nodes * n_paths);
        for (std::size_t i = 0; i < nodes; ++i)
            for (std::size_t p = 0; p < n_paths; ++p)
                table[i * n_paths + p] =
                    0.01 * static_cast<double>(i) + 0.1 * static_cast<double>(p);
        const auto ctrl = ControlSpec::per_path(table, nodes, n_paths);
        const auto ens = simulate_state(model, grid, ctrl, n_paths, 1.0, 1);
        for (std::size_t i = 0; i < nodes; ++i)
            for (std::size_t p = 0; p < n_paths; ++p)
                CHECK(ens.control.at(i, p) == table[i * n_paths + p]);
    }
}

TEST_CASE("bounds and input validation", "[simulate]") {
    const auto model = ModelSpec::linear_in_x(0.0, 0.0, 0.2, 0.0);
    const TimeGrid grid(1.0, 4);
    CHECK_THROWS_AS(
        simulate_state(model, grid,
                       ControlSpec::constant(2.0).with_bounds(0.0, 1.0), 2, 1.0,
                       1),
        DomainError);
    CHECK_THROWS_AS(ControlSpec::constant(0.0).with_bounds(1.0, 1.0),
                    ConfigError);
    CHECK_THROWS_AS(ControlSpec::deterministic({0.5}), ConfigError);
    CHECK_THROWS_AS(ControlSpec::per_path({0.0, 0.0, 0.0}, 2, 2), ConfigError);
    CHECK_THROWS_AS(
        simulate_state(model, grid, ControlSpec::constant(0.0), 0, 1.0, 1),
        ConfigError);
    CHECK_THROWS_AS(
        simulate_state(model, grid, ControlSpec::constant(0.0), 2, 0.0, 1),
        ConfigError);
    CHECK(ControlSpec::constant(0.5).with_bounds(0.0, 1.0).admissible(0.5));
    CHECK_FALSE(ControlSpec::constant(0.5).with_bounds(0.0, 1.0).admissible(1.5));
}

TEST_CASE("pricing kernel law and pathwise recursion", "[simulate]") {
    const double r = 0.02, theta = 0.2, T = 1.0;
    const auto model = ModelSpec::linear_in_x(0.06, 0.0, 0.2, 0.0);
    auto ens = simulate_state(model, TimeGrid(T, 40), ControlSpec::constant(0.0),
                              20000, 1.0, 13);
    simulate_pricing_kernel(ens, r, theta);
    const double dt = ens.grid.dt();

    // Pathwise: the stored kernel is the running product of per-step factors.
    for (std::size_t p = 0; p < 5; ++p) {
        double rho = 1.0;
        CHECK(ens.kernel.at(0, p) == 1.0);
        for (std::size_t i = 0; i < ens.grid.steps; ++i) {
            rho *= std::exp(-(r + 0.5 * theta * theta) * dt -
                            theta * ens.increments.at(i, p));
            CHECK(ens.kernel.at(i + 1, p) == rho);
        }
    }

    // Law: E[rho_T] = exp(-rT) and E[rho_T^2] = exp((theta^2 - 2r) T).
    const auto rho_T = ens.kernel.row(ens.grid.steps);
    CHECK(std::abs(mean(rho_T) - std::exp(-r * T)) <=
          3.0 * std_error_of_mean(rho_T));
    std::vector<double> sq(rho_T.begin(), rho_T.end());
    for (double& v : sq) v *= v;
    CHECK(std::abs(mean(sq) - std::exp((theta * theta - 2.0 * r) * T)) <=
          3.0 * std_error_of_mean(sq));
}

TEST_CASE("first-variation recursion", "[simulate]") {
    const auto model = ModelSpec::linear_in_x(0.01, -0.5, 0.3, 0.2);
    const TimeGrid grid(1.0, 3);
    const auto ens = simulate_state(model, grid, ControlSpec::constant(0.4), 2,
                                    1.5, 77);

    SECTION("zero direction gives an identically zero sensitivity") {
        const auto z = simulate_variational(ens, model, ControlSpec::constant(0.0));
        for (std::size_t i = 0; i <= grid.steps; ++i)
            for (std::size_t p = 0; p < 2; ++p) CHECK(z.at(i, p) == 0.0);
    }

    SECTION("manual replay of the discrete sensitivity recursion") {
        const auto z =
            simulate_variational(ens, model, ControlSpec::constant(1.0));
        const double dt = grid.dt();
        const double b1 = model.lin_drift_u();
        const double s1 = model.lin_vol_u();
        for (std::size_t p = 0; p < 2; ++p) {
            double zv = 0.0;
            CHECK(z.at(0, p) == 0.0);
            for (std::size_t i = 0; i < grid.steps; ++i) {
                const double t = grid.t(i);
                const double x = ens.state.at(i, p);
                const double u = ens.control.at(i, p);
                const double dw = ens.increments.at(i, p);
                const double beta = model.drift_x(t, u, x);
                const double s = model.vol_x(t, u, x);
                const double g = std::exp((beta - 0.5 * s * s) * dt + s * dw);
                zv = zv * g + x * g * 1.0 * ((b1 - s * s1) * dt + s1 * dw);
                CHECK(z.at(i + 1, p) == Catch::Approx(zv).margin(1e-15));
            }
        }
    }
}
