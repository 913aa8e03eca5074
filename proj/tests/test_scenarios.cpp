// Worked-example scenarios: naming, parameter derivation, closed forms for
// the consumption and market candidates, candidate ensembles and their
// adjoints, perturbation directions, and a dominance property of the
// candidate consumption policy.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "prospect/maximum_principle.hpp"
#include "prospect/scenarios.hpp"

using namespace prospect;

TEST_CASE("scenario names round-trip", "[scenarios]") {
    for (ScenarioId id : {ScenarioId::market, ScenarioId::zero_control,
                          ScenarioId::consumption, ScenarioId::fixed_mix,
                          ScenarioId::bet_overlay})
        CHECK(scenario_from_name(scenario_name(id)) == id);
    CHECK_THROWS_AS(scenario_from_name("no_such_thing"), ConfigError);
}

TEST_CASE("market price of risk: derived, overridden, or rejected",
          "[scenarios]") {
    ScenarioParams p;
    CHECK(p.theta() == Catch::Approx((0.06 - 0.02) / 0.2).epsilon(1e-15));
    p.market_price_of_risk = 0.3;
    CHECK(p.theta() == 0.3);
    // An explicit value inconsistent with (growth - rate)/vol is a
    // configuration error for the market scenario.
    CHECK_THROWS_AS(build_scenario(ScenarioId::market, p), ConfigError);
    p.market_price_of_risk = 0.2;
    CHECK_NOTHROW(build_scenario(ScenarioId::market, p));
}

TEST_CASE("candidate consumption rate closed form", "[scenarios]") {
    ScenarioParams p;  // alpha = 0.5, run_nu = 0, run_b = 0 -> C = 1
    CHECK(consumption_rate_closed_form(0.0, p) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(consumption_rate_closed_form(0.5, p) == Catch::Approx(4.0).epsilon(1e-14));
    CHECK(consumption_rate_closed_form(0.9, p) ==
          Catch::Approx(100.0).epsilon(1e-12));
    // Top-rank running weight C = (1 - nu)(b + 1).
    p.run_nu = 0.3;
    p.run_b = 1.0;  // C = 0.7 * 2 = 1.4
    CHECK(consumption_rate_closed_form(0.0, p) ==
          Catch::Approx(1.96).epsilon(1e-13));
}

TEST_CASE("candidate consumption mean state closed form", "[scenarios]") {
    ScenarioParams p;
    CHECK(consumption_mean_state(0.0, p) == Catch::Approx(1.0).epsilon(1e-14));
    // x0 + 1/(1-t) - 1 at the default parameters.
    CHECK(consumption_mean_state(0.5, p) == Catch::Approx(2.0).epsilon(1e-13));
    CHECK(consumption_mean_state(0.75, p) == Catch::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("simulated consumption candidate matches its mean state closed form",
          "[scenarios]") {
    const auto sc = build_scenario(ScenarioId::consumption, ScenarioParams{});
    const TimeGrid grid(1.0, 100);
    const auto run = make_candidate_run(sc, grid, 20000, 7);
    for (double t : {0.25, 0.5}) {
        const std::size_t node = static_cast<std::size_t>(t * 100.0 + 0.5);
        const auto row = run.ens.state.row(node);
        const double gap =
            std::abs(mean(row) - consumption_mean_state(t, sc.params));
        INFO("t=" << t << " gap=" << gap << " se=" << std_error_of_mean(row));
        CHECK(gap <= 3.0 * std_error_of_mean(row));
    }
}

TEST_CASE("market candidate satisfies the budget constraint", "[scenarios]") {
    const auto sc = build_scenario(ScenarioId::market, ScenarioParams{});
    const auto run = make_candidate_run(sc, TimeGrid(1.0, 100), 20000, 7);
    REQUIRE(run.terminal_wealth.size() == 20000);
    const auto rho_T = run.ens.kernel.row(100);
    std::vector<double> cost(20000);
    for (std::size_t j = 0; j < cost.size(); ++j)
        cost[j] = rho_T[j] * run.terminal_wealth[j];
    CHECK(std::abs(mean(cost) - sc.params.x0) <= 1e-3);
    CHECK(run.lambda > 0.0);
}

TEST_CASE("budget multiplier has an exact value in the undistorted "
          "riskless case",
          "[scenarios]") {
    // With theta = 0 and the identity terminal weight, the kernel is
    // identically one and lambda solves lambda^(1/(gamma-1)) = x0, i.e.
    // lambda = x0^(gamma-1) = 4^(-1/2) = 0.5.
    ScenarioParams p;
    p.rate = 0.0;
    p.growth = 0.0;
    p.x0 = 4.0;
    p.terminal_identity_weight = true;
    const auto sc = build_scenario(ScenarioId::market, p);
    const auto run = make_candidate_run(sc, TimeGrid(1.0, 8), 500, 3);
    CHECK(std::abs(run.lambda - 0.5) <= 1e-4);
    // Every path's candidate terminal wealth is then exactly x0.
    CHECK(run.terminal_wealth[7] == Catch::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("terminal kernel law evaluated at one", "[scenarios]") {
    // log rho_T is normal with mean -(r + theta^2/2) T and sd theta sqrt(T),
    // so F(1) = Phi(0.04 / 0.2) at the default parameters.
    const ScenarioParams p;
    CHECK(kernel_terminal_cdf(1.0, p) ==
          Catch::Approx(0.57925970943910302).epsilon(1e-14));
}

TEST_CASE("scenario wiring flags", "[scenarios]") {
    const ScenarioParams p;
    const auto market = build_scenario(ScenarioId::market, p);
    CHECK(market.needs_kernel);
    CHECK_FALSE(market.objective.running.enabled);
    CHECK(market.objective.terminal_enabled);
    CHECK(market.candidate.kind() == ControlKind::constant);
    CHECK(market.candidate.value(0, 0.0, 1.0, 0) ==
          Catch::Approx(1.0).epsilon(1e-14));  // theta / vol

    const auto zc = build_scenario(ScenarioId::zero_control, p);
    CHECK_FALSE(zc.needs_kernel);
    CHECK(zc.objective.running.enabled);
    CHECK(zc.objective.running.transform == ControlTransform::raw_control);
    CHECK_FALSE(zc.objective.terminal_enabled);
    CHECK(zc.candidate.value(0, 0.0, 1.0, 0) == 0.0);

    const auto cons = build_scenario(ScenarioId::consumption, p);
    CHECK(cons.objective.running.transform ==
          ControlTransform::control_times_state);
    CHECK(cons.objective.smooth.enabled);
    CHECK_FALSE(cons.objective.terminal_enabled);

    ScenarioParams bad;
    bad.run_a = 0.0;
    CHECK_THROWS_AS(build_scenario(ScenarioId::consumption, bad), ConfigError);
}

TEST_CASE("market candidate adjoint is proportional to the kernel",
          "[scenarios]") {
    const auto sc = build_scenario(ScenarioId::market, ScenarioParams{});
    const auto run = make_candidate_run(sc, TimeGrid(1.0, 10), 64, 5);
    for (std::size_t i = 0; i <= 10; ++i)
        for (std::size_t j = 0; j < 64; ++j) {
            CHECK(run.adjoint.p.at(i, j) ==
                  run.lambda * run.ens.kernel.at(i, j));
            CHECK(run.adjoint.q.at(i, j) ==
                  -run.lambda * sc.params.theta() * run.ens.kernel.at(i, j));
        }
}

TEST_CASE("direction taper and scenario directions", "[scenarios]") {
    CHECK(direction_taper(0.2, 0.5, 0.6) == 1.0);
    CHECK(direction_taper(0.5, 0.5, 0.6) == 1.0);
    CHECK(direction_taper(0.55, 0.5, 0.6) == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(direction_taper(0.6, 0.5, 0.6) == 0.0);
    CHECK(direction_taper(0.9, 0.5, 0.6) == 0.0);

    const auto market = build_scenario(ScenarioId::market, ScenarioParams{});
    const auto d1 = duality_const_direction(market, 0.2);
    CHECK(d1.kind() == ControlKind::constant);
    CHECK(d1.value(3, 0.7, 1.0, 0) == 0.2);

    // Consumption directions fade out before the singular horizon.
    const auto cons = build_scenario(ScenarioId::consumption, ScenarioParams{});
    const auto d2 = duality_const_direction(cons, 0.2);
    CHECK(d2.kind() == ControlKind::feedback);
    CHECK(d2.value(0, 0.0, 1.0, 0) == 0.2);
    CHECK(d2.value(0, 0.55, 1.0, 0) == Catch::Approx(0.1).epsilon(1e-12));
    CHECK(d2.value(0, 0.8, 1.0, 0) == 0.0);

    const auto run = make_candidate_run(cons, TimeGrid(1.0, 10), 32, 2);
    const auto d3 = duality_candidate_direction(cons, run.ens, 0.5);
    CHECK(d3.kind() == ControlKind::per_path);
    CHECK(d3.value(0, 0.0, 1.0, 4) ==
          Catch::Approx(0.5 * run.ens.control.at(0, 4)).epsilon(1e-14));
    CHECK(d3.value(9, 0.9, 1.0, 4) == 0.0);  // past the taper window
}

TEST_CASE("candidate consumption policy dominates its own rescalings",
          "[scenarios]") {
    // Scaling the realized candidate control by s != 1 (open loop, same
    // driving noise) must lower the objective.  This is a direct ordering
    // check on J itself, independent of any optimality-condition machinery.
    const auto sc = build_scenario(ScenarioId::consumption, ScenarioParams{});
    const TimeGrid grid(1.0, 100);
    const std::size_t n = 2000;
    const auto run = make_candidate_run(sc, grid, n, 7);
    std::vector<double> pp0;
    const auto j0 = evaluate_objective(run.ens, sc.objective, &pp0);

    for (double s : {0.8, 1.2}) {
        std::vector<double> table(grid.nodes() * n);
        for (std::size_t i = 0; i < grid.nodes(); ++i)
            for (std::size_t j = 0; j < n; ++j)
                table[i * n + j] = s * run.ens.control.at(i, j);
        const auto scaled = simulate_state(
            sc.model, grid, ControlSpec::per_path(table, grid.nodes(), n), n,
            sc.params.x0, run.ens.seed);
        std::vector<double> pps;
        const auto js = evaluate_objective(scaled, sc.objective, &pps);
        std::vector<double> diff(n);
        for (std::size_t j = 0; j < n; ++j) diff[j] = pp0[j] - pps[j];
        const double gap = j0.total - js.total;
        INFO("scale " << s << ": J0 - Js = " << gap
                      << ", se = " << std_error_of_mean(diff));
        CHECK(gap > 3.0 * std_error_of_mean(diff));
    }
}
