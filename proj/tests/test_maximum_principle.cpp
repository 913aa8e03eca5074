// Stationarity residual, adjoint-variational duality, and the directional
// derivative cross-check (finite differences vs the first-variation formula).
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "prospect/maximum_principle.hpp"
#include "prospect/scenarios.hpp"

using namespace prospect;

TEST_CASE("state gradient of the running reward", "[maximum_principle]") {
    ObjectiveSpec spec;
    spec.pref.weight_gain = DistortionFn::inverse_s(1.0, 1.0, 0.0);  // p^2
    spec.running.enabled = true;
    std::vector<double> out(2);

    SECTION("raw-control argument carries no state dependence") {
        spec.running.transform = ControlTransform::raw_control;
        running_state_gradient(spec, 0.3, std::vector<double>{0.5, -0.2},
                               std::vector<double>{1.0, 2.0}, out);
        CHECK(out[0] == 0.0);
        CHECK(out[1] == 0.0);
    }

    SECTION("smooth term adds its own df/dx") {
        spec.running.transform = ControlTransform::raw_control;
        spec.smooth = SmoothRunningTerm::state_level();
        running_state_gradient(spec, 0.3, std::vector<double>{0.5, -0.2},
                               std::vector<double>{1.0, 2.0}, out);
        CHECK(out[0] == 1.0);
        CHECK(out[1] == 1.0);
    }

    SECTION("u*x argument: chain rule through the rank-weighted gain") {
        spec.running.transform = ControlTransform::control_times_state;
        const std::vector<double> u = {0.3, 0.3}, x = {1.0, 2.0};
        running_state_gradient(spec, 0.0, u, x, out);
        // args = {0.3, 0.6}: within-side midpoint ranks 0.25 and 0.75, so
        // the p^2 weights are w'(0.75) = 1.5 and w'(0.25) = 0.5; then
        // d/dx zeta(u x) = zeta'(u x) * u.
        CHECK(out[0] ==
              Catch::Approx(std::pow(0.3, -0.5) * 0.3 * 1.5).epsilon(1e-14));
        CHECK(out[1] ==
              Catch::Approx(std::pow(0.6, -0.5) * 0.3 * 0.5).epsilon(1e-14));
    }

    SECTION("negative u*x argument routes through the loss side") {
        spec.running.transform = ControlTransform::control_times_state;
        const std::vector<double> u = {-0.4, -0.4}, x = {1.0, 2.0};
        running_state_gradient(spec, 0.0, u, x, out);
        // Loss weight is the identity, so both weights are 1; the chain
        // factor keeps the sign of u.
        CHECK(out[0] ==
              Catch::Approx(std::pow(0.4, -0.5) * (-0.4)).epsilon(1e-14));
        CHECK(out[1] ==
              Catch::Approx(std::pow(0.8, -0.5) * (-0.4)).epsilon(1e-14));
    }
}

TEST_CASE("candidate consumption policy zeroes the stationarity residual",
          "[maximum_principle]") {
    const auto sc = build_scenario(ScenarioId::consumption, ScenarioParams{});
    const TimeGrid grid(1.0, 50);
    const auto run = make_candidate_run(sc, grid, 400, 7);
    const auto rep = mp_residual(run.ens, run.adjoint, sc.model, sc.objective);
    CHECK(rep.per_time.size() == grid.steps);
    CHECK(rep.included == grid.steps * 400);
    CHECK(rep.excluded == 0);
    CHECK(rep.overall_rms <= 1e-12);
    CHECK(rep.consistent);
    CHECK(rep.verdict() == "consistent");
}

TEST_CASE("constant consumption rate fails the stationarity check",
          "[maximum_principle]") {
    const auto sc = build_scenario(ScenarioId::consumption, ScenarioParams{});
    const TimeGrid grid(1.0, 50);
    const auto ens = simulate_state(sc.model, grid, ControlSpec::constant(0.5),
                                    400, sc.params.x0, 7);
    const auto adj = adjoint_time_to_horizon(ens);
    const auto rep = mp_residual(ens, adj, sc.model, sc.objective);
    CHECK(rep.overall_rms > 0.1);
    CHECK_FALSE(rep.consistent);
    CHECK(rep.verdict() == "violated");

    SECTION("an explicit tolerance overrides the verdict threshold") {
        ResidualOptions loose;
        loose.tolerance = 1e9;
        const auto r2 = mp_residual(ens, adj, sc.model, sc.objective, loose);
        CHECK(r2.tolerance == 1e9);
        CHECK(r2.consistent);
    }

    SECTION("the automatic tolerance floors at 1e-2") {
        CHECK(rep.tolerance >= 1e-2);
        CHECK(rep.tolerance ==
              std::max(1e-2, 5.0 * rep.pooled_std_error));
    }
}

TEST_CASE("duality gap vanishes identically for a zero direction",
          "[maximum_principle]") {
    auto sc = build_scenario(ScenarioId::market, ScenarioParams{});
    const auto run = make_candidate_run(sc, TimeGrid(1.0, 20), 200, 3);
    const auto res = duality_check(run.ens, run.adjoint, sc.model, sc.objective,
                                   ControlSpec::constant(0.0));
    CHECK(res.lhs == 0.0);
    CHECK(res.rhs == 0.0);
    CHECK(res.gap == 0.0);
}

TEST_CASE("duality is trivially exact at the zero-control candidate",
          "[maximum_principle]") {
    const auto sc = build_scenario(ScenarioId::zero_control, ScenarioParams{});
    const auto run = make_candidate_run(sc, TimeGrid(1.0, 50), 1000, 7);
    const auto res = duality_check(run.ens, run.adjoint, sc.model, sc.objective,
                                   duality_const_direction(sc, 0.1));
    // The candidate adjoint is identically zero and the running reward has
    // no state dependence, so both sides are exactly zero.
    CHECK(res.lhs == 0.0);
    CHECK(res.rhs == 0.0);
    CHECK(res.gap == 0.0);
}

TEST_CASE("duality holds on the market candidate within noise",
          "[maximum_principle]") {
    auto sc = build_scenario(ScenarioId::market, ScenarioParams{});
    const auto run = make_candidate_run(sc, TimeGrid(1.0, 100), 4000, 7);
    const auto res = duality_check(run.ens, run.adjoint, sc.model, sc.objective,
                                   duality_const_direction(sc, 0.1));
    INFO("lhs=" << res.lhs << " rhs=" << res.rhs << " gap=" << res.gap
                << " se=" << res.gap_std_error);
    CHECK(res.gap <= 3.0 * res.gap_std_error + 2e-3);
    CHECK(res.lhs != 0.0);  // a non-degenerate test
}

TEST_CASE("directional derivative: finite differences meet the "
          "first-variation formula",
          "[maximum_principle]") {
    const auto sc = build_scenario(ScenarioId::consumption, ScenarioParams{});
    const TimeGrid grid(1.0, 50);
    // A deliberately non-optimal base control, so the derivative is far
    // from zero and the comparison is informative.
    const auto ens = simulate_state(sc.model, grid, ControlSpec::constant(0.5),
                                    1000, sc.params.x0, 11);
    const auto res = gateaux_derivative(ens, sc.model, sc.objective,
                                        ControlSpec::constant(0.1),
                                        sc.params.x0);
    REQUIRE(res.eps.size() == 3);
    REQUIRE(res.fd.size() == 3);
    INFO("fd=" << res.fd_extrapolated << " analytic=" << res.analytic
               << " gap=" << res.gap << " se=" << res.gap_std_error);
    CHECK(res.gap <=
          3.0 * res.gap_std_error + 5e-3 * std::abs(res.analytic) + 1e-4);

    // Common random numbers: the finite-difference estimate must be far
    // tighter than differencing two independent runs would allow.
    const auto base = evaluate_objective(ens, sc.objective);
    CHECK(res.fd_std_error < 0.05 * (base.std_error / 0.025));
}

TEST_CASE("directional derivative needs at least two step sizes",
          "[maximum_principle]") {
    const auto sc = build_scenario(ScenarioId::consumption, ScenarioParams{});
    const auto ens = simulate_state(sc.model, TimeGrid(1.0, 10),
                                    ControlSpec::constant(0.5), 100,
                                    sc.params.x0, 1);
    GateauxOptions opts;
    opts.eps = {0.1};
    CHECK_THROWS_AS(gateaux_derivative(ens, sc.model, sc.objective,
                                       ControlSpec::constant(0.1),
                                       sc.params.x0, opts),
                    ConfigError);
}
