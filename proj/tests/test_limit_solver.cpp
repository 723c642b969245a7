#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "evo/errors.hpp"
#include "evo/grid.hpp"
#include "evo/limit_solver.hpp"
#include "evo/model.hpp"

using namespace evo;

namespace {

initial_data datum_at(const growth_model& m, double l1, double x_c) {
    initial_data init;
    init.l1 = l1;
    init.x_c = x_c;
    init.r = auto_amplitude(m, weight_fn{}, l1, x_c);
    return init;
}

} // namespace

TEST_CASE("constraint intake equals the zero-growth curve and respects the cap") {
    const growth_model m;
    CHECK(intake_from_constraint(m, 0.5) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(intake_from_constraint(m, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(intake_from_constraint(m, 0.5, 0.6), degeneracy_error);
}

TEST_CASE("concentration-point velocity on the quadratic family") {
    const growth_model m;
    const grid1d g = grid1d::make(-2.0, 2.0, 801);
    for (double xb : {0.5, 0.0, 0.25}) {
        const limit_state s = make_limit_state(m, datum_at(m, 0.5, xb), g);
        CHECK(s.xbar == doctest::Approx(xb).epsilon(1e-12));
        CHECK(s.d2u_at_xbar == doctest::Approx(-1.0).epsilon(1e-9));
        CHECK(canonical_rhs(s, m) == doctest::Approx(-2.0 * xb).scale(1.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(make_limit_state(m, datum_at(m, 0.5, 0.5), grid1d::make(-0.3, 0.3, 61)),
                    validation_error);
}

TEST_CASE("forced HJ rhs is exact on linear potentials") {
    const grid1d g = grid1d::make(-1.0, 1.0, 21);
    grid_field u(g);
    for (int i = 0; i < g.n; ++i) u.v[i] = 0.7 * g.x(i);
    const std::vector<double> R(g.n, 0.3);
    const grid_field rhs = limit_hj_rhs(u, R);
    for (int i = 0; i < g.n; ++i) {
        CHECK(rhs.v[i] == doctest::Approx(0.7 * 0.7 + 0.3).epsilon(1e-12));
    }
    CHECK_THROWS_AS(limit_hj_rhs(u, std::vector<double>(g.n - 1, 0.3)), validation_error);
}

TEST_CASE("stationary limit state does not move") {
    const growth_model m;
    const limit_trajectory tr =
        run_limit(m, datum_at(m, 0.5, 0.0), grid1d::make(-2.0, 2.0, 801), 0.5, 0.0, 5);
    for (size_t k = 0; k < tr.times.size(); ++k) {
        CHECK(std::abs(tr.xbar[k]) <= 1e-12);
        CHECK(std::abs(tr.I[k] - 1.0) <= 1e-12);
    }
    CHECK(tr.max_drift <= 1e-12);
}

TEST_CASE("transient relaxation matches the closed-form trajectory") {
    const growth_model m;
    const limit_trajectory tr =
        run_limit(m, datum_at(m, 0.5, 0.5), grid1d::make(-2.0, 2.0, 801), 1.0, 0.0, 10);
    CHECK(std::abs(tr.xbar.back() - 0.5 * std::exp(-2.0)) <= 1e-8);
    CHECK(std::abs(tr.I.back() - (1.0 - 0.25 * std::exp(-4.0))) <= 1e-8);
    CHECK(tr.max_gap <= 1e-10);
    CHECK(tr.max_drift <= 1e-12);

    CHECK(tr.snapshot_times.size() == 11);
    CHECK(tr.snapshot_times.front() == 0.0);
    CHECK(tr.snapshot_times.back() == doctest::Approx(1.0).epsilon(1e-14));
    for (size_t k = 0; k < tr.snapshot_times.size(); ++k) {
        CHECK(tr.snapshots[k].t == doctest::Approx(tr.snapshot_times[k]).scale(1.0).epsilon(1e-12));
        CHECK(tr.times[tr.snapshot_index[k]] ==
              doctest::Approx(tr.snapshot_times[k]).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("oracle closed form holds at the fixed-point curvature") {
    const growth_model m;
    const std::vector<oracle_point> pts =
        quadratic_oracle(m, 0.5, 0.5, std::vector<double>{0.0, 0.3, 1.0});
    CHECK(pts[1].xbar == doctest::Approx(0.5 * std::exp(-0.6)).epsilon(1e-13));
    CHECK(pts[1].I == doctest::Approx(1.0 - 0.25 * std::exp(-1.2)).epsilon(1e-13));
    CHECK(pts[1].beta == 0.5);
    CHECK(pts[2].xbar == doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-13));
}

TEST_CASE("oracle curvature follows the Riccati flow away from the fixed point") {
    const growth_model m;
    const double acoth2 = 0.5 * std::log(3.0);
    const std::vector<oracle_point> pts =
        quadratic_oracle(m, 1.0, 0.5, std::vector<double>{0.0, 0.3, 1.0, 10.0});
    for (const oracle_point& p : pts) {
        const double beta_exact = 0.5 / std::tanh(2.0 * p.t + acoth2);
        CHECK(p.beta == doctest::Approx(beta_exact).epsilon(1e-10));
    }
    CHECK(std::abs(pts.back().beta - 0.5) <= 1e-8);
}

TEST_CASE("limit run agrees with the oracle off the fixed-point branch") {
    const growth_model m;
    const limit_trajectory tr =
        run_limit(m, datum_at(m, 1.0, 0.5), grid1d::make(-2.0, 2.0, 1601), 1.0, 0.0, 10);
    const std::vector<oracle_point> pts = quadratic_oracle(m, 1.0, 0.5, tr.snapshot_times);
    for (size_t k = 0; k < pts.size(); ++k) {
        CHECK(std::abs(tr.xbar[tr.snapshot_index[k]] - pts[k].xbar) <= 1e-8);
        CHECK(std::abs(tr.I[tr.snapshot_index[k]] - pts[k].I) <= 1e-8);
    }
}

TEST_CASE("oracle refuses non-quadratic growth and bad inputs") {
    growth_model bumped;
    bumped.bump_amp = 0.08;
    CHECK_THROWS_AS(quadratic_oracle(bumped, 0.5, 0.5, 1.0), validation_error);
    CHECK_THROWS_AS(quadratic_oracle(growth_model{}, 0.0, 0.5, 1.0), validation_error);
    CHECK_THROWS_AS(
        quadratic_oracle(growth_model{}, 1.0, 0.5, std::vector<double>{0.5, 0.2}),
        validation_error);
}

TEST_CASE("fixed limit steps must divide the interval and obey the transport bound") {
    const growth_model m;
    const initial_data init = datum_at(m, 0.5, 0.5);
    const grid1d g = grid1d::make(-2.0, 2.0, 801);
    CHECK_THROWS_AS(run_limit(m, init, g, 1.0, 0.3, 20), validation_error);
    CHECK_THROWS_AS(run_limit(m, init, g, 1.0, 2.5e-3, 20), validation_error);
    const limit_trajectory tr = run_limit(m, init, g, 1.0, 2.5e-4, 20);
    CHECK(std::abs(tr.xbar.back() - 0.5 * std::exp(-2.0)) <= 1e-7);

    CHECK_THROWS_AS(run_limit(m, init, g, -1.0, 0.0, 20), validation_error);
    limit_state s = make_limit_state(m, init, g);
    CHECK_THROWS_AS(advance_limit(s, 0.0, m), validation_error);
}
