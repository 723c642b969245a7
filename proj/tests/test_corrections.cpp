#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "evo/corrections.hpp"
#include "evo/errors.hpp"
#include "evo/grid.hpp"
#include "evo/limit_solver.hpp"
#include "evo/model.hpp"

using namespace evo;

namespace {

growth_model perturbed_model() {
    growth_model m;
    m.bump_amp = 0.08;
    m.bump_center = 0.25;
    m.bump_width = 0.35;
    return m;
}

limit_state quadratic_state(const growth_model& m, double xbar, const grid1d& g) {
    limit_state s;
    s.u = grid_field(g);
    for (int i = 0; i < g.n; ++i) {
        const double d = g.x(i) - xbar;
        s.u.v[i] = -0.5 * d * d;
    }
    s.xbar = xbar;
    s.I = optimal_intake(m, xbar).I;
    s.d2u_at_xbar = -1.0;
    s.d3u_at_xbar = 0.0;
    return s;
}

} // namespace

TEST_CASE("intake slope at the stationary and relaxing states") {
    const growth_model m;
    const weight_fn psi;
    const grid1d g = grid1d::make(-2.0, 2.0, 801);
    CHECK(compute_K(quadratic_state(m, 0.0, g), m, psi) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(compute_K(quadratic_state(m, 0.5, g), m, psi) ==
          doctest::Approx(-7.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("intake slope with the bump forcing, by formula and by stencils") {
    const growth_model m = perturbed_model();
    const weight_fn psi;
    const grid1d g = grid1d::make(-2.0, 2.0, 801);
    CHECK(compute_K(quadratic_state(m, 0.5, g), m, psi) ==
          doctest::Approx(-2.686769331743).epsilon(1e-9));

    const initial_data init = materialize_initial_data(m, psi, 0.5, 0.5, 0.0, true, g);
    const limit_state s = make_limit_state(m, init, g);
    CHECK(compute_K(s, m, psi) == doctest::Approx(-2.686769331743).epsilon(1e-8));
}

TEST_CASE("intake slope vanishes without selection pressure") {
    growth_model flat;
    flat.a = 0.0;
    const grid1d g = grid1d::make(-2.0, 2.0, 201);
    limit_state s = quadratic_state(growth_model{}, 0.0, g);
    s.I = flat.r0 / flat.b;
    CHECK(compute_K(s, flat, weight_fn{}) == 0.0);
}

TEST_CASE("intake slope guards against degenerate states") {
    const growth_model m;
    const weight_fn psi;
    const grid1d g = grid1d::make(-2.0, 2.0, 201);

    limit_state convex = quadratic_state(m, 0.0, g);
    convex.d2u_at_xbar = 1.0;
    CHECK_THROWS_AS(compute_K(convex, m, psi), degeneracy_error);

    limit_state drained = quadratic_state(m, 0.0, g);
    drained.I = 0.0;
    CHECK_THROWS_AS(compute_K(drained, m, psi), degeneracy_error);

    growth_model insensitive;
    insensitive.b = 0.0;
    CHECK_THROWS_AS(compute_K(quadratic_state(m, 0.0, g), insensitive, psi), degeneracy_error);
}

TEST_CASE("correction rates vanish identically on an unforced flat profile") {
    const growth_model m;
    const weight_fn psi;
    const grid1d g = grid1d::make(-2.0, 2.0, 201);

    limit_state lim;
    lim.u = grid_field(g);
    for (int i = 0; i < g.n; ++i) lim.u.v[i] = 0.1 * g.x(i) - 0.2;
    lim.xbar = 0.0;
    lim.I = 1.0;
    lim.d2u_at_xbar = -1.0;
    lim.d3u_at_xbar = 0.0;

    correction_state state;
    state.w = grid_field(g);
    state.y = 0.0;
    state.K = 0.0;

    const yw_rates r = yw_stage_rhs(state, lim, m, psi);
    CHECK(r.ydot == 0.0);
    for (int i = 0; i < g.n; ++i) CHECK(std::abs(r.wdot.v[i]) <= 1e-12);
}

TEST_CASE("one correction step at the stationary point stays exactly zero") {
    const growth_model m;
    const weight_fn psi;
    const grid1d g = grid1d::make(-2.0, 2.0, 401);
    initial_data init;
    init.l1 = 0.5;
    init.x_c = 0.0;
    init.r = auto_amplitude(m, psi, 0.5, 0.0);

    const limit_state now = make_limit_state(m, init, g);
    limit_state next = now;
    next.t = 1e-3;

    correction_state state;
    state.w = grid_field(g);
    const correction_state stepped = advance_yw(state, now, next, 1e-3, m, psi);
    CHECK(std::abs(stepped.y) <= 1e-13);
    CHECK(stepped.K == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(stepped.J == doctest::Approx(-1.0).epsilon(1e-9));
    for (int i = 0; i < g.n; ++i) CHECK(stepped.w.v[i] == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));

    CHECK(intake_correction_J(stepped, next, m) == doctest::Approx(stepped.K).epsilon(1e-12));

    CHECK_THROWS_AS(advance_yw(state, now, next, 0.0, m, psi), validation_error);
    correction_state late = state;
    late.t = 0.5;
    CHECK_THROWS_AS(advance_yw(late, now, next, 1e-3, m, psi), validation_error);
    correction_state off_grid;
    off_grid.w = grid_field(grid1d::make(-1.0, 1.0, 401));
    CHECK_THROWS_AS(yw_stage_rhs(off_grid, now, m, psi), validation_error);
}

TEST_CASE("stationary corrections cancel along the whole run") {
    const growth_model m;
    const weight_fn psi;
    const grid1d g = grid1d::make(-2.0, 2.0, 801);
    const initial_data init = materialize_initial_data(m, psi, 0.5, 0.0, 0.0, true, g);
    const correction_trajectory corr = run_corrections(m, psi, init, g, 1.0, 0.0, 10, false);
    double sup_y = 0.0, sup_w = 0.0;
    for (size_t k = 0; k < corr.y.size(); ++k) {
        sup_y = std::max(sup_y, std::abs(corr.y[k]));
        sup_w = std::max(sup_w, std::abs(corr.w_at_xbar[k]));
        CHECK(corr.K[k] == doctest::Approx(-1.0).epsilon(1e-9));
    }
    CHECK(sup_y <= 1e-10);
    CHECK(sup_w <= 1e-10);
    CHECK(corr.max_identity_gap <= 1e-10);
}

TEST_CASE("relaxing run: smooth correction fields and matching derivative routes") {
    const growth_model m;
    const weight_fn psi;
    const grid1d g = grid1d::make(-2.0, 2.0, 401);
    const initial_data init = materialize_initial_data(m, psi, 0.5, 0.5, 0.0, true, g);
    const correction_trajectory corr = run_corrections(m, psi, init, g, 1.0, 0.0, 10, true);
    CHECK(corr.K.front() == doctest::Approx(-7.0 / 3.0).epsilon(1e-9));
    CHECK(corr.max_identity_gap <= 1e-7);
    CHECK(corr.derivative_route_gap >= 0.0);
    CHECK(corr.derivative_route_gap <= 1e-8);

    const correction_trajectory plain = run_corrections(m, psi, init, g, 1.0, 0.0, 10, false);
    CHECK(plain.derivative_route_gap < 0.0);
}

TEST_CASE("potential correction stays spatially quadratic on the quadratic family") {
    const growth_model m;
    const weight_fn psi;
    const grid1d g = grid1d::make(-2.0, 2.0, 201);
    const initial_data init = materialize_initial_data(m, psi, 0.5, 0.5, 0.0, true, g);
    const correction_trajectory corr = run_corrections(m, psi, init, g, 1.0, 0.0, 10, false);
    double sup_d3w = 0.0;
    for (size_t k = 0; k < corr.w_snapshots.size(); ++k) {
        const double xb = corr.limit.snapshots[k].xbar;
        sup_d3w = std::max(sup_d3w, std::abs(derivative_at(corr.w_snapshots[k], xb, 3)));
    }
    CHECK(sup_d3w <= 1e-6);
}

TEST_CASE("bump run drives a genuine trait offset with consistent routes") {
    const growth_model m = perturbed_model();
    const weight_fn psi;
    const grid1d g = grid1d::make(-2.0, 2.0, 801);
    const initial_data init = materialize_initial_data(m, psi, 0.5, 0.5, 0.0, true, g);
    const correction_trajectory corr = run_corrections(m, psi, init, g, 1.0, 0.0, 10, false);
    CHECK(corr.K.front() == doctest::Approx(-2.686769331743).epsilon(1e-8));
    CHECK(std::abs(corr.y.back()) >= 0.05);
    CHECK(corr.max_identity_gap <= 5e-5);
    CHECK(corr.J.back() ==
          doctest::Approx(corr.K.back() + optimal_intake(m, corr.limit.xbar.back()).dI *
                                              corr.y.back()).epsilon(1e-10));
}

TEST_CASE("fused stepping is second order in time") {
    const growth_model m;
    const weight_fn psi;
    const grid1d g = grid1d::make(-2.0, 2.0, 401);
    const initial_data init = materialize_initial_data(m, psi, 0.5, 0.5, 0.0, true, g);
    std::vector<double> x_T;
    for (double dt : {5e-4, 2.5e-4, 1.25e-4}) {
        const correction_trajectory corr = run_corrections(m, psi, init, g, 1.0, dt, 10, false);
        x_T.push_back(corr.limit.xbar.back());
    }
    const double ratio = std::abs(x_T[0] - x_T[1]) / std::abs(x_T[1] - x_T[2]);
    CHECK(ratio >= 3.4);
    CHECK(ratio <= 4.6);
}

TEST_CASE("correction run validates its inputs") {
    const growth_model m;
    const weight_fn psi;
    const grid1d g = grid1d::make(-2.0, 2.0, 401);
    const initial_data init = materialize_initial_data(m, psi, 0.5, 0.5, 0.0, true, g);
    CHECK_THROWS_AS(run_corrections(m, psi, init, g, -1.0, 0.0, 10, false), validation_error);
    CHECK_THROWS_AS(run_corrections(m, psi, init, g, 1.0, 0.0, 0, false), validation_error);
    CHECK_THROWS_AS(run_corrections(m, psi, init, g, 1.0, 3e-3, 10, false), validation_error);
    CHECK_THROWS_AS(run_corrections(m, psi, init, g, 1.0, 3e-4, 10, false), validation_error);
}

TEST_CASE("materialized datum: amplitude matching and the boundary layer") {
    const weight_fn psi;
    const grid1d g = grid1d::make(-2.0, 2.0, 801);

    const growth_model quad;
    const initial_data ti = materialize_initial_data(quad, psi, 0.5, 0.5, 0.0, true, g);
    CHECK(ti.r == doctest::Approx(0.75 * std::sqrt(0.5 / M_PI)).epsilon(1e-12));
    CHECK(ti.layer_coeff == doctest::Approx(-28.0 / 9.0).epsilon(1e-8));

    const growth_model m = perturbed_model();
    const initial_data pi = materialize_initial_data(m, psi, 0.5, 0.5, 0.0, true, g);
    CHECK(pi.r == doctest::Approx(0.3239359432).epsilon(1e-8));
    CHECK(pi.layer_coeff == doctest::Approx(-3.3088822244).epsilon(1e-7));

    const initial_data cold = materialize_initial_data(m, psi, 0.5, 0.5, 0.0, false, g);
    CHECK(cold.layer_coeff == 0.0);
    const initial_data pinned = materialize_initial_data(m, psi, 0.5, 0.5, 0.7, false, g);
    CHECK(pinned.r == 0.7);
}

TEST_CASE("first-order assembly reproduces the expansion at snapshot times") {
    const weight_fn psi;
    const grid1d g = grid1d::make(-2.0, 2.0, 801);

    const growth_model quad;
    const initial_data ti = materialize_initial_data(quad, psi, 0.5, 0.5, 0.0, true, g);
    const correction_trajectory tc = run_corrections(quad, psi, ti, g, 1.0, 0.0, 10, false);
    const first_order_prediction pt = assemble_first_order(tc, 0.04, ti);
    CHECK(pt.I.front() == doctest::Approx(0.75 - 0.04 * 7.0 / 3.0).epsilon(1e-8));
    CHECK(pt.xbar.front() == doctest::Approx(0.5).epsilon(1e-10));

    const first_order_prediction p0 = assemble_first_order(tc, 0.0, ti);
    CHECK(p0.shift == 0.0);
    for (size_t k = 0; k < p0.times.size(); ++k) {
        CHECK(p0.I[k] == tc.limit.I[k]);
        CHECK(p0.xbar[k] == tc.limit.xbar[k]);
    }

    const growth_model m;
    const initial_data si = materialize_initial_data(m, psi, 0.5, 0.0, 0.0, true, g);
    const correction_trajectory sc = run_corrections(m, psi, si, g, 1.0, 0.0, 10, false);
    const double eps = 0.05;
    const first_order_prediction ps = assemble_first_order(sc, eps, si);
    for (double I : ps.I) CHECK(I == doctest::Approx(0.95).epsilon(1e-9));
    const double shift = eps * std::log(si.r_effective(eps) / std::sqrt(eps));
    CHECK(ps.shift == doctest::Approx(shift).epsilon(1e-12));
    CHECK(ps.u.front().v[400] == doctest::Approx(shift).scale(1.0).epsilon(1e-9));

    CHECK_THROWS_AS(assemble_first_order(sc, -0.1, si), validation_error);
}
