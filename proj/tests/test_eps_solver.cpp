#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "evo/eps_solver.hpp"
#include "evo/errors.hpp"
#include "evo/grid.hpp"
#include "evo/model.hpp"

using namespace evo;

namespace {

initial_data stationary_datum() {
    initial_data init;
    init.l1 = 0.5;
    init.x_c = 0.0;
    init.r = 1.0 / std::sqrt(2.0 * M_PI);
    init.layer_coeff = -1.0;
    return init;
}

grid_field gaussian_potential(const grid1d& g, double offset = 0.0) {
    grid_field u(g);
    for (int i = 0; i < g.n; ++i) u.v[i] = -0.5 * g.x(i) * g.x(i) + offset;
    return u;
}

} // namespace

TEST_CASE("well-prepared stationary datum is a discrete steady state") {
    eps_config cfg;
    cfg.eps = 0.05;
    cfg.T = 0.2;
    cfg.snapshots = 4;
    cfg.grid = grid1d::make(-6.0, 6.0, 1201);
    const eps_trajectory traj = run_eps(cfg, growth_model{}, weight_fn{}, stationary_datum());
    double sup_i = 0.0, sup_x = 0.0;
    for (size_t k = 0; k < traj.times.size(); ++k) {
        sup_i = std::max(sup_i, std::abs(traj.I_series[k] - 0.95));
        sup_x = std::max(sup_x, std::abs(traj.x_series[k]));
    }
    CHECK(sup_i <= 1e-12);
    CHECK(sup_x <= 1e-12);
}

TEST_CASE("intake of a Gaussian potential matches the closed-form integrals") {
    const double eps = 0.04;
    const grid1d g = grid1d::make(-6.0, 6.0, 2401);
    const grid_field u = gaussian_potential(g);

    const weight_fn flat;
    CHECK(compute_intake(u, flat, eps) ==
          doctest::Approx(std::sqrt(2.0 * M_PI * eps)).epsilon(1e-10));

    const grid_field scaled =
        gaussian_potential(g, eps * std::log(0.95 / std::sqrt(2.0 * M_PI * eps)));
    CHECK(compute_intake(scaled, flat, eps) == doctest::Approx(0.95).epsilon(1e-12));

    weight_fn bumped;
    bumped.kind = weight_fn::kind_t::bump;
    bumped.amp = 1.0;
    bumped.center = 0.0;
    bumped.width = 1.0;
    const double exact = std::sqrt(2.0 * M_PI * eps) * (1.0 + 1.0 / std::sqrt(1.0 + eps));
    CHECK(compute_intake(u, bumped, eps) == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("intake refuses a potential maximized on the domain edge") {
    const grid1d g = grid1d::make(0.0, 1.0, 101);
    grid_field u(g);
    for (int i = 0; i < g.n; ++i) u.v[i] = g.x(i);
    CHECK_THROWS_AS(compute_intake(u, weight_fn{}, 0.05), boundary_contact_error);
}

TEST_CASE("stage rhs reproduces the scaled operator on quadratics") {
    const double eps = 0.03;
    const double I = 0.7;
    const growth_model m;
    const grid1d g = grid1d::make(-3.0, 3.0, 301);
    grid_field u(g);
    for (int i = 0; i < g.n; ++i) u.v[i] = -0.5 * g.x(i) * g.x(i) + 0.3 * g.x(i);
    const grid_field rhs = eps_stage_rhs(u, eps, I, m);
    for (int i = 0; i < g.n; ++i) {
        const double grad = -g.x(i) + 0.3;
        const double expected = -eps + grad * grad + m.R(g.x(i), I);
        CHECK(rhs.v[i] == doctest::Approx(expected).scale(1.0).epsilon(1e-11));
    }
}

TEST_CASE("initial potential carries the boundary-layer amplitude") {
    initial_data init = stationary_datum();
    const double eps = 0.05;
    const grid1d g = grid1d::make(-2.0, 2.0, 401);
    const grid_field u = initial_potential(init, eps, g);
    const double shift = eps * std::log(init.r * (1.0 - eps) / std::sqrt(eps));
    CHECK(u.v[200] == doctest::Approx(shift).epsilon(1e-13));
    CHECK(u.v[0] == doctest::Approx(init.u0(-2.0) + shift).epsilon(1e-13));
    CHECK_THROWS_AS(initial_potential(init, 0.0, g), validation_error);
}

TEST_CASE("bump forcing converges at second order in the mesh") {
    growth_model m;
    m.bump_amp = 0.08;
    m.bump_center = 0.25;
    m.bump_width = 0.35;
    const weight_fn psi;
    initial_data init;
    init.l1 = 0.5;
    init.x_c = 0.5;
    init.r = auto_amplitude(m, psi, 0.5, 0.5);
    std::vector<double> I_T;
    for (int n : {401, 801, 1601}) {
        eps_config cfg;
        cfg.eps = 0.05;
        cfg.T = 0.5;
        cfg.dt = 2e-5;
        cfg.snapshots = 2;
        cfg.grid = grid1d::make(-4.0, 4.0, n);
        I_T.push_back(run_eps(cfg, m, psi, init).I_series.back());
    }
    const double ratio = std::abs(I_T[0] - I_T[1]) / std::abs(I_T[1] - I_T[2]);
    CHECK(ratio >= 3.4);
    CHECK(ratio <= 4.6);
}

TEST_CASE("time steps above the stability limit are refused") {
    eps_config cfg;
    cfg.eps = 0.05;
    cfg.T = 1.0;
    cfg.dt = 0.25;
    cfg.snapshots = 2;
    cfg.grid = grid1d::make(-6.0, 6.0, 1201);
    CHECK_THROWS_AS(run_eps(cfg, growth_model{}, weight_fn{}, stationary_datum()),
                    validation_error);

    const grid_field u = initial_potential(stationary_datum(), cfg.eps, cfg.grid);
    CHECK_THROWS_AS(advance_eps(u, 0.0, cfg, growth_model{}, weight_fn{}), validation_error);
    cfg.dt = 0.0;
    CHECK_THROWS_AS(advance_eps(u, 0.0, cfg, growth_model{}, weight_fn{}), validation_error);
}

TEST_CASE("fixed steps must divide the snapshot interval") {
    eps_config cfg;
    cfg.eps = 0.05;
    cfg.T = 1.0;
    cfg.dt = 3e-4;
    cfg.snapshots = 20;
    cfg.grid = grid1d::make(-6.0, 6.0, 1201);
    CHECK_THROWS_AS(run_eps(cfg, growth_model{}, weight_fn{}, stationary_datum()),
                    validation_error);
}

TEST_CASE("a domain too narrow for the mass is boundary contact") {
    eps_config cfg;
    cfg.eps = 0.05;
    cfg.T = 1.0;
    cfg.snapshots = 2;
    cfg.grid = grid1d::make(-1.0, 1.0, 401);
    CHECK_THROWS_AS(run_eps(cfg, growth_model{}, weight_fn{}, stationary_datum()),
                    boundary_contact_error);
}

TEST_CASE("bounds report is clean on a resolved transient run") {
    const growth_model m;
    const weight_fn psi;
    initial_data init;
    init.l1 = 0.5;
    init.x_c = 0.5;
    init.r = auto_amplitude(m, psi, 0.5, 0.5);
    eps_config cfg;
    cfg.eps = 0.04;
    cfg.T = 1.0;
    cfg.snapshots = 20;
    cfg.grid = grid1d::make(-4.0, 4.0, 1601);
    const eps_trajectory traj = run_eps(cfg, m, psi, init);
    const bounds_report rep = check_bounds(traj, m, init, 1.0);
    CHECK(rep.pass);
    CHECK(rep.positivity_violations == 0);
    CHECK(rep.intake_violations == 0);
    CHECK(rep.concavity_violations == 0);
    CHECK(rep.intake_cap == doctest::Approx(1.01).epsilon(1e-6));
    CHECK(rep.intake_min > 0.0);
    CHECK(rep.intake_max <= rep.intake_cap);
    CHECK(rep.d2_min >= rep.d2_band_lo);
    CHECK(rep.d2_max <= rep.d2_band_hi);
    CHECK(rep.envelope_margin_lower >= -1e-12);
    CHECK(rep.envelope_margin_upper >= -1e-12);
}
