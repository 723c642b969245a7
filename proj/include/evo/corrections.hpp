#pragma once

#include <vector>

#include "evo/grid.hpp"
#include "evo/limit_solver.hpp"
#include "evo/model.hpp"

namespace evo {

// First-order expansion state riding on top of a limit state: the trait
// offset y, the potential correction w on the grid, the intake slope K and
// the combined intake correction J = K + I'(xbar) y.
struct correction_state {
    double t = 0.0;
    double y = 0.0;
    double K = 0.0;
    double J = 0.0;
    grid_field w;
    double w_at_xbar = 0.0;
    double dw_at_xbar = 0.0;
    double d2w_at_xbar = 0.0;
};

struct correction_trajectory {
    limit_trajectory limit;

    // Dense per-step series, time-aligned with limit.times.
    std::vector<double> times;
    std::vector<double> K;
    std::vector<double> y;
    std::vector<double> J;
    std::vector<double> w_at_xbar;
    std::vector<double> dw_at_xbar;
    std::vector<double> d2w_at_xbar;
    // |y - (-D2u(xbar))^{-1} dw(xbar)| per step; the two routes to the trait
    // offset must agree up to discretization error.
    std::vector<double> identity_gap;

    std::vector<double> snapshot_times;
    std::vector<int> snapshot_index;
    std::vector<grid_field> w_snapshots;

    double max_identity_gap = 0.0;
    // Sup over time of the disagreement between the stencil route to
    // dw(xbar) and a separately integrated gradient field. Negative when the
    // cross-check was not requested.
    double derivative_route_gap = -1.0;
};

// Intake slope of the expansion I_eps = I + eps K + I'(xbar)(x_eps - xbar),
// evaluated from limit data alone. Throws degeneracy_error when the intake
// sensitivity nearly vanishes or the potential is not concave at xbar.
double compute_K(const limit_state& limit, const growth_model& model, const weight_fn& psi);

struct yw_rates {
    double ydot = 0.0;
    grid_field wdot;
};

// Instantaneous rates of the coupled (y, w) system given the limit state it
// rides on. Uses state.K as-is so callers control the intake-slope input.
yw_rates yw_stage_rhs(const correction_state& state, const limit_state& limit,
                      const growth_model& model, const weight_fn& psi);

// One Heun step of (y, w) across [limit_now.t, limit_next.t]; the two limit
// states supply the stage fields. Refreshes K, J and the stencil samples at
// the new concentration point.
correction_state advance_yw(const correction_state& state, const limit_state& limit_now,
                            const limit_state& limit_next, double dt, const growth_model& model,
                            const weight_fn& psi);

double intake_correction_J(const correction_state& state, const limit_state& limit,
                           const growth_model& model);

// Integrates the limit system and the (y, w) corrections in one fused loop
// (the corrections need the limit fields at every stage). dt <= 0 picks the
// transport-limited step; a positive dt must divide the snapshot interval.
// derivative_check additionally integrates the gradient field of w and
// records the sup disagreement with the stencil route.
correction_trajectory run_corrections(const growth_model& model, const weight_fn& psi,
                                      const initial_data& init, const grid1d& grid, double T,
                                      double dt, int snapshots, bool derivative_check);

// First-order predictions I + eps J, xbar + eps y and, at snapshot times,
// u + eps w + eps log(r_eff/sqrt(eps)). eps = 0 reproduces the limit objects.
struct first_order_prediction {
    double eps = 0.0;
    double shift = 0.0;
    std::vector<double> times;
    std::vector<double> I;
    std::vector<double> xbar;
    std::vector<double> snapshot_times;
    std::vector<grid_field> u;
};

first_order_prediction assemble_first_order(const correction_trajectory& corr, double eps,
                                            const initial_data& init);

// Resolves the configured datum into concrete coefficients: the mass
// amplitude (given, or matched to the limit intake when r_or_auto <= 0) and
// the boundary-layer coefficient K(0)/I(0) when a well-prepared datum is
// requested.
initial_data materialize_initial_data(const growth_model& model, const weight_fn& psi, double l1,
                                      double x_c, double r_or_auto, bool well_prepared,
                                      const grid1d& grid);

} // namespace evo
