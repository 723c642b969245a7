#pragma once

#include <vector>

#include "evo/grid.hpp"
#include "evo/model.hpp"

namespace evo {

// State of the limit system: R(xbar, I) = 0, the concentration-point ODE, and
// the forced Hamilton-Jacobi flow for u, with max u pinned at 0.
struct limit_state {
    double t = 0.0;
    grid_field u;
    double xbar = 0.0;
    double I = 0.0;
    double d2u_at_xbar = 0.0;
    double d3u_at_xbar = 0.0;
};

struct limit_step {
    limit_state state;
    double drift = 0.0; // max u before renormalization, signed
};

struct limit_trajectory {
    grid1d grid;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> xbar;
    std::vector<double> I;
    std::vector<double> d2u;
    std::vector<double> d3u;
    std::vector<double> gap;   // |xbar - argmax u|
    std::vector<double> drift; // renormalization shift of the step ending here
    std::vector<double> snapshot_times;
    std::vector<int> snapshot_index;
    std::vector<limit_state> snapshots;
    double max_drift = 0.0;
    double max_gap = 0.0;
};

// Intake pinned by zero growth at the concentration point; checked against the
// carrying intake. The two-argument form computes the carrying intake itself.
double intake_from_constraint(const growth_model& model, double xbar);
double intake_from_constraint(const growth_model& model, double xbar, double carrying,
                              double tol = 1e-9);

// Concentration-point velocity (-D2u(xbar))^{-1} * dR/dx(xbar).
double canonical_rhs(const limit_state& state, const growth_model& model);

// Forced HJ right-hand side |u'|^2 + R for externally supplied growth values.
grid_field limit_hj_rhs(const grid_field& u, const std::vector<double>& R_values);

// t = 0 state built from the datum: u0 sampled and renormalized, xbar = x_c.
limit_state make_limit_state(const growth_model& model, const initial_data& init,
                             const grid1d& grid);

// One Heun step of the coupled (u, xbar) system with the intake refreshed from
// the constraint at each stage, then renormalization with the drift recorded.
limit_step advance_limit(const limit_state& state, double dt, const growth_model& model,
                         double carrying = -1.0);

// dt <= 0 selects dt = 0.05 h / max|grad u0|.
limit_trajectory run_limit(const growth_model& model, const initial_data& init,
                           const grid1d& grid, double T, double dt, int snapshots = 20);

// High-accuracy reference for the pure quadratic family: beta' = a - 4 beta^2,
// xbar' = -a (xbar - theta) / beta, I = zero-growth intake at xbar. Closed
// forms when beta starts at its fixed point sqrt(a)/2, otherwise an adaptive
// embedded 5(4) integrator at tolerance 1e-12.
struct oracle_point {
    double t = 0.0;
    double xbar = 0.0;
    double I = 0.0;
    double beta = 0.0;
};

std::vector<oracle_point> quadratic_oracle(const growth_model& model, double L1, double x_c,
                                           const std::vector<double>& times);
std::vector<oracle_point> quadratic_oracle(const growth_model& model, double L1, double x_c,
                                           double T);

} // namespace evo
