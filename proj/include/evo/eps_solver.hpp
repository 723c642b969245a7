#pragma once

#include <vector>

#include "evo/grid.hpp"
#include "evo/model.hpp"

namespace evo {

struct eps_config {
    double eps = 0.05;
    double T = 1.0;
    double dt = 0.0; // <= 0 selects the stability-rule step per snapshot interval
    int snapshots = 20;
    grid1d grid;
    bool llf = false;
};

// Scaled potential trajectory. Dense series are recorded every step; field
// snapshots at the (snapshots + 1) evenly spaced times k * T / snapshots.
struct eps_trajectory {
    eps_config cfg;
    std::vector<double> times;
    std::vector<double> I_series;
    std::vector<double> x_series;
    std::vector<double> max_u_series;
    std::vector<double> d2_at_max_series;
    std::vector<double> snapshot_times;
    std::vector<int> snapshot_index; // positions of the snapshots in the dense series
    std::vector<grid_field> u_snapshots;
};

struct bounds_report {
    double window = 0.0;
    double intake_min = 0.0;
    double intake_max = 0.0;
    double intake_cap = 0.0; // carrying intake + 0.01
    int positivity_violations = 0;
    int intake_violations = 0;
    double d2_min = 0.0; // over snapshot times, restricted to the window
    double d2_max = 0.0;
    double d2_band_lo = 0.0; // -2 m_lower - 0.05
    double d2_band_hi = 0.0; // -2 m_upper + 0.05
    int concavity_violations = 0;
    double envelope_margin_lower = 0.0; // min over window of u - (lower envelope); >= 0 is clean
    double envelope_margin_upper = 0.0; // min over window of (upper envelope) - u
    double d3_sup = 0.0;
    bool pass = false;
};

// u0 sampled on the grid plus the eps log(r_eff / sqrt(eps)) offset carried
// inside the potential itself.
grid_field initial_potential(const initial_data& init, double eps, const grid1d& grid);

// Total weighted mass exp(logsumexp); requires the discrete maximum interior.
double compute_intake(const grid_field& u, const weight_fn& psi, double eps);

// RHS of the scaled equation for a frozen intake value: eps * u'' + (u')^2 + R(x, I).
grid_field eps_stage_rhs(const grid_field& u, double eps, double I,
                         const growth_model& model, bool llf = false);

// One Heun step, intake recomputed from each stage's field.
grid_field advance_eps(const grid_field& u, double t, const eps_config& cfg,
                       const growth_model& model, const weight_fn& psi);

eps_trajectory run_eps(const eps_config& cfg, const growth_model& model,
                       const weight_fn& psi, const initial_data& init);

// Per-snapshot verification of the concavity band and quadratic envelope on a
// window around the concentration point, plus dense intake bounds.
bounds_report check_bounds(const eps_trajectory& traj, const growth_model& model,
                           const initial_data& init, double window = 1.0);

} // namespace evo
