#pragma once

#include <string>
#include <vector>

#include "evo/config.hpp"
#include "evo/corrections.hpp"
#include "evo/eps_solver.hpp"
#include "evo/model.hpp"

namespace evo {

// Sup-over-snapshot-time discrepancies between an eps-run and the limit +
// correction predictions it should track. Rows, in order:
//   intake0      |I_eps - I|
//   intake1      |I_eps - I - eps J|
//   trait0       |x_eps - xbar|
//   trait1       |x_eps - xbar - eps y|
//   potential0   window sup |u_eps - u - eps log(r_eff/sqrt(eps))|
//   potential2   same minus eps w, worst of value/gradient/curvature sups
//   constraint0  |I_eps - I(x_eps)|
//   constraint1  |I_eps - I(x_eps) - eps K|
//   moment1..moment{k_max}  (only when the weight is constant)
struct error_norms_result {
    std::vector<std::string> labels;
    std::vector<double> errors;
};

error_norms_result error_norms(const eps_trajectory& eps_traj,
                               const correction_trajectory& corr, const growth_model& model,
                               const weight_fn& psi, const initial_data& init, double eps,
                               double trust_window, int k_max);

struct fit_result {
    double order = 0.0;
    double intercept = 0.0; // log-log intercept: log(err) at log(eps) = 0
    double r2 = 0.0;
    int n_used = 0;
    bool floor_flag = false; // slope too flat to be a rate
    bool no_fit = false;     // fewer than 3 usable points
};

// Least-squares slope of log(err) against log(eps). Nonpositive errors are
// excluded from the fit.
fit_result fit_order(const std::vector<double>& eps, const std::vector<double>& errs);

struct sweep_row {
    std::string quantity;
    double eps = 0.0;
    double h = 0.0;
    double error = 0.0;
    double error_refined = -1.0; // error at h/2, < 0 when the refine pass is off
    bool floor_flag = false;     // > 25% change between h and h/2
};

struct sweep_summary {
    std::string quantity;
    fit_result fit;
};

struct bounds_totals {
    long long positivity_violations = 0;
    long long intake_violations = 0;
    long long concavity_violations = 0;
    double intake_min = 0.0;
    double intake_max = 0.0;
    double intake_cap = 0.0;
    double d2_min = 0.0;
    double d2_max = 0.0;
    double d2_band_lo = 0.0;
    double d2_band_hi = 0.0;
};

struct convergence_report {
    std::string config_hash;
    double trust_window = 1.0;
    std::vector<sweep_row> rows;
    std::vector<sweep_summary> summaries;
    std::vector<bounds_report> run_bounds; // per eps, base resolution
    bounds_totals bounds;
    std::vector<std::string> failures; // per-eps failures; the sweep continues past them
    correction_trajectory corr;
    double wall_seconds = 0.0; // reported on stdout only, never serialized
};

// Full sweep: one limit + correction run on the refined grid, one eps-run per
// sweep.eps_list entry (each repeated at h/2 when refine_check is on), error
// norms, floor flags, and per-quantity order fits. eps-runs execute
// concurrently; results merge in eps_list order.
convergence_report run_sweep(const run_config& cfg);

} // namespace evo
