#pragma once

#include <string>
#include <vector>

#include "evo/corrections.hpp"
#include "evo/eps_solver.hpp"
#include "evo/grid.hpp"
#include "evo/limit_solver.hpp"
#include "evo/model.hpp"

namespace evo {

// Mean trait and central moments of the phenotypic density e^{u/eps},
// normalized on the grid. Mc[k - 2] holds the k-th central moment.
struct moment_set {
    double M1 = 0.0;
    std::vector<double> Mc;
};

moment_set numeric_moments(const grid_field& u, double eps, int k_max);

// sqrt(2 pi) (2k)!/(2^k k!) M2^{k + 1/2}: the Gaussian factor that carries
// every even-moment integral of a quadratic potential.
double gaussian_gamma(int k, double M2);

// Leading moment coefficients predicted from limit + correction data:
// Mk[k - 2] scales the k-th central moment as eps^{k/2} (even k) or
// eps^{(k+1)/2} (odd k); M1 scales the mean offset from xbar as eps.
struct moment_prediction {
    double M1 = 0.0;
    std::vector<double> Mk;
};

moment_prediction asymptotic_moments(const limit_state& limit, const correction_state& corr,
                                     int k_max);

// Per-snapshot discrepancies between the numeric moments of an eps-run and
// the scaled asymptotic predictions. Requires a constant weight; the moment
// expansions do not cover weighted intakes.
struct moment_error_series {
    std::vector<double> times;
    std::vector<std::string> labels; // "moment1", "moment2", ...
    std::vector<std::vector<double>> err; // [row][time]
    std::vector<double> sup;              // per row
    // Raw per-snapshot values for export.
    std::vector<double> m1_eps;
    std::vector<std::vector<double>> mc_eps;   // [k-2][time]
    std::vector<double> m1_pred;               // xbar + eps M1
    std::vector<std::vector<double>> mc_pred;  // scaled predictions [k-2][time]
};

moment_error_series moment_errors(const eps_trajectory& eps_traj,
                                  const correction_trajectory& corr, const weight_fn& psi,
                                  double eps, int k_max);

} // namespace evo
