#pragma once

#include <string>
#include <vector>

#include "evo/errors.hpp"
#include "evo/grid.hpp"

namespace evo {

// Growth rate R(x, I) = r0 - a (x - theta)^2 + p(x) - b I where p is an
// optional Gaussian bump p(x) = bump_amp * exp(-(x - bump_center)^2 / (2 w^2)).
struct growth_model {
    double r0 = 1.0;
    double a = 1.0;
    double b = 1.0;
    double theta = 0.0;
    double bump_amp = 0.0;
    double bump_center = 0.25;
    double bump_width = 0.35;

    double p(double x) const;
    double dp(double x) const;
    double d2p(double x) const;
    double d3p(double x) const;

    double R(double x, double I) const { return r0 - a * (x - theta) * (x - theta) + p(x) - b * I; }
    double Rx(double x) const { return -2.0 * a * (x - theta) + dp(x); }
    double Rxx(double x) const { return -2.0 * a + d2p(x); }
    double Rxxx(double x) const { return d3p(x); }
    double RI() const { return -b; }
    double RxI() const { return 0.0; }

    void validate() const;
};

// Sampling weight. Either identically 1 or 1 + amp * exp(-(x-c)^2 / (2 w^2)).
struct weight_fn {
    enum class kind_t { constant, bump };
    kind_t kind = kind_t::constant;
    double amp = 0.0;
    double center = 0.0;
    double width = 1.0;

    double value(double x) const;
    double d(double x) const;
    double d2(double x) const;
    bool is_constant() const { return kind == kind_t::constant || amp == 0.0; }

    void validate() const;
};

struct intake_solution {
    double I = 0.0;
    double dI = 0.0; // d/dy of the zero-growth intake
};

// The unique I >= 0 with R(y, I) = 0, found by bracketing + secant iteration.
// Throws degeneracy_error when no nonnegative solution exists (R(y, 0) < 0).
intake_solution optimal_intake(const growth_model& model, double y, double root_tol = 1e-12);

// The largest intake any trait can sustain: the I* with max_x R(x, I*) = 0.
// Outer bisection over I, inner scan + golden-section maximization over x.
double carrying_intake(const growth_model& model, double y_lo, double y_hi,
                       double root_tol = 1e-12);
double carrying_intake(const growth_model& model, double root_tol = 1e-12);

// Concentrated initial datum: u0(x) = -l1 (x - x_c)^2 and amplitude
// r_eff(eps) = r (1 + eps * layer_coeff) multiplying exp(u0/eps)/sqrt(eps).
struct initial_data {
    double l1 = 0.5;
    double x_c = 0.0;
    double r = 0.0;
    double layer_coeff = 0.0;

    double u0(double x) const { return -l1 * (x - x_c) * (x - x_c); }
    double r_effective(double eps) const { return r * (1.0 + eps * layer_coeff); }
};

// Amplitude that makes the concentration mass satisfy R(x_c, I) = 0 as eps -> 0.
double auto_amplitude(const growth_model& model, const weight_fn& psi, double l1, double x_c);

// Curvature bounds harvested from the model and datum; the potential of any
// admissible run must stay inside -m_lower * (x - x_c)^2 <= u <= -m_upper * (x - x_c)^2
// up to the running maximum, and its second derivative inside [-2 m_lower, -2 m_upper].
struct envelope_constants {
    double k_lower = 0.0; // -R_xx / 2 at its largest over the grid
    double k_upper = 0.0; // -R_xx / 2 at its smallest over the grid
    double m_lower = 0.0;
    double m_upper = 0.0;
};

envelope_constants compute_envelope(const growth_model& model, const initial_data& init,
                                    const grid1d& grid);

struct assumption_check {
    std::string id;
    std::string constant_name;
    double value = 0.0;
    bool pass = false;
};

// Checks the standing hypotheses on (model, psi, datum) over the given grid:
// weight positivity, uniform growth concavity, intake sensitivity, existence of
// a carrying intake, datum envelope / normalization / regularity, nonnegative
// survival margin for each eps, and concentration consistency of the datum.
std::vector<assumption_check> validate_assumptions(const growth_model& model,
                                                   const weight_fn& psi,
                                                   const initial_data& init,
                                                   const grid1d& grid,
                                                   const std::vector<double>& eps_list);

bool all_pass(const std::vector<assumption_check>& checks);

} // namespace evo
