#pragma once

#include <vector>

#include "evo/errors.hpp"

namespace evo {

// Uniform 1-D grid on [x_min, x_max] with n nodes.
struct grid1d {
    double x_min = 0.0;
    double x_max = 0.0;
    int n = 0;
    double h = 0.0;

    static grid1d make(double x_min, double x_max, int n);

    double x(int i) const { return x_min + i * h; }
    std::vector<double> coords() const;
    bool same_as(const grid1d& o) const;
};

// A real-valued function sampled on a grid1d.
struct grid_field {
    grid1d grid;
    std::vector<double> v;

    grid_field() = default;
    grid_field(const grid1d& g, double fill = 0.0) : grid(g), v(g.n, fill) {}
    grid_field(const grid1d& g, std::vector<double> values);
};

// Sub-grid maximizer: vertex of the parabola through the discrete argmax and
// its neighbors. Exact when the field is locally quadratic.
struct argmax_result {
    double x = 0.0;
    double value = 0.0;
    int index = 0;
};

// Finite differences, second order in h.
// order 1, 2: centered interior, one-sided second-order rows at the ends.
// order 3: centered 5-point interior, one-sided 5-point rows at the ends
// (exact for quartics).
grid_field diff(const grid_field& f, int order);

// Raw-array stencil kernels used by the time steppers (no allocation).
void d1_into(const double* u, double* out, int n, double h);
void d2_into(const double* u, double* out, int n, double h);
void d3_into(const double* u, double* out, int n, double h);

// Composite trapezoid rule over the whole grid.
double trapezoid(const grid_field& f);
double trapezoid_raw(const double* f, int n, double h);

// log of integral psi * exp(u / eps) dx, computed with the exponent shifted
// by max(u) so it never overflows.
double logsumexp_integral(const grid_field& u, const std::vector<double>& psi, double eps);
double logsumexp_raw(const double* u, const double* psi, int n, double h, double eps,
                     int* max_index = nullptr);

// Throws boundary_contact_error when the discrete argmax touches the ends.
argmax_result argmax_parabolic(const grid_field& f);
argmax_result argmax_parabolic_raw(const double* u, int n, double x_min, double h);

// Cubic 4-point Lagrange interpolation; exact for cubics.
double sample_at(const grid_field& f, double x);
double sample_raw(const double* f, int n, double x_min, double h, double x);

// Derivative of order 1, 2, or 3 at an off-grid point: interior stencil values
// on the four nodes around x, then cubic interpolation between them.
double derivative_at(const grid_field& f, double x, int order);
double derivative_at_raw(const double* f, int n, double x_min, double h, double x, int order);

} // namespace evo
