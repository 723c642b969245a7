#include "evo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace evo {

grid1d grid1d::make(double x_min, double x_max, int n) {
    if (!(x_max > x_min)) {
        throw validation_error("grid: x_max must exceed x_min");
    }
    if (n < 9) {
        throw validation_error("grid: need at least 9 nodes, got " + std::to_string(n));
    }
    grid1d g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.n = n;
    g.h = (x_max - x_min) / (n - 1);
    return g;
}

std::vector<double> grid1d::coords() const {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = x(i);
    return xs;
}

bool grid1d::same_as(const grid1d& o) const {
    return n == o.n && x_min == o.x_min && x_max == o.x_max;
}

grid_field::grid_field(const grid1d& g, std::vector<double> values)
    : grid(g), v(std::move(values)) {
    if ((int)v.size() != g.n) {
        throw validation_error("grid_field: value count does not match grid size");
    }
}

void d1_into(const double* u, double* out, int n, double h) {
    const double inv2h = 1.0 / (2.0 * h);
    out[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2h;
    for (int i = 1; i < n - 1; ++i) {
        out[i] = (u[i + 1] - u[i - 1]) * inv2h;
    }
    out[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) * inv2h;
}

void d2_into(const double* u, double* out, int n, double h) {
    const double invh2 = 1.0 / (h * h);
    out[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) * invh2;
    for (int i = 1; i < n - 1; ++i) {
        out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * invh2;
    }
    out[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) * invh2;
}

void d3_into(const double* u, double* out, int n, double h) {
    const double inv2h3 = 1.0 / (2.0 * h * h * h);
    // One-sided 5-point rows, exact for quartics.
    out[0] = (-5.0 * u[0] + 18.0 * u[1] - 24.0 * u[2] + 14.0 * u[3] - 3.0 * u[4]) * inv2h3;
    out[1] = (-3.0 * u[0] + 10.0 * u[1] - 12.0 * u[2] + 6.0 * u[3] - u[4]) * inv2h3;
    for (int i = 2; i < n - 2; ++i) {
        out[i] = (-u[i - 2] + 2.0 * u[i - 1] - 2.0 * u[i + 1] + u[i + 2]) * inv2h3;
    }
    const int m = n - 1;
    out[m - 1] = (3.0 * u[m] - 10.0 * u[m - 1] + 12.0 * u[m - 2] - 6.0 * u[m - 3] + u[m - 4]) * inv2h3;
    out[m] = (5.0 * u[m] - 18.0 * u[m - 1] + 24.0 * u[m - 2] - 14.0 * u[m - 3] + 3.0 * u[m - 4]) * inv2h3;
}

grid_field diff(const grid_field& f, int order) {
    const int n = f.grid.n;
    grid_field out(f.grid);
    switch (order) {
        case 1: d1_into(f.v.data(), out.v.data(), n, f.grid.h); break;
        case 2: d2_into(f.v.data(), out.v.data(), n, f.grid.h); break;
        case 3: d3_into(f.v.data(), out.v.data(), n, f.grid.h); break;
        default:
            throw validation_error("diff: order must be 1, 2, or 3, got " + std::to_string(order));
    }
    return out;
}

double trapezoid_raw(const double* f, int n, double h) {
    double s = 0.5 * (f[0] + f[n - 1]);
    for (int i = 1; i < n - 1; ++i) s += f[i];
    return s * h;
}

double trapezoid(const grid_field& f) {
    return trapezoid_raw(f.v.data(), f.grid.n, f.grid.h);
}

double logsumexp_raw(const double* u, const double* psi, int n, double h, double eps,
                     int* max_index) {
    if (!(eps > 0.0)) {
        throw validation_error("logsumexp: eps must be positive");
    }
    int j = 0;
    for (int i = 1; i < n; ++i) {
        if (u[i] > u[j]) j = i;
    }
    if (max_index) *max_index = j;
    const double umax = u[j];
    double s = 0.5 * (psi[0] * std::exp((u[0] - umax) / eps) +
                      psi[n - 1] * std::exp((u[n - 1] - umax) / eps));
    for (int i = 1; i < n - 1; ++i) {
        s += psi[i] * std::exp((u[i] - umax) / eps);
    }
    return umax / eps + std::log(s * h);
}

double logsumexp_integral(const grid_field& u, const std::vector<double>& psi, double eps) {
    if ((int)psi.size() != u.grid.n) {
        throw validation_error("logsumexp_integral: weight count does not match grid size");
    }
    return logsumexp_raw(u.v.data(), psi.data(), u.grid.n, u.grid.h, eps, nullptr);
}

argmax_result argmax_parabolic_raw(const double* u, int n, double x_min, double h) {
    int j = 0;
    for (int i = 1; i < n; ++i) {
        if (u[i] > u[j]) j = i;
    }
    if (j == 0 || j == n - 1) {
        throw boundary_contact_error("argmax at grid boundary, x = " +
                                     std::to_string(x_min + j * h));
    }
    const double a = (u[j + 1] - u[j - 1]) / (2.0 * h);
    const double b = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h);
    argmax_result r;
    r.index = j;
    if (b >= 0.0) {
        // Flat or non-concave sample triple: fall back to the node itself.
        r.x = x_min + j * h;
        r.value = u[j];
        return r;
    }
    r.x = x_min + j * h - a / b;
    r.value = u[j] - a * a / (2.0 * b);
    return r;
}

argmax_result argmax_parabolic(const grid_field& f) {
    return argmax_parabolic_raw(f.v.data(), f.grid.n, f.grid.x_min, f.grid.h);
}

double sample_raw(const double* f, int n, double x_min, double h, double x) {
    // Base node for a 4-point stencil {j-1, j, j+1, j+2}, clamped to the grid.
    double s = (x - x_min) / h;
    int j = (int)std::floor(s);
    j = std::clamp(j, 1, n - 3);
    const double t = s - j;
    const double f0 = f[j - 1], f1 = f[j], f2 = f[j + 1], f3 = f[j + 2];
    const double c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return c0 * f0 + c1 * f1 + c2 * f2 + c3 * f3;
}

double sample_at(const grid_field& f, double x) {
    if (x < f.grid.x_min || x > f.grid.x_max) {
        throw validation_error("sample_at: x = " + std::to_string(x) + " outside grid");
    }
    return sample_raw(f.v.data(), f.grid.n, f.grid.x_min, f.grid.h, x);
}

double derivative_at_raw(const double* f, int n, double x_min, double h, double x, int order) {
    const int hw = order == 3 ? 2 : 1;
    int j = (int)std::floor((x - x_min) / h);
    j = std::clamp(j, hw + 1, n - 3 - hw);
    if (x < x_min + hw * h || x > x_min + (n - 1 - hw) * h) {
        throw boundary_contact_error("derivative_at: point too close to the domain edge");
    }
    double loc[4];
    for (int m = -1; m <= 2; ++m) {
        const int i = j + m;
        switch (order) {
            case 1: loc[m + 1] = (f[i + 1] - f[i - 1]) / (2.0 * h); break;
            case 2: loc[m + 1] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h); break;
            case 3:
                loc[m + 1] = (-f[i - 2] + 2.0 * f[i - 1] - 2.0 * f[i + 1] + f[i + 2]) /
                             (2.0 * h * h * h);
                break;
            default:
                throw validation_error("derivative_at: order must be 1, 2, or 3");
        }
    }
    return sample_raw(loc, 4, x_min + (j - 1) * h, h, x);
}

double derivative_at(const grid_field& f, double x, int order) {
    return derivative_at_raw(f.v.data(), f.grid.n, f.grid.x_min, f.grid.h, x, order);
}

} // namespace evo
