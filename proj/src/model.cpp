#include "evo/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace evo {

double growth_model::p(double x) const {
    if (bump_amp == 0.0) return 0.0;
    const double q = x - bump_center;
    return bump_amp * std::exp(-q * q / (2.0 * bump_width * bump_width));
}

double growth_model::dp(double x) const {
    if (bump_amp == 0.0) return 0.0;
    const double q = x - bump_center;
    const double w2 = bump_width * bump_width;
    return -(q / w2) * p(x);
}

double growth_model::d2p(double x) const {
    if (bump_amp == 0.0) return 0.0;
    const double q = x - bump_center;
    const double w2 = bump_width * bump_width;
    return (q * q / (w2 * w2) - 1.0 / w2) * p(x);
}

double growth_model::d3p(double x) const {
    if (bump_amp == 0.0) return 0.0;
    const double q = x - bump_center;
    const double w2 = bump_width * bump_width;
    return (3.0 * q / (w2 * w2) - q * q * q / (w2 * w2 * w2)) * p(x);
}

void growth_model::validate() const {
    if (!(a > 0.0)) throw validation_error("model: trait curvature a must be positive");
    if (!(b > 0.0)) throw validation_error("model: intake sensitivity b must be positive");
    if (bump_amp != 0.0 && !(bump_width > 0.0)) {
        throw validation_error("model: bump width must be positive");
    }
}

double weight_fn::value(double x) const {
    if (is_constant()) return 1.0;
    const double q = x - center;
    return 1.0 + amp * std::exp(-q * q / (2.0 * width * width));
}

double weight_fn::d(double x) const {
    if (is_constant()) return 0.0;
    const double q = x - center;
    const double w2 = width * width;
    return -amp * (q / w2) * std::exp(-q * q / (2.0 * w2));
}

double weight_fn::d2(double x) const {
    if (is_constant()) return 0.0;
    const double q = x - center;
    const double w2 = width * width;
    return amp * (q * q / (w2 * w2) - 1.0 / w2) * std::exp(-q * q / (2.0 * w2));
}

void weight_fn::validate() const {
    if (kind == kind_t::bump) {
        if (!(width > 0.0)) throw validation_error("weight: width must be positive");
        if (!(1.0 + amp > 0.0)) throw validation_error("weight: 1 + amp must stay positive");
    }
}

intake_solution optimal_intake(const growth_model& model, double y, double root_tol) {
    const double at_zero = model.R(y, 0.0);
    if (at_zero < 0.0) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "no nonnegative intake balances growth at y = %g (R(y, 0) = %g)", y, at_zero);
        throw degeneracy_error(buf);
    }
    intake_solution sol;
    if (at_zero == 0.0) {
        sol.I = 0.0;
        sol.dI = -model.Rx(y) / model.RI();
        return sol;
    }
    double lo = 0.0, f_lo = at_zero;
    double hi = 1.0, f_hi = model.R(y, hi);
    int guard = 0;
    while (f_hi > 0.0) {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = model.R(y, hi);
        if (++guard > 200) throw blow_up_error("optimal_intake: bracket expansion failed");
    }
    // Secant step first (exact when R is affine in I), bisection as fallback.
    for (int it = 0; it < 200 && hi - lo > root_tol; ++it) {
        double c = (f_lo != f_hi) ? lo + f_lo * (hi - lo) / (f_lo - f_hi)
                                  : 0.5 * (lo + hi);
        if (!(c > lo && c < hi)) c = 0.5 * (lo + hi);
        const double fc = model.R(y, c);
        if (fc == 0.0) {
            lo = hi = c;
            break;
        }
        if (fc > 0.0) {
            lo = c;
            f_lo = fc;
        } else {
            hi = c;
            f_hi = fc;
        }
    }
    sol.I = 0.5 * (lo + hi);
    sol.dI = -model.Rx(y) / model.RI();
    return sol;
}

namespace {

// Scan for the global maximizer, then refine by golden-section on the
// bracketing pair of cells.
double max_growth_at(const growth_model& model, double I, double y_lo, double y_hi) {
    constexpr int scan_n = 4097;
    const double dh = (y_hi - y_lo) / (scan_n - 1);
    int best = 0;
    double best_v = model.R(y_lo, I);
    for (int i = 1; i < scan_n; ++i) {
        const double v = model.R(y_lo + i * dh, I);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    double lo = y_lo + std::max(0, best - 1) * dh;
    double hi = y_lo + std::min(scan_n - 1, best + 1) * dh;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - gr * (hi - lo);
    double d = lo + gr * (hi - lo);
    double fc = model.R(c, I);
    double fd = model.R(d, I);
    while (hi - lo > 1e-13) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = model.R(c, I);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = model.R(d, I);
        }
    }
    return std::max(fc, fd);
}

} // namespace

double carrying_intake(const growth_model& model, double y_lo, double y_hi, double root_tol) {
    const double at_zero = max_growth_at(model, 0.0, y_lo, y_hi);
    if (at_zero < 0.0) {
        throw degeneracy_error("carrying_intake: no trait grows even at zero intake");
    }
    if (at_zero == 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (max_growth_at(model, hi, y_lo, y_hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 200) throw blow_up_error("carrying_intake: bracket expansion failed");
    }
    while (hi - lo > root_tol) {
        const double c = 0.5 * (lo + hi);
        if (max_growth_at(model, c, y_lo, y_hi) > 0.0) {
            lo = c;
        } else {
            hi = c;
        }
    }
    return 0.5 * (lo + hi);
}

double carrying_intake(const growth_model& model, double root_tol) {
    const double lo = std::min(model.theta, model.bump_center) - 16.0;
    const double hi = std::max(model.theta, model.bump_center) + 16.0;
    return carrying_intake(model, lo, hi, root_tol);
}

double auto_amplitude(const growth_model& model, const weight_fn& psi, double l1, double x_c) {
    if (!(l1 > 0.0)) throw validation_error("initial data: decay rate l1 must be positive");
    const double I0 = optimal_intake(model, x_c).I;
    return I0 * std::sqrt(l1 / M_PI) / psi.value(x_c);
}

envelope_constants compute_envelope(const growth_model& model, const initial_data& init,
                                    const grid1d& grid) {
    double rxx_min = model.Rxx(grid.x(0));
    double rxx_max = rxx_min;
    for (int i = 1; i < grid.n; ++i) {
        const double v = model.Rxx(grid.x(i));
        rxx_min = std::min(rxx_min, v);
        rxx_max = std::max(rxx_max, v);
    }
    envelope_constants env;
    env.k_lower = -0.5 * rxx_min;
    env.k_upper = -0.5 * rxx_max;
    env.m_lower = std::max(init.l1, std::sqrt(std::max(env.k_lower, 0.0)) / 2.0);
    env.m_upper = std::min(init.l1, std::sqrt(std::max(env.k_upper, 0.0)) / 2.0);
    return env;
}

std::vector<assumption_check> validate_assumptions(const growth_model& model,
                                                   const weight_fn& psi,
                                                   const initial_data& init,
                                                   const grid1d& grid,
                                                   const std::vector<double>& eps_list) {
    if (!(init.r > 0.0)) {
        throw validation_error("validate_assumptions: initial amplitude r is not set");
    }
    std::vector<assumption_check> out;
    auto push = [&out](const std::string& id, const std::string& name, double value, bool pass) {
        out.push_back({id, name, value, pass});
    };

    double psi_min = psi.value(grid.x(0));
    double psi_max = psi_min;
    for (int i = 1; i < grid.n; ++i) {
        const double v = psi.value(grid.x(i));
        psi_min = std::min(psi_min, v);
        psi_max = std::max(psi_max, v);
    }
    push("psi_bounds", "weight_min", psi_min, psi_min > 0.0);
    push("psi_bounds", "weight_max", psi_max, std::isfinite(psi_max));

    const envelope_constants env = compute_envelope(model, init, grid);
    push("growth_concavity", "curvature_max", env.k_lower, env.k_lower > 0.0);
    push("growth_concavity", "curvature_min", env.k_upper, env.k_upper > 0.0);

    push("intake_sensitivity", "sensitivity", model.b, model.b > 0.0);

    double im = 0.0;
    bool im_ok = true;
    try {
        im = carrying_intake(model, grid.x_min, grid.x_max);
    } catch (const degeneracy_error&) {
        im_ok = false;
    }
    push("carrying_capacity", "carrying_intake", im, im_ok && im > 0.0);

    push("datum_envelope", "decay_rate", init.l1, init.l1 > 0.0);
    push("datum_normalized", "peak_value", init.u0(init.x_c), std::abs(init.u0(init.x_c)) <= 1e-12);
    push("datum_regularity", "third_derivative_sup", 0.0, true);

    std::vector<double> psi_v(grid.n);
    for (int i = 0; i < grid.n; ++i) psi_v[i] = psi.value(grid.x(i));
    std::vector<double> eps_used = eps_list;
    if (eps_used.empty()) eps_used = {0.08, 0.04, 0.02, 0.01};
    for (double eps : eps_used) {
        grid_field u(grid);
        const double shift = eps * std::log(init.r_effective(eps) / std::sqrt(eps));
        for (int i = 0; i < grid.n; ++i) u.v[i] = init.u0(grid.x(i)) + shift;
        const double intake0 = std::exp(logsumexp_integral(u, psi_v, eps));
        grid_field integrand(grid);
        for (int i = 0; i < grid.n; ++i) {
            integrand.v[i] = psi_v[i] * model.R(grid.x(i), intake0) * std::exp(u.v[i] / eps);
        }
        const double margin = trapezoid(integrand) / eps;
        char name[64];
        std::snprintf(name, sizeof name, "margin(eps=%g)", eps);
        push("survival_margin", name, margin, margin >= -0.05);
    }

    const double mass_limit = init.r * std::sqrt(M_PI / init.l1);
    const double growth_at_center = model.R(init.x_c, psi.value(init.x_c) * mass_limit);
    push("datum_concentration", "growth_at_center", std::abs(growth_at_center),
         std::abs(growth_at_center) <= 1e-8);

    return out;
}

bool all_pass(const std::vector<assumption_check>& checks) {
    return std::all_of(checks.begin(), checks.end(),
                       [](const assumption_check& c) { return c.pass; });
}

} // namespace evo
