#include "evo/limit_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace evo {

double intake_from_constraint(const growth_model& model, double xbar, double carrying,
                              double tol) {
    const double I = optimal_intake(model, xbar).I;
    if (I > carrying + tol) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "constraint intake %.12g exceeds the carrying value %.12g", I, carrying);
        throw degeneracy_error(buf);
    }
    return I;
}

double intake_from_constraint(const growth_model& model, double xbar) {
    return intake_from_constraint(model, xbar, carrying_intake(model));
}

double canonical_rhs(const limit_state& state, const growth_model& model) {
    const double d2 = derivative_at(state.u, state.xbar, 2);
    if (!(d2 < 0.0)) {
        throw degeneracy_error("canonical_rhs: potential is not concave at the concentration point");
    }
    return model.Rx(state.xbar) / (-d2);
}

grid_field limit_hj_rhs(const grid_field& u, const std::vector<double>& R_values) {
    if ((int)R_values.size() != u.grid.n) {
        throw validation_error("limit_hj_rhs: growth values do not match the grid");
    }
    const int n = u.grid.n;
    const double inv2h = 1.0 / (2.0 * u.grid.h);
    grid_field out(u.grid);
    const double* uv = u.v.data();
    double d1 = (-3.0 * uv[0] + 4.0 * uv[1] - uv[2]) * inv2h;
    out.v[0] = d1 * d1 + R_values[0];
    for (int i = 1; i < n - 1; ++i) {
        d1 = (uv[i + 1] - uv[i - 1]) * inv2h;
        out.v[i] = d1 * d1 + R_values[i];
    }
    d1 = (3.0 * uv[n - 1] - 4.0 * uv[n - 2] + uv[n - 3]) * inv2h;
    out.v[n - 1] = d1 * d1 + R_values[n - 1];
    return out;
}

namespace {

struct limit_stepper {
    const growth_model& model;
    grid1d grid;
    double carrying;
    double b;
    std::vector<double> R0;
    std::vector<double> f1, f2, u_star;

    limit_stepper(const growth_model& m, const grid1d& g, double carrying_)
        : model(m), grid(g), carrying(carrying_), b(-m.RI()) {
        R0.resize(g.n);
        for (int i = 0; i < g.n; ++i) R0[i] = m.R(g.x(i), 0.0);
        f1.resize(g.n);
        f2.resize(g.n);
        u_star.resize(g.n);
    }

    void rhs_into(const double* u, double I, double* out) const {
        const int n = grid.n;
        const double inv2h = 1.0 / (2.0 * grid.h);
        const double bI = b * I;
        double d1 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2h;
        out[0] = d1 * d1 + R0[0] - bI;
        for (int i = 1; i < n - 1; ++i) {
            d1 = (u[i + 1] - u[i - 1]) * inv2h;
            out[i] = d1 * d1 + R0[i] - bI;
        }
        d1 = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) * inv2h;
        out[n - 1] = d1 * d1 + R0[n - 1] - bI;
    }

    double concave_d2_at(const double* u, double x, double t) const {
        const double d2 = derivative_at_raw(u, grid.n, grid.x_min, grid.h, x, 2);
        if (!(d2 < 0.0)) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "lost concavity at the concentration point (D2u = %.6g) at t = %.6g",
                          d2, t);
            throw degeneracy_error(buf);
        }
        return d2;
    }

    // One Heun step on the coupled (u, xbar) pair, then renormalization.
    // Returns the signed renormalization shift.
    double step(std::vector<double>& u, double& xbar, double t, double dt, double* gap_out) {
        const int n = grid.n;
        const double I1 = intake_from_constraint(model, xbar, carrying);
        const double d2_1 = concave_d2_at(u.data(), xbar, t);
        const double v1 = model.Rx(xbar) / (-d2_1);
        rhs_into(u.data(), I1, f1.data());
        for (int i = 0; i < n; ++i) u_star[i] = u[i] + dt * f1[i];
        const double xbar_star = xbar + dt * v1;
        const double I2 = intake_from_constraint(model, xbar_star, carrying);
        const double d2_2 = concave_d2_at(u_star.data(), xbar_star, t + dt);
        const double v2 = model.Rx(xbar_star) / (-d2_2);
        rhs_into(u_star.data(), I2, f2.data());
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            u[i] += 0.5 * dt * (f1[i] + f2[i]);
            acc += u[i];
        }
        xbar += 0.5 * dt * (v1 + v2);
        if (!std::isfinite(acc) || !std::isfinite(xbar)) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "limit step lost finiteness at t = %.6g", t);
            throw blow_up_error(buf);
        }
        const argmax_result am = argmax_parabolic_raw(u.data(), n, grid.x_min, grid.h);
        for (int i = 0; i < n; ++i) u[i] -= am.value;
        if (gap_out) *gap_out = std::abs(xbar - am.x);
        return am.value;
    }
};

} // namespace

limit_state make_limit_state(const growth_model& model, const initial_data& init,
                             const grid1d& grid) {
    if (init.x_c <= grid.x_min || init.x_c >= grid.x_max) {
        throw validation_error("make_limit_state: x_c must be interior to the grid");
    }
    limit_state st;
    st.t = 0.0;
    st.u = grid_field(grid);
    for (int i = 0; i < grid.n; ++i) st.u.v[i] = init.u0(grid.x(i));
    const argmax_result am = argmax_parabolic(st.u);
    for (int i = 0; i < grid.n; ++i) st.u.v[i] -= am.value;
    st.xbar = init.x_c;
    st.I = intake_from_constraint(model, init.x_c);
    st.d2u_at_xbar = derivative_at(st.u, st.xbar, 2);
    st.d3u_at_xbar = derivative_at(st.u, st.xbar, 3);
    return st;
}

limit_step advance_limit(const limit_state& state, double dt, const growth_model& model,
                         double carrying) {
    if (!(dt > 0.0)) throw validation_error("advance_limit: dt must be positive");
    if (carrying < 0.0) carrying = carrying_intake(model);
    limit_stepper st(model, state.u.grid, carrying);
    limit_step out;
    out.state = state;
    double gap = 0.0;
    out.drift = st.step(out.state.u.v, out.state.xbar, state.t, dt, &gap);
    out.state.t = state.t + dt;
    out.state.I = intake_from_constraint(model, out.state.xbar, carrying);
    out.state.d2u_at_xbar = derivative_at(out.state.u, out.state.xbar, 2);
    out.state.d3u_at_xbar = derivative_at(out.state.u, out.state.xbar, 3);
    return out;
}

limit_trajectory run_limit(const growth_model& model, const initial_data& init,
                           const grid1d& grid, double T, double dt, int snapshots) {
    if (!(T > 0.0)) throw validation_error("run_limit: T must be positive");
    if (snapshots < 1) throw validation_error("run_limit: need at least one snapshot interval");

    limit_state state0 = make_limit_state(model, init, grid);
    std::vector<double> u = state0.u.v;
    double xbar = state0.xbar;

    double gmax = 0.0;
    {
        std::vector<double> d1(grid.n);
        d1_into(u.data(), d1.data(), grid.n, grid.h);
        for (double g : d1) gmax = std::max(gmax, std::abs(g));
    }
    const double interval = T / snapshots;
    long long steps_per_interval = 0;
    if (dt > 0.0) {
        if (gmax > 0.0 && dt > 0.5 * grid.h / gmax) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "run_limit: dt = %.6g exceeds the transport stability limit %.6g", dt,
                          0.5 * grid.h / gmax);
            throw validation_error(buf);
        }
        steps_per_interval = std::llround(interval / dt);
        if (steps_per_interval < 1 ||
            std::abs(steps_per_interval * dt - interval) > 1e-9 * interval) {
            throw validation_error("run_limit: dt must divide the snapshot interval");
        }
    } else {
        const double dt_auto = gmax > 0.0 ? 0.05 * grid.h / gmax : 0.05 * grid.h;
        steps_per_interval = std::max((long long)std::ceil(interval / dt_auto - 1e-12), 1ll);
    }
    const double dt_eff = interval / (double)steps_per_interval;

    limit_trajectory traj;
    traj.grid = grid;
    traj.dt = dt_eff;
    const double carrying = carrying_intake(model, grid.x_min, grid.x_max);
    limit_stepper st(model, grid, carrying);

    double pending_drift = 0.0;
    double pending_gap = 0.0;
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.xbar.push_back(xbar);
        traj.I.push_back(intake_from_constraint(model, xbar, carrying));
        traj.d2u.push_back(derivative_at_raw(u.data(), grid.n, grid.x_min, grid.h, xbar, 2));
        traj.d3u.push_back(derivative_at_raw(u.data(), grid.n, grid.x_min, grid.h, xbar, 3));
        traj.drift.push_back(pending_drift);
        traj.gap.push_back(pending_gap);
        traj.max_drift = std::max(traj.max_drift, std::abs(pending_drift));
        traj.max_gap = std::max(traj.max_gap, pending_gap);
    };
    auto snapshot = [&](double t) {
        limit_state s;
        s.t = t;
        s.u = grid_field(grid, u);
        s.xbar = xbar;
        s.I = traj.I.back();
        s.d2u_at_xbar = traj.d2u.back();
        s.d3u_at_xbar = traj.d3u.back();
        traj.snapshot_times.push_back(t);
        traj.snapshot_index.push_back((int)traj.times.size() - 1);
        traj.snapshots.push_back(std::move(s));
    };

    for (int k = 0; k < snapshots; ++k) {
        const double t_k = k * interval;
        for (long long j = 0; j < steps_per_interval; ++j) {
            const double t = t_k + j * dt_eff;
            record(t);
            if (j == 0) snapshot(t_k);
            pending_drift = st.step(u, xbar, t, dt_eff, &pending_gap);
        }
    }
    record(T);
    snapshot(T);
    return traj;
}

namespace {

// Dormand-Prince 5(4) on a 2-component system, fixed tolerance 1e-12.
template <typename RHS>
std::array<double, 2> rk45_to(RHS&& rhs, std::array<double, 2> y, double& t, double target,
                              double& h) {
    constexpr double tol = 1e-12;
    while (t < target) {
        h = std::min(h, target - t);
        const auto k1 = rhs(y);
        auto at = [&](double c1, double c2, double c3, double c4, double c5, double c6,
                      const auto& k2, const auto& k3, const auto& k4, const auto& k5,
                      const auto& k6) {
            std::array<double, 2> z;
            for (int i = 0; i < 2; ++i) {
                z[i] = y[i] + h * (c1 * k1[i] + c2 * k2[i] + c3 * k3[i] + c4 * k4[i] +
                                   c5 * k5[i] + c6 * k6[i]);
            }
            return z;
        };
        const auto k2 = rhs(at(1.0 / 5, 0, 0, 0, 0, 0, k1, k1, k1, k1, k1));
        const auto k3 = rhs(at(3.0 / 40, 9.0 / 40, 0, 0, 0, 0, k2, k1, k1, k1, k1));
        const auto k4 = rhs(at(44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0, k2, k3, k1, k1, k1));
        const auto k5 = rhs(at(19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0,
                               0, k2, k3, k4, k1, k1));
        const auto k6 = rhs(at(9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
                               -5103.0 / 18656, 0, k2, k3, k4, k5, k1));
        const auto y5 = at(35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84,
                           k2, k3, k4, k5, k6);
        const auto k7 = rhs(y5);
        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double e = h * (71.0 / 57600 * k1[i] - 71.0 / 16695 * k3[i] +
                                  71.0 / 1920 * k4[i] - 17253.0 / 339200 * k5[i] +
                                  22.0 / 525 * k6[i] - 1.0 / 40 * k7[i]);
            const double scale = tol + tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err += (e / scale) * (e / scale);
        }
        err = std::sqrt(0.5 * err);
        if (err <= 1.0) {
            t += h;
            y = y5;
        }
        const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        h = std::max(h, 1e-14);
    }
    return y;
}

} // namespace

std::vector<oracle_point> quadratic_oracle(const growth_model& model, double L1, double x_c,
                                           const std::vector<double>& times) {
    if (model.bump_amp != 0.0) {
        throw validation_error("quadratic_oracle: only the pure quadratic family is supported");
    }
    if (!(L1 > 0.0)) throw validation_error("quadratic_oracle: L1 must be positive");
    const double sqa = std::sqrt(model.a);
    std::vector<oracle_point> out;
    out.reserve(times.size());
    if (std::abs(L1 - 0.5 * sqa) <= 1e-13) {
        for (double t : times) {
            oracle_point p;
            p.t = t;
            p.beta = L1;
            p.xbar = model.theta + (x_c - model.theta) * std::exp(-2.0 * sqa * t);
            p.I = optimal_intake(model, p.xbar).I;
            out.push_back(p);
        }
        return out;
    }
    auto rhs = [&](const std::array<double, 2>& y) {
        return std::array<double, 2>{model.a - 4.0 * y[0] * y[0],
                                     -model.a * (y[1] - model.theta) / y[0]};
    };
    std::array<double, 2> y{L1, x_c};
    double t = 0.0;
    double h = 1e-3;
    for (double target : times) {
        if (target < t) throw validation_error("quadratic_oracle: times must be nondecreasing");
        y = rk45_to(rhs, y, t, target, h);
        oracle_point p;
        p.t = target;
        p.beta = y[0];
        p.xbar = y[1];
        p.I = optimal_intake(model, p.xbar).I;
        out.push_back(p);
    }
    return out;
}

std::vector<oracle_point> quadratic_oracle(const growth_model& model, double L1, double x_c,
                                           double T) {
    std::vector<double> times(1001);
    for (int i = 0; i <= 1000; ++i) times[i] = T * i / 1000.0;
    return quadratic_oracle(model, L1, x_c, times);
}

} // namespace evo
