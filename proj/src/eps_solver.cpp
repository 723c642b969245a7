#include "evo/eps_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace evo {

namespace {

double stability_limit(double eps, double h, double grad_max) {
    const double diffusive = h * h / (2.0 * eps);
    const double advective = grad_max > 0.0 ? h / (2.0 * grad_max) : diffusive;
    return 0.4 * std::min(diffusive, advective);
}

// Shared per-run state: precomputed zero-intake growth, weights, scratch rows.
struct stepper {
    const growth_model& model;
    grid1d grid;
    double eps;
    bool llf;
    double b;
    std::vector<double> R0;
    std::vector<double> psi_v;
    std::vector<double> f1, f2, u_star;

    stepper(const growth_model& m, const weight_fn& psi, const grid1d& g, double eps_, bool llf_)
        : model(m), grid(g), eps(eps_), llf(llf_), b(-m.RI()) {
        R0.resize(g.n);
        psi_v.resize(g.n);
        for (int i = 0; i < g.n; ++i) {
            const double x = g.x(i);
            R0[i] = m.R(x, 0.0);
            psi_v[i] = psi.value(x);
        }
        f1.resize(g.n);
        f2.resize(g.n);
        u_star.resize(g.n);
    }

    // eps * u'' + (u')^2 + R(x, I) with the growth affine in I.
    void rhs_into(const double* u, double I, double* out) const {
        const int n = grid.n;
        const double h = grid.h;
        const double inv2h = 1.0 / (2.0 * h);
        const double invh2 = 1.0 / (h * h);
        const double bI = b * I;
        {
            const double d1 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2h;
            const double d2 = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) * invh2;
            out[0] = eps * d2 + d1 * d1 + R0[0] - bI;
        }
        if (!llf) {
            for (int i = 1; i < n - 1; ++i) {
                const double d1 = (u[i + 1] - u[i - 1]) * inv2h;
                const double d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * invh2;
                out[i] = eps * d2 + d1 * d1 + R0[i] - bI;
            }
        } else {
            const double invh = 1.0 / h;
            for (int i = 1; i < n - 1; ++i) {
                const double pm = (u[i] - u[i - 1]) * invh;
                const double pp = (u[i + 1] - u[i]) * invh;
                const double pc = 0.5 * (pm + pp);
                const double alpha = 2.0 * std::max(std::abs(pm), std::abs(pp));
                const double d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * invh2;
                out[i] = eps * d2 + pc * pc - 0.5 * alpha * (pp - pm) + R0[i] - bI;
            }
        }
        {
            const int m = n - 1;
            const double d1 = (3.0 * u[m] - 4.0 * u[m - 1] + u[m - 2]) * inv2h;
            const double d2 = (2.0 * u[m] - 5.0 * u[m - 1] + 4.0 * u[m - 2] - u[m - 3]) * invh2;
            out[m] = eps * d2 + d1 * d1 + R0[m] - bI;
        }
    }

    double intake(const double* u, int* argmax_idx) const {
        return std::exp(logsumexp_raw(u, psi_v.data(), grid.n, grid.h, eps, argmax_idx));
    }

    double grad_max(const double* u) const {
        const int n = grid.n;
        double g = std::abs((-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * grid.h));
        for (int i = 1; i < n - 1; ++i) {
            g = std::max(g, std::abs((u[i + 1] - u[i - 1]) / (2.0 * grid.h)));
        }
        g = std::max(g, std::abs((3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * grid.h)));
        return g;
    }

    // One Heun step in place; returns the intake seen by the first stage.
    double step(std::vector<double>& u, double t, double dt) {
        const int n = grid.n;
        int jmax = 0;
        const double I1 = intake(u.data(), &jmax);
        rhs_into(u.data(), I1, f1.data());
        for (int i = 0; i < n; ++i) u_star[i] = u[i] + dt * f1[i];
        const double I2 = intake(u_star.data(), &jmax);
        rhs_into(u_star.data(), I2, f2.data());
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            u[i] += 0.5 * dt * (f1[i] + f2[i]);
            acc += u[i];
        }
        if (!std::isfinite(acc)) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "solution lost finiteness during the step at t = %.6g", t);
            throw blow_up_error(buf);
        }
        return I1;
    }
};

} // namespace

grid_field initial_potential(const initial_data& init, double eps, const grid1d& grid) {
    if (!(eps > 0.0)) throw validation_error("initial_potential: eps must be positive");
    if (!(init.r > 0.0)) throw validation_error("initial_potential: amplitude r must be positive");
    grid_field u(grid);
    const double shift = eps * std::log(init.r_effective(eps) / std::sqrt(eps));
    for (int i = 0; i < grid.n; ++i) {
        u.v[i] = init.u0(grid.x(i)) + shift;
    }
    return u;
}

double compute_intake(const grid_field& u, const weight_fn& psi, double eps) {
    std::vector<double> psi_v(u.grid.n);
    for (int i = 0; i < u.grid.n; ++i) psi_v[i] = psi.value(u.grid.x(i));
    int jmax = 0;
    const double lse = logsumexp_raw(u.v.data(), psi_v.data(), u.grid.n, u.grid.h, eps, &jmax);
    if (jmax == 0 || jmax == u.grid.n - 1) {
        throw boundary_contact_error("compute_intake: potential maximum sits on the domain edge");
    }
    return std::exp(lse);
}

grid_field eps_stage_rhs(const grid_field& u, double eps, double I,
                         const growth_model& model, bool llf) {
    weight_fn psi; // weights play no role in the stage RHS
    stepper st(model, psi, u.grid, eps, llf);
    grid_field out(u.grid);
    st.rhs_into(u.v.data(), I, out.v.data());
    return out;
}

grid_field advance_eps(const grid_field& u, double t, const eps_config& cfg,
                       const growth_model& model, const weight_fn& psi) {
    if (!(cfg.dt > 0.0)) throw validation_error("advance_eps: an explicit dt is required");
    stepper st(model, psi, u.grid, cfg.eps, cfg.llf);
    const double limit = stability_limit(cfg.eps, u.grid.h, st.grad_max(u.v.data()));
    if (cfg.dt > limit) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "advance_eps: dt = %.6g exceeds the stability limit %.6g",
                      cfg.dt, limit);
        throw validation_error(buf);
    }
    grid_field out = u;
    st.step(out.v, t, cfg.dt);
    return out;
}

eps_trajectory run_eps(const eps_config& cfg, const growth_model& model,
                       const weight_fn& psi, const initial_data& init) {
    if (!(cfg.eps > 0.0)) throw validation_error("run_eps: eps must be positive");
    if (!(cfg.T > 0.0)) throw validation_error("run_eps: T must be positive");
    if (cfg.snapshots < 1) throw validation_error("run_eps: need at least one snapshot interval");

    eps_trajectory traj;
    traj.cfg = cfg;
    grid_field u = initial_potential(init, cfg.eps, cfg.grid);
    stepper st(model, psi, cfg.grid, cfg.eps, cfg.llf);
    const double interval = cfg.T / cfg.snapshots;
    const double edge_gap = 20.0 * cfg.eps * std::log(1.0 / cfg.eps);
    const int n = cfg.grid.n;

    auto record = [&](double t) {
        int jmax = 0;
        const double I = st.intake(u.v.data(), &jmax);
        const argmax_result am = argmax_parabolic_raw(u.v.data(), n, cfg.grid.x_min, cfg.grid.h);
        const double edge = std::max(u.v[0], u.v[n - 1]);
        if (edge > am.value - edge_gap) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "run_eps: boundary value within %.3g of the maximum at t = %.6g",
                          am.value - edge, t);
            throw boundary_contact_error(buf);
        }
        traj.times.push_back(t);
        traj.I_series.push_back(I);
        traj.x_series.push_back(am.x);
        traj.max_u_series.push_back(am.value);
        const int j = am.index;
        traj.d2_at_max_series.push_back((u.v[j + 1] - 2.0 * u.v[j] + u.v[j - 1]) /
                                        (cfg.grid.h * cfg.grid.h));
        return I;
    };
    auto snapshot = [&](double t) {
        traj.snapshot_times.push_back(t);
        traj.snapshot_index.push_back((int)traj.times.size() - 1);
        traj.u_snapshots.push_back(u);
    };

    for (int k = 0; k < cfg.snapshots; ++k) {
        const double t_k = k * interval;
        const double limit = stability_limit(cfg.eps, cfg.grid.h, st.grad_max(u.v.data()));
        long long nsteps = 0;
        if (cfg.dt > 0.0) {
            if (cfg.dt > limit) {
                char buf[128];
                std::snprintf(buf, sizeof buf,
                              "run_eps: dt = %.6g exceeds the stability limit %.6g at t = %.6g",
                              cfg.dt, limit, t_k);
                throw validation_error(buf);
            }
            nsteps = std::llround(interval / cfg.dt);
            if (nsteps < 1 || std::abs(nsteps * cfg.dt - interval) > 1e-9 * interval) {
                throw validation_error("run_eps: dt must divide the snapshot interval");
            }
        } else {
            nsteps = (long long)std::ceil(interval / limit - 1e-12);
            nsteps = std::max(nsteps, 1ll);
        }
        const double dt = interval / (double)nsteps;
        for (long long j = 0; j < nsteps; ++j) {
            const double t = t_k + j * dt;
            record(t);
            if (j == 0 && k == 0) snapshot(0.0);
            if (j == 0 && k > 0) snapshot(t_k);
            st.step(u.v, t, dt);
        }
    }
    record(cfg.T);
    snapshot(cfg.T);
    return traj;
}

bounds_report check_bounds(const eps_trajectory& traj, const growth_model& model,
                           const initial_data& init, double window) {
    const grid1d& grid = traj.cfg.grid;
    const envelope_constants env = compute_envelope(model, init, grid);
    bounds_report rep;
    rep.window = window;
    rep.intake_cap = carrying_intake(model, grid.x_min, grid.x_max) + 0.01;
    rep.d2_band_lo = -2.0 * env.m_lower - 0.05;
    rep.d2_band_hi = -2.0 * env.m_upper + 0.05;

    rep.intake_min = traj.I_series[0];
    rep.intake_max = traj.I_series[0];
    for (double I : traj.I_series) {
        rep.intake_min = std::min(rep.intake_min, I);
        rep.intake_max = std::max(rep.intake_max, I);
        if (!(I > 0.0)) ++rep.positivity_violations;
        if (I > rep.intake_cap) ++rep.intake_violations;
    }

    rep.d2_min = 0.0;
    rep.d2_max = -1e300;
    rep.envelope_margin_lower = 1e300;
    rep.envelope_margin_upper = 1e300;
    rep.d3_sup = 0.0;
    bool first_d2 = true;
    std::vector<double> d2(grid.n), d3(grid.n);
    for (size_t k = 0; k < traj.u_snapshots.size(); ++k) {
        const grid_field& u = traj.u_snapshots[k];
        const int idx = traj.snapshot_index[k];
        const double t = traj.snapshot_times[k];
        const double x_eps = traj.x_series[idx];
        const double u_max = traj.max_u_series[idx];
        d2_into(u.v.data(), d2.data(), grid.n, grid.h);
        d3_into(u.v.data(), d3.data(), grid.n, grid.h);
        bool concavity_bad = false;
        for (int i = 0; i < grid.n; ++i) {
            const double z = grid.x(i) - x_eps;
            if (std::abs(z) > window) continue;
            if (first_d2) {
                rep.d2_min = rep.d2_max = d2[i];
                first_d2 = false;
            } else {
                rep.d2_min = std::min(rep.d2_min, d2[i]);
                rep.d2_max = std::max(rep.d2_max, d2[i]);
            }
            if (d2[i] < rep.d2_band_lo || d2[i] > rep.d2_band_hi) concavity_bad = true;
            const double val = u.v[i] - u_max;
            const double lo = -env.m_lower * z * z - 2.0 * traj.cfg.eps * env.m_lower * t;
            const double hi = -env.m_upper * z * z;
            rep.envelope_margin_lower = std::min(rep.envelope_margin_lower, val - lo);
            rep.envelope_margin_upper = std::min(rep.envelope_margin_upper, hi - val);
            rep.d3_sup = std::max(rep.d3_sup, std::abs(d3[i]));
        }
        if (concavity_bad) ++rep.concavity_violations;
    }
    rep.pass = rep.positivity_violations == 0 && rep.intake_violations == 0 &&
               rep.concavity_violations == 0;
    return rep;
}

} // namespace evo
