#include "evo/corrections.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace evo {

namespace {

double k_value(const growth_model& model, const weight_fn& psi, double xbar, double I,
               double d2u, double d3u) {
    const double RIv = model.RI();
    if (std::abs(RIv) < 1e-12) {
        throw degeneracy_error("compute_K: intake sensitivity is too close to zero");
    }
    if (!(d2u < 0.0)) {
        char buf[112];
        std::snprintf(buf, sizeof buf,
                      "compute_K: potential is not concave at the concentration point (D2u = %.6g)",
                      d2u);
        throw degeneracy_error(buf);
    }
    if (!(I > 0.0)) {
        throw degeneracy_error("compute_K: intake must be positive");
    }
    const double P = 1.0 / -d2u;
    const double G = model.Rx(xbar);
    const double f = (psi.d(xbar) / psi.value(xbar) * G + 0.5 * model.Rxx(xbar)) * P +
                     0.5 * d3u * G * P * P;
    const double g = -G * P * G / (I * RIv);
    return -(f - g) / RIv;
}

} // namespace

double compute_K(const limit_state& limit, const growth_model& model, const weight_fn& psi) {
    return k_value(model, psi, limit.xbar, limit.I, limit.d2u_at_xbar, limit.d3u_at_xbar);
}

yw_rates yw_stage_rhs(const correction_state& state, const limit_state& limit,
                      const growth_model& model, const weight_fn& psi) {
    (void)psi;
    const grid1d& g = limit.u.grid;
    if (!state.w.grid.same_as(g)) {
        throw validation_error("yw_stage_rhs: correction and limit grids differ");
    }
    if (!(limit.d2u_at_xbar < 0.0)) {
        throw degeneracy_error("yw_stage_rhs: potential is not concave at the concentration point");
    }
    const int n = g.n;
    std::vector<double> d1u(n), d2u(n), d1w(n);
    d1_into(limit.u.v.data(), d1u.data(), n, g.h);
    d2_into(limit.u.v.data(), d2u.data(), n, g.h);
    d1_into(state.w.v.data(), d1w.data(), n, g.h);

    const double P = 1.0 / -limit.d2u_at_xbar;
    const double G = model.Rx(limit.xbar);
    const double dIy = optimal_intake(model, limit.xbar).dI;
    const double forcing = model.RI() * (dIy * state.y + state.K);
    const double d2wxb = derivative_at(state.w, limit.xbar, 2);

    yw_rates out;
    out.wdot = grid_field(g);
    for (int i = 0; i < n; ++i) out.wdot.v[i] = 2.0 * d1u[i] * d1w[i] + d2u[i] + forcing;
    out.ydot = P * (limit.d3u_at_xbar + model.RxI() * (state.K + dIy * state.y) +
                    model.Rxx(limit.xbar) * state.y) +
               P * P * G * (d2wxb + limit.d3u_at_xbar * state.y);
    return out;
}

correction_state advance_yw(const correction_state& state, const limit_state& limit_now,
                            const limit_state& limit_next, double dt, const growth_model& model,
                            const weight_fn& psi) {
    if (!(dt > 0.0)) throw validation_error("advance_yw: dt must be positive");
    if (std::abs(state.t - limit_now.t) > 1e-9 * (1.0 + std::abs(state.t))) {
        throw validation_error("advance_yw: state is not time-aligned with limit_now");
    }
    correction_state s1 = state;
    s1.K = compute_K(limit_now, model, psi);
    const yw_rates r1 = yw_stage_rhs(s1, limit_now, model, psi);

    correction_state s2;
    s2.t = limit_next.t;
    s2.y = state.y + dt * r1.ydot;
    s2.K = compute_K(limit_next, model, psi);
    s2.w = grid_field(state.w.grid);
    for (int i = 0; i < state.w.grid.n; ++i) s2.w.v[i] = state.w.v[i] + dt * r1.wdot.v[i];
    const yw_rates r2 = yw_stage_rhs(s2, limit_next, model, psi);

    correction_state out;
    out.t = limit_next.t;
    out.y = state.y + 0.5 * dt * (r1.ydot + r2.ydot);
    out.w = grid_field(state.w.grid);
    double acc = out.y;
    for (int i = 0; i < state.w.grid.n; ++i) {
        out.w.v[i] = state.w.v[i] + 0.5 * dt * (r1.wdot.v[i] + r2.wdot.v[i]);
        acc += out.w.v[i];
    }
    if (!std::isfinite(acc)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "correction step lost finiteness at t = %.6g", state.t);
        throw blow_up_error(buf);
    }
    out.K = s2.K;
    out.J = out.K + optimal_intake(model, limit_next.xbar).dI * out.y;
    out.w_at_xbar = sample_at(out.w, limit_next.xbar);
    out.dw_at_xbar = derivative_at(out.w, limit_next.xbar, 1);
    out.d2w_at_xbar = derivative_at(out.w, limit_next.xbar, 2);
    return out;
}

double intake_correction_J(const correction_state& state, const limit_state& limit,
                           const growth_model& model) {
    return state.K + optimal_intake(model, limit.xbar).dI * state.y;
}

correction_trajectory run_corrections(const growth_model& model, const weight_fn& psi,
                                      const initial_data& init, const grid1d& grid, double T,
                                      double dt, int snapshots, bool derivative_check) {
    if (!(T > 0.0)) throw validation_error("run_corrections: T must be positive");
    if (snapshots < 1) throw validation_error("run_corrections: need at least one snapshot interval");

    limit_state state0 = make_limit_state(model, init, grid);
    const int n = grid.n;
    std::vector<double> u = state0.u.v;
    double xbar = state0.xbar;
    std::vector<double> w(n, 0.0);
    double y = 0.0;
    std::vector<double> w1;
    if (derivative_check) w1.assign(n, 0.0);

    double gmax = 0.0;
    std::vector<double> d1u(n), d2u(n), d3u(n), d1w(n), d1w1;
    d1_into(u.data(), d1u.data(), n, grid.h);
    for (double v : d1u) gmax = std::max(gmax, std::abs(v));
    const double interval = T / snapshots;
    long long steps_per_interval = 0;
    if (dt > 0.0) {
        if (gmax > 0.0 && dt > 0.5 * grid.h / gmax) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "run_corrections: dt = %.6g exceeds the transport stability limit %.6g",
                          dt, 0.5 * grid.h / gmax);
            throw validation_error(buf);
        }
        steps_per_interval = std::llround(interval / dt);
        if (steps_per_interval < 1 ||
            std::abs(steps_per_interval * dt - interval) > 1e-9 * interval) {
            throw validation_error("run_corrections: dt must divide the snapshot interval");
        }
    } else {
        const double dt_auto = gmax > 0.0 ? 0.05 * grid.h / gmax : 0.05 * grid.h;
        steps_per_interval = std::max((long long)std::ceil(interval / dt_auto - 1e-12), 1ll);
    }
    const double dt_eff = interval / (double)steps_per_interval;

    const double carrying = carrying_intake(model, grid.x_min, grid.x_max);
    const double b_sens = -model.RI();
    std::vector<double> R0(n);
    for (int i = 0; i < n; ++i) R0[i] = model.R(grid.x(i), 0.0);
    if (derivative_check) d1w1.resize(n);

    struct rates {
        std::vector<double> fu, fw, fw1;
        double fxb = 0.0, fy = 0.0;
    };
    rates r1, r2;
    r1.fu.resize(n); r1.fw.resize(n);
    r2.fu.resize(n); r2.fw.resize(n);
    if (derivative_check) { r1.fw1.resize(n); r2.fw1.resize(n); }
    std::vector<double> u_s(n), w_s(n), w1_s;
    if (derivative_check) w1_s.resize(n);

    auto stage = [&](const std::vector<double>& uv, double xb, const std::vector<double>& wv,
                     double yv, const std::vector<double>& w1v, double t_stage, rates& out) {
        d1_into(uv.data(), d1u.data(), n, grid.h);
        d2_into(uv.data(), d2u.data(), n, grid.h);
        d1_into(wv.data(), d1w.data(), n, grid.h);
        const intake_solution is = optimal_intake(model, xb);
        if (is.I > carrying + 1e-9) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "constraint intake %.12g exceeds the carrying value %.12g at t = %.6g",
                          is.I, carrying, t_stage);
            throw degeneracy_error(buf);
        }
        const double d2uxb = sample_raw(d2u.data(), n, grid.x_min, grid.h, xb);
        if (!(d2uxb < 0.0)) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "lost concavity at the concentration point (D2u = %.6g) at t = %.6g",
                          d2uxb, t_stage);
            throw degeneracy_error(buf);
        }
        const double d3uxb = derivative_at_raw(uv.data(), n, grid.x_min, grid.h, xb, 3);
        const double P = 1.0 / -d2uxb;
        const double G = model.Rx(xb);
        const double Kv = k_value(model, psi, xb, is.I, d2uxb, d3uxb);
        const double forcing = model.RI() * (is.dI * yv + Kv);
        const double bI = b_sens * is.I;
        for (int i = 0; i < n; ++i) {
            out.fu[i] = d1u[i] * d1u[i] + R0[i] - bI;
            out.fw[i] = 2.0 * d1u[i] * d1w[i] + d2u[i] + forcing;
        }
        out.fxb = P * G;
        const double d2wxb = derivative_at_raw(wv.data(), n, grid.x_min, grid.h, xb, 2);
        out.fy = P * (d3uxb + model.RxI() * (Kv + is.dI * yv) + model.Rxx(xb) * yv) +
                 P * P * G * (d2wxb + d3uxb * yv);
        if (derivative_check) {
            d3_into(uv.data(), d3u.data(), n, grid.h);
            d1_into(w1v.data(), d1w1.data(), n, grid.h);
            for (int i = 0; i < n; ++i) {
                out.fw1[i] = 2.0 * d1u[i] * d1w1[i] + 2.0 * d2u[i] * w1v[i] + d3u[i];
            }
        }
    };

    correction_trajectory traj;
    traj.limit.grid = grid;
    traj.limit.dt = dt_eff;
    if (derivative_check) traj.derivative_route_gap = 0.0;

    double pending_drift = 0.0;
    double pending_gap = 0.0;
    auto record = [&](double t) {
        traj.limit.times.push_back(t);
        traj.limit.xbar.push_back(xbar);
        traj.limit.I.push_back(intake_from_constraint(model, xbar, carrying));
        const double d2x = derivative_at_raw(u.data(), n, grid.x_min, grid.h, xbar, 2);
        const double d3x = derivative_at_raw(u.data(), n, grid.x_min, grid.h, xbar, 3);
        traj.limit.d2u.push_back(d2x);
        traj.limit.d3u.push_back(d3x);
        traj.limit.drift.push_back(pending_drift);
        traj.limit.gap.push_back(pending_gap);
        traj.limit.max_drift = std::max(traj.limit.max_drift, std::abs(pending_drift));
        traj.limit.max_gap = std::max(traj.limit.max_gap, pending_gap);

        const double Kv = k_value(model, psi, xbar, traj.limit.I.back(), d2x, d3x);
        const double dIy = optimal_intake(model, xbar).dI;
        const double dwx = derivative_at_raw(w.data(), n, grid.x_min, grid.h, xbar, 1);
        traj.times.push_back(t);
        traj.K.push_back(Kv);
        traj.y.push_back(y);
        traj.J.push_back(Kv + dIy * y);
        traj.w_at_xbar.push_back(sample_raw(w.data(), n, grid.x_min, grid.h, xbar));
        traj.dw_at_xbar.push_back(dwx);
        traj.d2w_at_xbar.push_back(derivative_at_raw(w.data(), n, grid.x_min, grid.h, xbar, 2));
        const double gap_id = std::abs(y - dwx / -d2x);
        traj.identity_gap.push_back(gap_id);
        traj.max_identity_gap = std::max(traj.max_identity_gap, gap_id);
        if (derivative_check) {
            const double w1x = sample_raw(w1.data(), n, grid.x_min, grid.h, xbar);
            traj.derivative_route_gap =
                std::max(traj.derivative_route_gap, std::abs(w1x - dwx));
        }
    };
    auto snapshot = [&](double t) {
        limit_state s;
        s.t = t;
        s.u = grid_field(grid, u);
        s.xbar = xbar;
        s.I = traj.limit.I.back();
        s.d2u_at_xbar = traj.limit.d2u.back();
        s.d3u_at_xbar = traj.limit.d3u.back();
        traj.limit.snapshot_times.push_back(t);
        traj.limit.snapshot_index.push_back((int)traj.limit.times.size() - 1);
        traj.limit.snapshots.push_back(std::move(s));
        traj.snapshot_times.push_back(t);
        traj.snapshot_index.push_back((int)traj.times.size() - 1);
        traj.w_snapshots.emplace_back(grid, w);
    };

    for (int k = 0; k < snapshots; ++k) {
        const double t_k = k * interval;
        for (long long j = 0; j < steps_per_interval; ++j) {
            const double t = t_k + j * dt_eff;
            record(t);
            if (j == 0) snapshot(t_k);

            stage(u, xbar, w, y, w1, t, r1);
            for (int i = 0; i < n; ++i) {
                u_s[i] = u[i] + dt_eff * r1.fu[i];
                w_s[i] = w[i] + dt_eff * r1.fw[i];
            }
            const double xb_s = xbar + dt_eff * r1.fxb;
            const double y_s = y + dt_eff * r1.fy;
            if (derivative_check) {
                for (int i = 0; i < n; ++i) w1_s[i] = w1[i] + dt_eff * r1.fw1[i];
            }
            stage(u_s, xb_s, w_s, y_s, w1_s, t + dt_eff, r2);
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                u[i] += 0.5 * dt_eff * (r1.fu[i] + r2.fu[i]);
                w[i] += 0.5 * dt_eff * (r1.fw[i] + r2.fw[i]);
                acc += u[i] + w[i];
            }
            xbar += 0.5 * dt_eff * (r1.fxb + r2.fxb);
            y += 0.5 * dt_eff * (r1.fy + r2.fy);
            if (derivative_check) {
                for (int i = 0; i < n; ++i) w1[i] += 0.5 * dt_eff * (r1.fw1[i] + r2.fw1[i]);
            }
            if (!std::isfinite(acc) || !std::isfinite(xbar) || !std::isfinite(y)) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "correction step lost finiteness at t = %.6g", t);
                throw blow_up_error(buf);
            }
            const argmax_result am = argmax_parabolic_raw(u.data(), n, grid.x_min, grid.h);
            for (int i = 0; i < n; ++i) u[i] -= am.value;
            pending_drift = am.value;
            pending_gap = std::abs(xbar - am.x);
        }
    }
    record(T);
    snapshot(T);
    return traj;
}

first_order_prediction assemble_first_order(const correction_trajectory& corr, double eps,
                                            const initial_data& init) {
    if (eps < 0.0) throw validation_error("assemble_first_order: eps must be nonnegative");
    first_order_prediction out;
    out.eps = eps;
    out.shift = 0.0;
    if (eps > 0.0) {
        if (!(init.r > 0.0)) {
            throw validation_error("assemble_first_order: the datum amplitude must be positive");
        }
        out.shift = eps * std::log(init.r_effective(eps) / std::sqrt(eps));
    }
    out.times = corr.limit.times;
    out.I.resize(out.times.size());
    out.xbar.resize(out.times.size());
    for (size_t i = 0; i < out.times.size(); ++i) {
        out.I[i] = corr.limit.I[i] + eps * corr.J[i];
        out.xbar[i] = corr.limit.xbar[i] + eps * corr.y[i];
    }
    out.snapshot_times = corr.snapshot_times;
    out.u.reserve(corr.w_snapshots.size());
    for (size_t k = 0; k < corr.w_snapshots.size(); ++k) {
        const grid_field& ul = corr.limit.snapshots[k].u;
        grid_field f(ul.grid);
        for (int i = 0; i < f.grid.n; ++i) {
            f.v[i] = ul.v[i] + eps * corr.w_snapshots[k].v[i] + out.shift;
        }
        out.u.push_back(std::move(f));
    }
    return out;
}

initial_data materialize_initial_data(const growth_model& model, const weight_fn& psi, double l1,
                                      double x_c, double r_or_auto, bool well_prepared,
                                      const grid1d& grid) {
    if (!(l1 > 0.0)) throw validation_error("materialize_initial_data: L1 must be positive");
    initial_data init;
    init.l1 = l1;
    init.x_c = x_c;
    init.r = r_or_auto > 0.0 ? r_or_auto : auto_amplitude(model, psi, l1, x_c);
    init.layer_coeff = 0.0;
    if (well_prepared) {
        const limit_state s = make_limit_state(model, init, grid);
        init.layer_coeff = compute_K(s, model, psi) / s.I;
    }
    return init;
}

} // namespace evo
