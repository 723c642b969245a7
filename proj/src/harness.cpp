#include "evo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>

#include "evo/moments.hpp"

namespace evo {

namespace {

struct restriction {
    long long stride = 1;
    long long offset = 0; // index of the fine domain's left edge in the eps grid
    int m = 0;            // number of common nodes
};

restriction make_restriction(const grid1d& ge, const grid1d& gf) {
    restriction r;
    r.stride = std::llround(ge.h / gf.h);
    if (r.stride < 1 || std::abs(r.stride * gf.h - ge.h) > 1e-12 * (1.0 + ge.h)) {
        throw validation_error(
            "error_norms: eps-grid spacing is not an integer multiple of the fine spacing");
    }
    r.offset = std::llround((gf.x_min - ge.x_min) / ge.h);
    if (r.offset < 0 || std::abs(ge.x_min + r.offset * ge.h - gf.x_min) > 1e-9) {
        throw validation_error("error_norms: fine domain does not sit on eps-grid nodes");
    }
    if ((gf.n - 1) % r.stride != 0) {
        throw validation_error("error_norms: fine grid does not restrict onto the eps grid");
    }
    r.m = (int)((gf.n - 1) / r.stride + 1);
    if (r.offset + r.m > ge.n) {
        throw validation_error("error_norms: fine domain extends past the eps grid");
    }
    return r;
}

} // namespace

error_norms_result error_norms(const eps_trajectory& eps_traj,
                               const correction_trajectory& corr, const growth_model& model,
                               const weight_fn& psi, const initial_data& init, double eps,
                               double trust_window, int k_max) {
    if (!(eps > 0.0)) throw validation_error("error_norms: eps must be positive");
    if (!(trust_window > 0.0)) throw validation_error("error_norms: window must be positive");
    const size_t ns = eps_traj.u_snapshots.size();
    if (ns != corr.snapshot_times.size()) {
        throw validation_error("error_norms: snapshot counts differ between trajectories");
    }
    const grid1d& ge = eps_traj.cfg.grid;
    const grid1d& gf = corr.limit.grid;
    const restriction rs = make_restriction(ge, gf);

    error_norms_result out;
    out.labels = {"intake0", "intake1", "trait0",      "trait1",
                  "potential0", "potential2", "constraint0", "constraint1"};
    out.errors.assign(out.labels.size(), 0.0);
    const double shift = eps * std::log(init.r_effective(eps) / std::sqrt(eps));

    std::vector<double> r0f(rs.m), r1f(rs.m), d1(rs.m), d2(rs.m);
    for (size_t s = 0; s < ns; ++s) {
        const double tE = eps_traj.snapshot_times[s];
        const double tL = corr.snapshot_times[s];
        if (std::abs(tE - tL) > 1e-9 * (1.0 + std::abs(tL))) {
            throw validation_error("error_norms: snapshot times are not aligned");
        }
        const int ie = eps_traj.snapshot_index[s];
        const int il = corr.snapshot_index[s];
        const limit_state& ls = corr.limit.snapshots[s];
        if (ls.xbar - trust_window < gf.x_min || ls.xbar + trust_window > gf.x_max) {
            throw validation_error("error_norms: trust window leaves the fine domain");
        }
        const double Ie = eps_traj.I_series[ie];
        const double xe = eps_traj.x_series[ie];
        const double Kv = corr.K[il];
        const double Jv = corr.J[il];
        const double yv = corr.y[il];
        const double Iopt_xe = optimal_intake(model, xe).I;

        auto bump = [&](int row, double v) { out.errors[row] = std::max(out.errors[row], v); };
        bump(0, std::abs(Ie - ls.I));
        bump(1, std::abs(Ie - ls.I - eps * Jv));
        bump(2, std::abs(xe - ls.xbar));
        bump(3, std::abs(xe - ls.xbar - eps * yv));
        bump(6, std::abs(Ie - Iopt_xe));
        bump(7, std::abs(Ie - Iopt_xe - eps * Kv));

        const grid_field& ue = eps_traj.u_snapshots[s];
        const grid_field& ul = ls.u;
        const grid_field& wl = corr.w_snapshots[s];
        for (int j = 0; j < rs.m; ++j) {
            const double diff = ue.v[rs.offset + j] - ul.v[j * rs.stride] - shift;
            r0f[j] = diff;
            r1f[j] = diff - eps * wl.v[j * rs.stride];
        }
        d1_into(r1f.data(), d1.data(), rs.m, ge.h);
        d2_into(r1f.data(), d2.data(), rs.m, ge.h);
        double e0 = 0.0, e2 = 0.0;
        for (int j = 0; j < rs.m; ++j) {
            const double xj = ge.x((int)(rs.offset + j));
            if (std::abs(xj - ls.xbar) > trust_window) continue;
            e0 = std::max(e0, std::abs(r0f[j]));
            e2 = std::max({e2, std::abs(r1f[j]), std::abs(d1[j]), std::abs(d2[j])});
        }
        bump(4, e0);
        bump(5, e2);
    }

    if (psi.is_constant()) {
        const moment_error_series ms = moment_errors(eps_traj, corr, psi, eps, k_max);
        for (size_t r = 0; r < ms.labels.size(); ++r) {
            out.labels.push_back(ms.labels[r]);
            out.errors.push_back(ms.sup[r]);
        }
    }
    return out;
}

fit_result fit_order(const std::vector<double>& eps, const std::vector<double>& errs) {
    if (eps.size() != errs.size()) {
        throw validation_error("fit_order: eps and error lists differ in length");
    }
    std::vector<double> L, E;
    for (size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw validation_error("fit_order: eps values must be positive");
        if (errs[i] > 0.0 && std::isfinite(errs[i])) {
            L.push_back(std::log(eps[i]));
            E.push_back(std::log(errs[i]));
        }
    }
    fit_result fr;
    fr.n_used = (int)L.size();
    if (fr.n_used < 3) {
        fr.no_fit = true;
        return fr;
    }
    double mL = 0.0, mE = 0.0;
    for (int i = 0; i < fr.n_used; ++i) {
        mL += L[i];
        mE += E[i];
    }
    mL /= fr.n_used;
    mE /= fr.n_used;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < fr.n_used; ++i) {
        sxx += (L[i] - mL) * (L[i] - mL);
        sxy += (L[i] - mL) * (E[i] - mE);
        syy += (E[i] - mE) * (E[i] - mE);
    }
    fr.order = sxy / sxx;
    fr.intercept = mE - fr.order * mL;
    double ss_res = 0.0;
    for (int i = 0; i < fr.n_used; ++i) {
        const double fit = fr.intercept + fr.order * L[i];
        ss_res += (E[i] - fit) * (E[i] - fit);
    }
    fr.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fr.floor_flag = fr.order < 0.3;
    return fr;
}

namespace {

struct eps_job_result {
    error_norms_result norms;
    bounds_report bounds;
    bool bounds_valid = false;
    std::string failure;
};

} // namespace

convergence_report run_sweep(const run_config& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    const growth_model model = cfg.make_model();
    const weight_fn psi = cfg.make_psi();
    const grid1d grid = cfg.make_grid();
    const grid1d fine = cfg.make_limit_grid();
    const initial_data init =
        materialize_initial_data(model, psi, cfg.init.L1, cfg.init.x_c,
                                 cfg.init.r_auto ? 0.0 : cfg.init.r, cfg.init.well_prepared, fine);

    const double eps_min = cfg.sweep.eps_list.back();
    if (grid.h > 0.2 * std::sqrt(eps_min) + 1e-15) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "run_sweep: grid spacing %.6g cannot resolve sqrt(eps) = %.6g "
                      "(need h <= 0.2 sqrt(eps))",
                      grid.h, std::sqrt(eps_min));
        throw validation_error(buf);
    }
    if (cfg.sweep.refine_check && cfg.limit.refine % 2 != 0) {
        throw validation_error(
            "run_sweep: the refine pass needs an even limit.refine so the halved eps grid "
            "still restricts onto the fine grid");
    }

    convergence_report rep;
    rep.config_hash = cfg.hash_hex();
    rep.trust_window = cfg.sweep.trust_window;
    rep.corr = run_corrections(model, psi, init, fine, cfg.time.T,
                               cfg.limit.dt_auto ? 0.0 : cfg.limit.dt, cfg.time.snapshots,
                               cfg.corrections.derivative_check);

    const bool llf = cfg.scheme.flux == "llf";
    const grid1d grid_refined = grid1d::make(grid.x_min, grid.x_max, 2 * (grid.n - 1) + 1);
    const correction_trajectory& corr = rep.corr;

    auto job = [&](double eps, const grid1d& g) -> eps_job_result {
        eps_job_result r;
        try {
            eps_config ec;
            ec.eps = eps;
            ec.T = cfg.time.T;
            ec.dt = cfg.time.dt_auto ? 0.0 : cfg.time.dt;
            ec.snapshots = cfg.time.snapshots;
            ec.grid = g;
            ec.llf = llf;
            const eps_trajectory traj = run_eps(ec, model, psi, init);
            r.norms = error_norms(traj, corr, model, psi, init, eps, cfg.sweep.trust_window,
                                  cfg.moments.k_max);
            r.bounds = check_bounds(traj, model, init, cfg.sweep.trust_window);
            r.bounds_valid = true;
        } catch (const std::exception& e) {
            r.failure = e.what();
        }
        return r;
    };

    const size_t ne = cfg.sweep.eps_list.size();
    std::vector<std::future<eps_job_result>> base_jobs(ne), fine_jobs;
    if (cfg.sweep.refine_check) fine_jobs.resize(ne);
    for (size_t i = 0; i < ne; ++i) {
        const double eps = cfg.sweep.eps_list[i];
        base_jobs[i] = std::async(std::launch::async, job, eps, grid);
        if (cfg.sweep.refine_check) {
            fine_jobs[i] = std::async(std::launch::async, job, eps, grid_refined);
        }
    }

    std::vector<eps_job_result> base(ne), refined(ne);
    for (size_t i = 0; i < ne; ++i) {
        base[i] = base_jobs[i].get();
        if (cfg.sweep.refine_check) refined[i] = fine_jobs[i].get();
    }

    bool bounds_started = false;
    auto fold_bounds = [&](const bounds_report& b) {
        rep.bounds.positivity_violations += b.positivity_violations;
        rep.bounds.intake_violations += b.intake_violations;
        rep.bounds.concavity_violations += b.concavity_violations;
        if (!bounds_started) {
            rep.bounds.intake_min = b.intake_min;
            rep.bounds.intake_max = b.intake_max;
            rep.bounds.d2_min = b.d2_min;
            rep.bounds.d2_max = b.d2_max;
            rep.bounds.intake_cap = b.intake_cap;
            rep.bounds.d2_band_lo = b.d2_band_lo;
            rep.bounds.d2_band_hi = b.d2_band_hi;
            bounds_started = true;
        } else {
            rep.bounds.intake_min = std::min(rep.bounds.intake_min, b.intake_min);
            rep.bounds.intake_max = std::max(rep.bounds.intake_max, b.intake_max);
            rep.bounds.d2_min = std::min(rep.bounds.d2_min, b.d2_min);
            rep.bounds.d2_max = std::max(rep.bounds.d2_max, b.d2_max);
        }
    };

    std::vector<std::string> labels;
    for (size_t i = 0; i < ne; ++i) {
        const double eps = cfg.sweep.eps_list[i];
        char loc[64];
        if (!base[i].failure.empty()) {
            std::snprintf(loc, sizeof loc, "eps = %g: ", eps);
            rep.failures.push_back(loc + base[i].failure);
            continue;
        }
        if (labels.empty()) labels = base[i].norms.labels;
        if (base[i].bounds_valid) {
            fold_bounds(base[i].bounds);
            rep.run_bounds.push_back(base[i].bounds);
        }
        const bool have_refined = cfg.sweep.refine_check && refined[i].failure.empty();
        if (cfg.sweep.refine_check && !refined[i].failure.empty()) {
            std::snprintf(loc, sizeof loc, "eps = %g (refined): ", eps);
            rep.failures.push_back(loc + refined[i].failure);
        }
        if (have_refined && refined[i].bounds_valid) fold_bounds(refined[i].bounds);
        for (size_t q = 0; q < base[i].norms.labels.size(); ++q) {
            sweep_row row;
            row.quantity = base[i].norms.labels[q];
            row.eps = eps;
            row.h = grid.h;
            row.error = base[i].norms.errors[q];
            if (have_refined) {
                row.error_refined = refined[i].norms.errors[q];
                const double change = std::abs(row.error - row.error_refined) /
                                      std::max(std::abs(row.error), 1e-300);
                row.floor_flag = change > 0.25;
            }
            rep.rows.push_back(row);
        }
    }

    for (const std::string& q : labels) {
        std::vector<double> es, vs;
        for (const sweep_row& row : rep.rows) {
            if (row.quantity == q && !row.floor_flag) {
                es.push_back(row.eps);
                vs.push_back(row.error);
            }
        }
        sweep_summary sm;
        sm.quantity = q;
        sm.fit = fit_order(es, vs);
        rep.summaries.push_back(sm);
    }

    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
}

} // namespace evo
