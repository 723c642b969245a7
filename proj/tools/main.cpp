#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "evo/config.hpp"
#include "evo/corrections.hpp"
#include "evo/emit.hpp"
#include "evo/eps_solver.hpp"
#include "evo/errors.hpp"
#include "evo/harness.hpp"
#include "evo/limit_solver.hpp"
#include "evo/model.hpp"
#include "evo/moments.hpp"

namespace {

using namespace evo;

struct timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string fmt_eps(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", eps);
    return buf;
}

run_config load_config(const std::string& preset, const std::string& config_path,
                       const std::string& out_override) {
    if (preset.empty() == config_path.empty()) {
        throw validation_error("pass exactly one of --preset or --config");
    }
    run_config cfg;
    if (!preset.empty()) {
        const char* text = preset_text(preset);
        if (!text) {
            std::string names;
            for (const std::string& n : preset_names()) {
                if (!names.empty()) names += ", ";
                names += n;
            }
            throw validation_error("unknown preset '" + preset + "' (have: " + names + ")");
        }
        cfg = parse_config_text(text, "preset:" + preset);
    } else {
        cfg = parse_config_file(config_path);
    }
    if (!out_override.empty()) cfg.output.dir = out_override;
    return cfg;
}

struct run_context {
    run_config cfg;
    growth_model model;
    weight_fn psi;
    grid1d grid;
    grid1d fine;
    initial_data init;
    std::string hash;
    std::vector<assumption_check> checks;
};

run_context make_context(const run_config& cfg) {
    run_context ctx;
    ctx.cfg = cfg;
    ctx.model = cfg.make_model();
    ctx.psi = cfg.make_psi();
    ctx.grid = cfg.make_grid();
    ctx.fine = cfg.make_limit_grid();
    ctx.init = materialize_initial_data(ctx.model, ctx.psi, cfg.init.L1, cfg.init.x_c,
                                        cfg.init.r_auto ? 0.0 : cfg.init.r,
                                        cfg.init.well_prepared, ctx.fine);
    ctx.hash = cfg.hash_hex();
    ctx.checks =
        validate_assumptions(ctx.model, ctx.psi, ctx.init, ctx.grid, cfg.sweep.eps_list);
    return ctx;
}

void require_assumptions(const run_context& ctx) {
    std::string bad;
    for (const assumption_check& c : ctx.checks) {
        if (!c.pass) {
            if (!bad.empty()) bad += ", ";
            bad += c.id;
        }
    }
    if (!bad.empty()) throw validation_error("assumption checks failed: " + bad);
}

int cmd_validate(const run_context& ctx) {
    ensure_output_dir(ctx.cfg.output.dir);
    write_text_file(output_path(ctx.cfg.output.dir, "validation", ctx.hash, "csv"),
                    validation_csv(ctx.checks, ctx.hash));
    for (const assumption_check& c : ctx.checks) {
        std::printf("%-20s %s  %s = %.12g\n", c.id.c_str(), c.pass ? "pass" : "FAIL",
                    c.constant_name.c_str(), c.value);
    }
    std::printf("config %s\n", ctx.hash.c_str());
    return all_pass(ctx.checks) ? exit_ok : exit_validation;
}

int cmd_run_eps(const run_context& ctx) {
    require_assumptions(ctx);
    ensure_output_dir(ctx.cfg.output.dir);
    for (double eps : ctx.cfg.sweep.eps_list) {
        timer tm;
        eps_config ec;
        ec.eps = eps;
        ec.T = ctx.cfg.time.T;
        ec.dt = ctx.cfg.time.dt_auto ? 0.0 : ctx.cfg.time.dt;
        ec.snapshots = ctx.cfg.time.snapshots;
        ec.grid = ctx.grid;
        ec.llf = ctx.cfg.scheme.flux == "llf";
        const eps_trajectory traj = run_eps(ec, ctx.model, ctx.psi, ctx.init);
        const bounds_report b = check_bounds(traj, ctx.model, ctx.init,
                                             ctx.cfg.sweep.trust_window);
        write_text_file(
            output_path(ctx.cfg.output.dir, "eps_" + fmt_eps(eps), ctx.hash, "csv"),
            eps_csv(traj, ctx.hash));
        const int viol =
            b.positivity_violations + b.intake_violations + b.concavity_violations;
        std::printf("eps=%-7s I(T)=%.10f x(T)=%.3e bounds=%s wall=%.1fs\n",
                    fmt_eps(eps).c_str(), traj.I_series.back(), traj.x_series.back(),
                    viol == 0 ? "clean" : "VIOLATED", tm.seconds());
    }
    return exit_ok;
}

int cmd_run_limit(const run_context& ctx) {
    require_assumptions(ctx);
    ensure_output_dir(ctx.cfg.output.dir);
    timer tm;
    const limit_trajectory traj =
        run_limit(ctx.model, ctx.init, ctx.fine, ctx.cfg.time.T,
                  ctx.cfg.limit.dt_auto ? 0.0 : ctx.cfg.limit.dt, ctx.cfg.time.snapshots);
    write_text_file(output_path(ctx.cfg.output.dir, "limit", ctx.hash, "csv"),
                    limit_csv(traj, ctx.hash));
    std::printf("xbar(T)=%.10f I(T)=%.10f max_drift=%.3e max_gap=%.3e wall=%.1fs\n",
                traj.xbar.back(), traj.I.back(), traj.max_drift, traj.max_gap, tm.seconds());
    return exit_ok;
}

int cmd_run_corrections(const run_context& ctx) {
    require_assumptions(ctx);
    ensure_output_dir(ctx.cfg.output.dir);
    timer tm;
    const correction_trajectory corr = run_corrections(
        ctx.model, ctx.psi, ctx.init, ctx.fine, ctx.cfg.time.T,
        ctx.cfg.limit.dt_auto ? 0.0 : ctx.cfg.limit.dt, ctx.cfg.time.snapshots,
        ctx.cfg.corrections.derivative_check);
    write_text_file(output_path(ctx.cfg.output.dir, "corrections", ctx.hash, "csv"),
                    corrections_csv(corr, ctx.hash));
    write_text_file(output_path(ctx.cfg.output.dir, "limit", ctx.hash, "csv"),
                    limit_csv(corr.limit, ctx.hash));
    std::printf("K(0)=%.10f K(T)=%.10f J(T)=%.10f y(T)=%.3e identity_gap=%.3e", corr.K.front(),
                corr.K.back(), corr.J.back(), corr.y.back(), corr.max_identity_gap);
    if (corr.derivative_route_gap >= 0.0) {
        std::printf(" derivative_gap=%.3e", corr.derivative_route_gap);
    }
    std::printf(" wall=%.1fs\n", tm.seconds());
    return exit_ok;
}

int cmd_moments(const run_context& ctx) {
    require_assumptions(ctx);
    if (!ctx.psi.is_constant()) {
        throw validation_error("moments: moment expansions require a constant weight");
    }
    ensure_output_dir(ctx.cfg.output.dir);
    const correction_trajectory corr = run_corrections(
        ctx.model, ctx.psi, ctx.init, ctx.fine, ctx.cfg.time.T,
        ctx.cfg.limit.dt_auto ? 0.0 : ctx.cfg.limit.dt, ctx.cfg.time.snapshots,
        ctx.cfg.corrections.derivative_check);
    for (double eps : ctx.cfg.sweep.eps_list) {
        timer tm;
        eps_config ec;
        ec.eps = eps;
        ec.T = ctx.cfg.time.T;
        ec.dt = ctx.cfg.time.dt_auto ? 0.0 : ctx.cfg.time.dt;
        ec.snapshots = ctx.cfg.time.snapshots;
        ec.grid = ctx.grid;
        ec.llf = ctx.cfg.scheme.flux == "llf";
        const eps_trajectory traj = run_eps(ec, ctx.model, ctx.psi, ctx.init);
        const moment_error_series ms =
            moment_errors(traj, corr, ctx.psi, eps, ctx.cfg.moments.k_max);
        write_text_file(
            output_path(ctx.cfg.output.dir, "moments_" + fmt_eps(eps), ctx.hash, "csv"),
            moments_csv(ms, ctx.hash));
        std::printf("eps=%-7s", fmt_eps(eps).c_str());
        for (size_t r = 0; r < ms.labels.size(); ++r) {
            std::printf(" %s=%.3e", ms.labels[r].c_str(), ms.sup[r]);
        }
        std::printf(" wall=%.1fs\n", tm.seconds());
    }
    return exit_ok;
}

int cmd_sweep(const run_context& ctx) {
    require_assumptions(ctx);
    ensure_output_dir(ctx.cfg.output.dir);
    const convergence_report rep = run_sweep(ctx.cfg);
    write_text_file(output_path(ctx.cfg.output.dir, "report", rep.config_hash, "csv"),
                    report_csv(rep));
    write_text_file(output_path(ctx.cfg.output.dir, "summary", rep.config_hash, "csv"),
                    summary_csv(rep));
    if (ctx.cfg.output.emit_svg) {
        for (const sweep_summary& sm : rep.summaries) {
            std::vector<plot_point> pts;
            for (const sweep_row& r : rep.rows) {
                if (r.quantity == sm.quantity) pts.push_back({r.eps, r.error, r.floor_flag});
            }
            write_text_file(
                output_path(ctx.cfg.output.dir, "sweep_" + sm.quantity, rep.config_hash, "svg"),
                order_plot_svg(sm.quantity, pts, sm.fit));
        }
    }
    for (const sweep_summary& sm : rep.summaries) {
        if (sm.fit.no_fit) {
            std::printf("%-12s no fit (%d usable points)\n", sm.quantity.c_str(),
                        sm.fit.n_used);
        } else {
            std::printf("%-12s order=%.3f intercept=%.3f r2=%.4f n=%d%s\n", sm.quantity.c_str(),
                        sm.fit.order, sm.fit.intercept, sm.fit.r2, sm.fit.n_used,
                        sm.fit.floor_flag ? " [floor]" : "");
        }
    }
    const long long viol = rep.bounds.positivity_violations + rep.bounds.intake_violations +
                           rep.bounds.concavity_violations;
    std::printf("bounds: %s (intake in [%.4f, %.4f] cap %.4f; curvature in [%.4f, %.4f] band "
                "[%.4f, %.4f])\n",
                viol == 0 ? "clean" : "VIOLATED", rep.bounds.intake_min, rep.bounds.intake_max,
                rep.bounds.intake_cap, rep.bounds.d2_min, rep.bounds.d2_max,
                rep.bounds.d2_band_lo, rep.bounds.d2_band_hi);
    for (const std::string& f : rep.failures) std::printf("skipped: %s\n", f.c_str());
    std::printf("config %s wall=%.1fs\n", rep.config_hash.c_str(), rep.wall_seconds);
    return rep.rows.empty() && !rep.failures.empty() ? exit_failure : exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Concentration asymptotics for a nonlocal selection-mutation model"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string preset, config_path, out_override;
    app.add_option("--preset", preset, "Bundled preset name (see --list-presets)");
    app.add_option("--config", config_path, "Path to a key-value config file");
    app.add_option("--out", out_override, "Override output.dir from the config");
    app.add_flag_callback(
        "--list-presets",
        [] {
            for (const std::string& n : evo::preset_names()) std::printf("%s\n", n.c_str());
            throw CLI::Success{};
        },
        "Print bundled preset names and exit");

    CLI::App* sub_validate =
        app.add_subcommand("validate", "Check standing assumptions, write the validation table");
    CLI::App* sub_eps =
        app.add_subcommand("run-eps", "Run the scaled solver for each eps in sweep.eps_list");
    CLI::App* sub_limit = app.add_subcommand("run-limit", "Run the constrained limit system");
    CLI::App* sub_corr = app.add_subcommand(
        "run-corrections", "Run the limit system with first-order corrections");
    CLI::App* sub_moments =
        app.add_subcommand("moments", "Compare numeric and asymptotic phenotypic moments");
    CLI::App* sub_sweep =
        app.add_subcommand("sweep", "Full eps-sweep with error norms and order fits");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const run_config cfg = load_config(preset, config_path, out_override);
        const run_context ctx = make_context(cfg);
        if (sub_validate->parsed()) return cmd_validate(ctx);
        if (sub_eps->parsed()) return cmd_run_eps(ctx);
        if (sub_limit->parsed()) return cmd_run_limit(ctx);
        if (sub_corr->parsed()) return cmd_run_corrections(ctx);
        if (sub_moments->parsed()) return cmd_moments(ctx);
        if (sub_sweep->parsed()) return cmd_sweep(ctx);
        return evo::exit_failure;
    } catch (const evo::validation_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return evo::exit_validation;
    } catch (const evo::blow_up_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return evo::exit_blow_up;
    } catch (const evo::boundary_contact_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return evo::exit_boundary_contact;
    } catch (const evo::degeneracy_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return evo::exit_degeneracy;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return evo::exit_failure;
    }
}
