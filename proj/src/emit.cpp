#include "evo/emit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

namespace evo {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ensure_output_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw validation_error("cannot create output directory '" + dir + "': " + ec.message());
    }
}

std::string output_path(const std::string& dir, const std::string& stem,
                        const std::string& hash, const std::string& ext) {
    return dir + "/" + stem + "_" + hash + "." + ext;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw validation_error("cannot open '" + path + "' for writing");
    const size_t written = std::fwrite(content.data(), 1, content.size(), f);
    const int rc = std::fclose(f);
    if (written != content.size() || rc != 0) {
        throw validation_error("short write to '" + path + "'");
    }
}

namespace {

void append_meta(std::string& s, const std::string& hash) {
    s += "# config ";
    s += hash;
    s += "\n";
}

void append_row(std::string& s, const std::vector<double>& vals) {
    for (size_t i = 0; i < vals.size(); ++i) {
        if (i) s += ',';
        s += format_value(vals[i]);
    }
    s += '\n';
}

} // namespace

std::string validation_csv(const std::vector<assumption_check>& rows, const std::string& hash) {
    std::string s;
    append_meta(s, hash);
    s += "assumption_id,pass,constant,value\n";
    for (const assumption_check& r : rows) {
        s += r.id;
        s += r.pass ? ",1," : ",0,";
        s += r.constant_name;
        s += ',';
        s += format_value(r.value);
        s += '\n';
    }
    return s;
}

std::string eps_csv(const eps_trajectory& traj, const std::string& hash) {
    std::string s;
    append_meta(s, hash);
    s += "t,intake,trait,max_potential,curvature_at_max\n";
    for (size_t i = 0; i < traj.times.size(); ++i) {
        append_row(s, {traj.times[i], traj.I_series[i], traj.x_series[i], traj.max_u_series[i],
                       traj.d2_at_max_series[i]});
    }
    return s;
}

std::string limit_csv(const limit_trajectory& traj, const std::string& hash) {
    std::string s;
    append_meta(s, hash);
    s += "t,xbar,intake,d2u_at_xbar,d3u_at_xbar,constraint_drift,argmax_gap\n";
    for (size_t i = 0; i < traj.times.size(); ++i) {
        append_row(s, {traj.times[i], traj.xbar[i], traj.I[i], traj.d2u[i], traj.d3u[i],
                       traj.drift[i], traj.gap[i]});
    }
    return s;
}

std::string corrections_csv(const correction_trajectory& traj, const std::string& hash) {
    std::string s;
    append_meta(s, hash);
    s += "t,K,y,J,w_at_xbar,dw_at_xbar,d2w_at_xbar\n";
    for (size_t i = 0; i < traj.times.size(); ++i) {
        append_row(s, {traj.times[i], traj.K[i], traj.y[i], traj.J[i], traj.w_at_xbar[i],
                       traj.dw_at_xbar[i], traj.d2w_at_xbar[i]});
    }
    return s;
}

std::string moments_csv(const moment_error_series& ms, const std::string& hash) {
    std::string s;
    append_meta(s, hash);
    const int k_max = (int)ms.labels.size();
    s += "t,m1_eps";
    for (int k = 2; k <= k_max; ++k) s += ",mc" + std::to_string(k) + "_eps";
    s += ",m1_pred";
    for (int k = 2; k <= k_max; ++k) s += ",mc" + std::to_string(k) + "_pred";
    for (int k = 1; k <= k_max; ++k) s += ",err_" + ms.labels[k - 1];
    s += '\n';
    for (size_t i = 0; i < ms.times.size(); ++i) {
        std::vector<double> row{ms.times[i], ms.m1_eps[i]};
        for (int k = 2; k <= k_max; ++k) row.push_back(ms.mc_eps[k - 2][i]);
        row.push_back(ms.m1_pred[i]);
        for (int k = 2; k <= k_max; ++k) row.push_back(ms.mc_pred[k - 2][i]);
        for (int k = 1; k <= k_max; ++k) row.push_back(ms.err[k - 1][i]);
        append_row(s, row);
    }
    return s;
}

std::string report_csv(const convergence_report& rep) {
    std::string s;
    append_meta(s, rep.config_hash);
    s += "quantity,eps,error,h,floor_flag\n";
    for (const sweep_row& r : rep.rows) {
        s += r.quantity;
        s += ',';
        s += format_value(r.eps);
        s += ',';
        s += format_value(r.error);
        s += ',';
        s += format_value(r.h);
        s += r.floor_flag ? ",1\n" : ",0\n";
    }
    return s;
}

std::string summary_csv(const convergence_report& rep) {
    std::string s;
    append_meta(s, rep.config_hash);
    s += "quantity,fitted_order,intercept,r2\n";
    for (const sweep_summary& sm : rep.summaries) {
        if (sm.fit.no_fit) continue;
        s += sm.quantity;
        s += ',';
        s += format_value(sm.fit.order);
        s += ',';
        s += format_value(sm.fit.intercept);
        s += ',';
        s += format_value(sm.fit.r2);
        s += '\n';
    }
    return s;
}

namespace {

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

} // namespace

std::string order_plot_svg(const std::string& quantity, const std::vector<plot_point>& pts,
                           const fit_result& fit) {
    std::vector<plot_point> usable;
    for (const plot_point& p : pts) {
        if (p.eps > 0.0 && p.err > 0.0 && std::isfinite(p.err)) usable.push_back(p);
    }
    if (usable.empty()) {
        throw validation_error("order_plot_svg: nothing to plot for '" + quantity + "'");
    }
    const double W = 640.0, H = 480.0, L = 80.0, R = 24.0, T = 48.0, B = 64.0;
    double lx_min = std::log10(usable[0].eps), lx_max = lx_min;
    double ly_min = std::log10(usable[0].err), ly_max = ly_min;
    for (const plot_point& p : usable) {
        lx_min = std::min(lx_min, std::log10(p.eps));
        lx_max = std::max(lx_max, std::log10(p.eps));
        ly_min = std::min(ly_min, std::log10(p.err));
        ly_max = std::max(ly_max, std::log10(p.err));
    }
    if (lx_max - lx_min < 1e-9) {
        lx_min -= 0.5;
        lx_max += 0.5;
    }
    if (ly_max - ly_min < 1e-9) {
        ly_min -= 0.5;
        ly_max += 0.5;
    }
    const double padx = 0.06 * (lx_max - lx_min), pady = 0.08 * (ly_max - ly_min);
    lx_min -= padx;
    lx_max += padx;
    ly_min -= pady;
    ly_max += pady;
    auto X = [&](double lx) { return L + (lx - lx_min) / (lx_max - lx_min) * (W - L - R); };
    auto Y = [&](double ly) { return H - B - (ly - ly_min) / (ly_max - ly_min) * (H - T - B); };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
    s += "<rect width=\"640\" height=\"480\" fill=\"#ffffff\"/>\n";
    s += "<text x=\"320\" y=\"28\" font-family=\"sans-serif\" font-size=\"16\" "
         "text-anchor=\"middle\">" +
         quantity + "</text>\n";
    s += "<rect x=\"" + fmt2(L) + "\" y=\"" + fmt2(T) + "\" width=\"" + fmt2(W - L - R) +
         "\" height=\"" + fmt2(H - T - B) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    for (const plot_point& p : usable) {
        const double x = X(std::log10(p.eps));
        s += "<line x1=\"" + fmt2(x) + "\" y1=\"" + fmt2(H - B) + "\" x2=\"" + fmt2(x) +
             "\" y2=\"" + fmt2(H - B + 5) + "\" stroke=\"#333333\"/>\n";
        s += "<text x=\"" + fmt2(x) + "\" y=\"" + fmt2(H - B + 20) +
             "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
             fmt_tick(p.eps) + "</text>\n";
    }
    for (int k = 0; k <= 3; ++k) {
        const double ly = ly_min + (ly_max - ly_min) * k / 3.0;
        const double y = Y(ly);
        s += "<line x1=\"" + fmt2(L - 5) + "\" y1=\"" + fmt2(y) + "\" x2=\"" + fmt2(L) +
             "\" y2=\"" + fmt2(y) + "\" stroke=\"#333333\"/>\n";
        s += "<text x=\"" + fmt2(L - 8) + "\" y=\"" + fmt2(y + 4) +
             "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" +
             fmt_tick(std::pow(10.0, ly)) + "</text>\n";
    }
    s += "<text x=\"" + fmt2((L + W - R) / 2) + "\" y=\"" + fmt2(H - 16) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">eps</text>\n";
    s += "<text x=\"20\" y=\"" + fmt2((T + H - B) / 2) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 20 " +
         fmt2((T + H - B) / 2) + ")\">sup error</text>\n";

    if (!fit.no_fit) {
        const double ln10 = std::log(10.0);
        auto lyfit = [&](double lx) { return (fit.intercept + fit.order * lx * ln10) / ln10; };
        const double x1 = lx_min + padx, x2 = lx_max - padx;
        s += "<line x1=\"" + fmt2(X(x1)) + "\" y1=\"" + fmt2(Y(lyfit(x1))) + "\" x2=\"" +
             fmt2(X(x2)) + "\" y2=\"" + fmt2(Y(lyfit(x2))) +
             "\" stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
        s += "<text x=\"" + fmt2(W - R - 8) + "\" y=\"" + fmt2(T + 20) +
             "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"end\" "
             "fill=\"#d62728\">slope " +
             fmt2(fit.order) + "</text>\n";
    }
    for (const plot_point& p : usable) {
        const double x = X(std::log10(p.eps)), y = Y(std::log10(p.err));
        if (p.floor_flag) {
            s += "<circle cx=\"" + fmt2(x) + "\" cy=\"" + fmt2(y) +
                 "\" r=\"4\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n";
        } else {
            s += "<circle cx=\"" + fmt2(x) + "\" cy=\"" + fmt2(y) +
                 "\" r=\"4\" fill=\"#1f77b4\"/>\n";
        }
    }
    s += "</svg>\n";
    return s;
}

} // namespace evo
