#pragma once

#include <string>
#include <vector>

#include "evo/corrections.hpp"
#include "evo/eps_solver.hpp"
#include "evo/harness.hpp"
#include "evo/limit_solver.hpp"
#include "evo/model.hpp"
#include "evo/moments.hpp"

namespace evo {

// 17-significant-digit decimal rendering, C locale; round-trips doubles.
std::string format_value(double v);

void ensure_output_dir(const std::string& dir);
std::string output_path(const std::string& dir, const std::string& stem,
                        const std::string& hash, const std::string& ext);
void write_text_file(const std::string& path, const std::string& content);

// CSV builders. Every file starts with a "# config <hash>" meta row followed
// by the header row. Values use format_value so reruns are byte-identical.
std::string validation_csv(const std::vector<assumption_check>& rows, const std::string& hash);
std::string eps_csv(const eps_trajectory& traj, const std::string& hash);
std::string limit_csv(const limit_trajectory& traj, const std::string& hash);
std::string corrections_csv(const correction_trajectory& traj, const std::string& hash);
std::string moments_csv(const moment_error_series& ms, const std::string& hash);
std::string report_csv(const convergence_report& rep);
std::string summary_csv(const convergence_report& rep);

struct plot_point {
    double eps = 0.0;
    double err = 0.0;
    bool floor_flag = false;
};

// Log-log scatter of per-eps errors with the fitted rate overlaid as a
// dashed line and its slope annotated. Deterministic bytes for fixed input.
std::string order_plot_svg(const std::string& quantity, const std::vector<plot_point>& pts,
                           const fit_result& fit);

} // namespace evo
