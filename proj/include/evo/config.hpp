#pragma once

#include <string>
#include <vector>

#include "evo/grid.hpp"
#include "evo/model.hpp"

namespace evo {

// Flat "section.key = value" configuration. Unknown keys are rejected and all
// problems in a file are reported together, with line numbers.
struct run_config {
    struct model_cfg {
        double r0 = 1.0;
        double a = 1.0;
        double b = 1.0;
        double theta = 0.0;
        double perturbation_amp = 0.0;
        double perturbation_center = 0.25;
        double perturbation_width = 0.35;
    } model;

    struct psi_cfg {
        std::string kind = "constant";
        double amp = 0.0;
        double center = 0.0;
        double width = 1.0;
    } psi;

    struct init_cfg {
        double L1 = 0.5;
        double x_c = 0.0;
        double r = 0.0;
        bool r_auto = true;
        bool well_prepared = true;
    } init;

    struct grid_cfg {
        double x_min = -4.0;
        double x_max = 4.0;
        int n = 1601;
    } grid;

    struct time_cfg {
        double T = 1.0;
        double dt = 0.0;
        bool dt_auto = true;
        int snapshots = 20;
    } time;

    struct scheme_cfg {
        std::string flux = "centered";
    } scheme;

    struct limit_cfg {
        double x_min = -2.0;
        double x_max = 2.0;
        int refine = 4;
        double dt = 0.0;
        bool dt_auto = true;
    } limit;

    struct sweep_cfg {
        std::vector<double> eps_list{0.08, 0.04, 0.02, 0.01};
        double trust_window = 1.0;
        bool refine_check = true;
    } sweep;

    struct corrections_cfg {
        bool derivative_check = false;
    } corrections;

    struct moments_cfg {
        int k_max = 5;
    } moments;

    struct output_cfg {
        std::string dir = "out";
        bool emit_svg = false;
    } output;

    growth_model make_model() const;
    weight_fn make_psi() const;
    grid1d make_grid() const;
    // The refined grid the limit and correction systems run on. Its spacing is
    // the eps-grid spacing divided by limit.refine, and its endpoints must sit
    // on eps-grid nodes so fields restrict onto the coarse grid by striding.
    grid1d make_limit_grid() const;

    std::string canonical_text() const;
    std::string hash_hex() const;
};

run_config parse_config_text(const std::string& text, const std::string& origin);
run_config parse_config_file(const std::string& path);

// Bundled presets, embedded at build time.
std::vector<std::string> preset_names();
const char* preset_text(const std::string& name);

std::string fnv1a_hex(const std::string& bytes);

} // namespace evo
