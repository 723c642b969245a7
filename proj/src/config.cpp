#include "evo/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "evo/presets.hpp"

namespace evo {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_int(const std::string& s, int& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size()) return false;
    out = (int)v;
    return (long)out == v;
}

bool parse_bool(const std::string& s, bool& out) {
    if (s == "true") {
        out = true;
        return true;
    }
    if (s == "false") {
        out = false;
        return true;
    }
    return false;
}

bool parse_list(const std::string& s, std::vector<double>& out) {
    out.clear();
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v;
        if (!parse_double(trim(item), v)) return false;
        out.push_back(v);
    }
    return !out.empty();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct parse_state {
    run_config cfg;
    std::vector<std::string> errors;

    void fail(int line, const std::string& msg) {
        errors.push_back("line " + std::to_string(line) + ": " + msg);
    }
};

void apply_key(parse_state& st, int line, const std::string& key, const std::string& value) {
    run_config& c = st.cfg;
    auto num = [&](double& slot) {
        if (!parse_double(value, slot)) st.fail(line, "expected a number for '" + key + "', got '" + value + "'");
    };
    auto integer = [&](int& slot) {
        if (!parse_int(value, slot)) st.fail(line, "expected an integer for '" + key + "', got '" + value + "'");
    };
    auto boolean = [&](bool& slot) {
        if (!parse_bool(value, slot)) st.fail(line, "expected true/false for '" + key + "', got '" + value + "'");
    };
    auto num_or_auto = [&](double& slot, bool& auto_flag) {
        if (value == "auto") {
            auto_flag = true;
            slot = 0.0;
        } else {
            auto_flag = false;
            num(slot);
        }
    };

    if (key == "model.r0") num(c.model.r0);
    else if (key == "model.a") num(c.model.a);
    else if (key == "model.b") num(c.model.b);
    else if (key == "model.theta") num(c.model.theta);
    else if (key == "model.perturbation_amp") num(c.model.perturbation_amp);
    else if (key == "model.perturbation_center") num(c.model.perturbation_center);
    else if (key == "model.perturbation_width") num(c.model.perturbation_width);
    else if (key == "psi.kind") c.psi.kind = value;
    else if (key == "psi.amp") num(c.psi.amp);
    else if (key == "psi.center") num(c.psi.center);
    else if (key == "psi.width") num(c.psi.width);
    else if (key == "init.L1") num(c.init.L1);
    else if (key == "init.x_c") num(c.init.x_c);
    else if (key == "init.r") num_or_auto(c.init.r, c.init.r_auto);
    else if (key == "init.well_prepared") boolean(c.init.well_prepared);
    else if (key == "grid.x_min") num(c.grid.x_min);
    else if (key == "grid.x_max") num(c.grid.x_max);
    else if (key == "grid.n") integer(c.grid.n);
    else if (key == "time.T") num(c.time.T);
    else if (key == "time.dt_rule") num_or_auto(c.time.dt, c.time.dt_auto);
    else if (key == "time.snapshots") integer(c.time.snapshots);
    else if (key == "scheme.flux") c.scheme.flux = value;
    else if (key == "limit.x_min") num(c.limit.x_min);
    else if (key == "limit.x_max") num(c.limit.x_max);
    else if (key == "limit.refine") integer(c.limit.refine);
    else if (key == "limit.dt_rule") num_or_auto(c.limit.dt, c.limit.dt_auto);
    else if (key == "sweep.eps_list") {
        if (!parse_list(value, c.sweep.eps_list)) {
            st.fail(line, "expected a comma-separated number list for '" + key + "'");
        }
    } else if (key == "sweep.trust_window") num(c.sweep.trust_window);
    else if (key == "sweep.refine_check") boolean(c.sweep.refine_check);
    else if (key == "corrections.derivative_check") boolean(c.corrections.derivative_check);
    else if (key == "moments.k_max") integer(c.moments.k_max);
    else if (key == "output.dir") c.output.dir = value;
    else if (key == "output.emit_svg") boolean(c.output.emit_svg);
    else st.fail(line, "unknown key '" + key + "'");
}

void validate_config(parse_state& st) {
    const run_config& c = st.cfg;
    auto fail = [&st](const std::string& msg) { st.errors.push_back(msg); };

    if (!(c.model.a > 0.0)) fail("model.a = " + fmt(c.model.a) + " violates growth_concavity (must be positive)");
    if (!(c.model.b > 0.0)) fail("model.b = " + fmt(c.model.b) + " violates intake_sensitivity (must be positive)");
    if (c.model.perturbation_amp != 0.0 && !(c.model.perturbation_width > 0.0)) {
        fail("model.perturbation_width must be positive when the perturbation is on");
    }
    if (c.psi.kind != "constant" && c.psi.kind != "bump") {
        fail("psi.kind must be 'constant' or 'bump', got '" + c.psi.kind + "'");
    }
    if (c.psi.kind == "bump") {
        if (!(c.psi.width > 0.0)) fail("psi.width must be positive");
        if (!(1.0 + c.psi.amp > 0.0)) fail("psi.amp violates psi_bounds (weight must stay positive)");
    }
    if (!(c.init.L1 > 0.0)) fail("init.L1 = " + fmt(c.init.L1) + " violates datum_envelope (must be positive)");
    if (!c.init.r_auto && !(c.init.r > 0.0)) fail("init.r must be positive or 'auto'");
    if (c.grid.n < 9) fail("grid.n must be at least 9");
    if (!(c.grid.x_max > c.grid.x_min)) fail("grid.x_max must exceed grid.x_min");
    if (!(c.time.T > 0.0)) fail("time.T must be positive");
    if (!c.time.dt_auto && !(c.time.dt > 0.0)) fail("time.dt_rule must be positive or 'auto'");
    if (c.time.snapshots < 1) fail("time.snapshots must be at least 1");
    if (c.scheme.flux != "centered" && c.scheme.flux != "llf") {
        fail("scheme.flux must be 'centered' or 'llf', got '" + c.scheme.flux + "'");
    }
    if (!(c.limit.x_max > c.limit.x_min)) fail("limit.x_max must exceed limit.x_min");
    if (c.limit.x_min < c.grid.x_min || c.limit.x_max > c.grid.x_max) {
        fail("limit domain must lie inside the grid domain");
    }
    if (c.limit.refine < 1 || c.limit.refine > 16) fail("limit.refine must be in [1, 16]");
    if (!c.limit.dt_auto && !(c.limit.dt > 0.0)) fail("limit.dt_rule must be positive or 'auto'");
    if (c.sweep.eps_list.empty()) {
        fail("sweep.eps_list must not be empty");
    } else {
        for (double e : c.sweep.eps_list) {
            if (!(e > 0.0)) fail("sweep.eps_list entries must be positive");
        }
        for (size_t i = 1; i < c.sweep.eps_list.size(); ++i) {
            if (!(c.sweep.eps_list[i] < c.sweep.eps_list[i - 1])) {
                fail("sweep.eps_list must be strictly decreasing");
                break;
            }
        }
    }
    if (!(c.sweep.trust_window > 0.0)) fail("sweep.trust_window must be positive");
    if (c.moments.k_max < 2 || c.moments.k_max > 12) fail("moments.k_max must be in [2, 12]");
    if (c.output.dir.empty()) fail("output.dir must not be empty");
}

} // namespace

run_config parse_config_text(const std::string& text, const std::string& origin) {
    parse_state st;
    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        const auto hash_pos = raw.find('#');
        if (hash_pos != std::string::npos) raw = raw.substr(0, hash_pos);
        const std::string stripped = trim(raw);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            st.fail(line, "expected 'key = value', got '" + stripped + "'");
            continue;
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            st.fail(line, "missing key before '='");
            continue;
        }
        apply_key(st, line, key, value);
    }
    validate_config(st);
    if (!st.errors.empty()) {
        std::string msg = origin + ": " + std::to_string(st.errors.size()) + " problem(s)";
        for (const auto& e : st.errors) msg += "\n  " + e;
        throw validation_error(msg);
    }
    return st.cfg;
}

run_config parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::vector<std::string> preset_names() {
    return {"p0_stationary", "p0_transient", "p0_perturbed"};
}

const char* preset_text(const std::string& name) {
    if (name == "p0_stationary") return preset_p0_stationary;
    if (name == "p0_transient") return preset_p0_transient;
    if (name == "p0_perturbed") return preset_p0_perturbed;
    return nullptr;
}

growth_model run_config::make_model() const {
    growth_model m;
    m.r0 = model.r0;
    m.a = model.a;
    m.b = model.b;
    m.theta = model.theta;
    m.bump_amp = model.perturbation_amp;
    m.bump_center = model.perturbation_center;
    m.bump_width = model.perturbation_width;
    m.validate();
    return m;
}

weight_fn run_config::make_psi() const {
    weight_fn w;
    w.kind = psi.kind == "bump" ? weight_fn::kind_t::bump : weight_fn::kind_t::constant;
    w.amp = psi.amp;
    w.center = psi.center;
    w.width = psi.width;
    w.validate();
    return w;
}

grid1d run_config::make_grid() const {
    return grid1d::make(grid.x_min, grid.x_max, grid.n);
}

grid1d run_config::make_limit_grid() const {
    const grid1d coarse = make_grid();
    const double h_fine = coarse.h / limit.refine;
    const double left_steps = (limit.x_min - grid.x_min) / coarse.h;
    const double span_steps = (limit.x_max - limit.x_min) / h_fine;
    if (std::abs(left_steps - std::round(left_steps)) > 1e-9 ||
        std::abs(span_steps - std::round(span_steps)) > 1e-9) {
        throw validation_error("limit domain endpoints must sit on grid nodes");
    }
    return grid1d::make(limit.x_min, limit.x_max, (int)std::llround(span_steps) + 1);
}

std::string run_config::canonical_text() const {
    std::vector<std::pair<std::string, std::string>> kv;
    auto add = [&kv](const std::string& k, const std::string& v) { kv.emplace_back(k, v); };
    auto add_num = [&add](const std::string& k, double v) { add(k, fmt(v)); };
    auto add_int = [&add](const std::string& k, int v) { add(k, std::to_string(v)); };
    auto add_bool = [&add](const std::string& k, bool v) { add(k, v ? "true" : "false"); };

    add_num("model.r0", model.r0);
    add_num("model.a", model.a);
    add_num("model.b", model.b);
    add_num("model.theta", model.theta);
    add_num("model.perturbation_amp", model.perturbation_amp);
    add_num("model.perturbation_center", model.perturbation_center);
    add_num("model.perturbation_width", model.perturbation_width);
    add("psi.kind", psi.kind);
    add_num("psi.amp", psi.amp);
    add_num("psi.center", psi.center);
    add_num("psi.width", psi.width);
    add_num("init.L1", init.L1);
    add_num("init.x_c", init.x_c);
    add("init.r", init.r_auto ? "auto" : fmt(init.r));
    add_bool("init.well_prepared", init.well_prepared);
    add_num("grid.x_min", grid.x_min);
    add_num("grid.x_max", grid.x_max);
    add_int("grid.n", grid.n);
    add_num("time.T", time.T);
    add("time.dt_rule", time.dt_auto ? "auto" : fmt(time.dt));
    add_int("time.snapshots", time.snapshots);
    add("scheme.flux", scheme.flux);
    add_num("limit.x_min", limit.x_min);
    add_num("limit.x_max", limit.x_max);
    add_int("limit.refine", limit.refine);
    add("limit.dt_rule", limit.dt_auto ? "auto" : fmt(limit.dt));
    std::string eps;
    for (size_t i = 0; i < sweep.eps_list.size(); ++i) {
        if (i) eps += ",";
        eps += fmt(sweep.eps_list[i]);
    }
    add("sweep.eps_list", eps);
    add_num("sweep.trust_window", sweep.trust_window);
    add_bool("sweep.refine_check", sweep.refine_check);
    add_bool("corrections.derivative_check", corrections.derivative_check);
    add_int("moments.k_max", moments.k_max);
    add("output.dir", output.dir);
    add_bool("output.emit_svg", output.emit_svg);

    std::sort(kv.begin(), kv.end());
    std::string out;
    for (const auto& [k, v] : kv) {
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    }
    return out;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

std::string run_config::hash_hex() const {
    return fnv1a_hex(canonical_text());
}

} // namespace evo
