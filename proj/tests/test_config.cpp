#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "evo/config.hpp"
#include "evo/errors.hpp"

using namespace evo;

namespace {

std::string message_of(const std::string& text) {
    try {
        parse_config_text(text, "test");
    } catch (const validation_error& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("bundled presets parse and expose their documented values") {
    const char* text = preset_text("p0_transient");
    REQUIRE(text != nullptr);
    const run_config cfg = parse_config_text(text, "preset");
    CHECK(cfg.model.b == 1.0);
    CHECK(cfg.init.x_c == 0.5);
    CHECK(cfg.init.r_auto);
    CHECK(cfg.init.well_prepared);
    CHECK(cfg.grid.n == 1601);
    CHECK(cfg.time.snapshots == 20);
    CHECK(cfg.time.dt_auto);
    CHECK(cfg.sweep.eps_list == std::vector<double>{0.08, 0.04, 0.02, 0.01});
    CHECK(cfg.sweep.refine_check);

    CHECK(preset_text("p0_stationary") != nullptr);
    CHECK(preset_text("p0_perturbed") != nullptr);
    CHECK(preset_text("nope") == nullptr);
    CHECK(preset_names().size() == 3);
}

TEST_CASE("canonical text round-trips to the same hash") {
    const run_config cfg = parse_config_text(preset_text("p0_perturbed"), "preset");
    const std::string h1 = cfg.hash_hex();
    CHECK(h1.size() == 16);

    const run_config again = parse_config_text(cfg.canonical_text(), "round-trip");
    CHECK(again.hash_hex() == h1);
    CHECK(again.canonical_text() == cfg.canonical_text());

    run_config tweaked = cfg;
    tweaked.grid.n += 2;
    CHECK(tweaked.hash_hex() != h1);
}

TEST_CASE("violated constraints are reported with their hypothesis names") {
    const std::string msg = message_of("model.b = -1\n");
    CHECK(msg.find("intake_sensitivity") != std::string::npos);
    CHECK(msg.find("model.b") != std::string::npos);
}

TEST_CASE("eps ladders must be positive and strictly decreasing") {
    CHECK(message_of("sweep.eps_list = 0.01, 0.02\n").find("strictly decreasing") !=
          std::string::npos);
    CHECK(message_of("sweep.eps_list = 0.02, -0.01\n").find("positive") != std::string::npos);
}

TEST_CASE("unknown keys are reported with their line number") {
    const std::string msg = message_of("model.r0 = 1\n\nnot.a.key = 7\n");
    CHECK(msg.find("unknown key") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
}

TEST_CASE("every problem is reported, not just the first") {
    const std::string msg = message_of("model.b = -1\nnot.a.key = 7\ntime.T = -2\n");
    CHECK(msg.find("3 problem(s)") != std::string::npos);
}

TEST_CASE("malformed lines and non-numeric values are rejected") {
    CHECK(message_of("just words\n").find("expected 'key = value'") != std::string::npos);
    CHECK(message_of("grid.n = soon\n").find("expected an integer") != std::string::npos);
    CHECK(message_of("= 3\n").find("missing key") != std::string::npos);
}

TEST_CASE("missing config files are a validation error") {
    CHECK_THROWS_AS(parse_config_file("/nonexistent/evo.cfg"), validation_error);
}
