#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "evo/errors.hpp"
#include "evo/grid.hpp"
#include "evo/model.hpp"

using namespace evo;

namespace {

growth_model perturbed_model() {
    growth_model m;
    m.bump_amp = 0.08;
    m.bump_center = 0.25;
    m.bump_width = 0.35;
    return m;
}

} // namespace

TEST_CASE("zero-growth intake for the quadratic model") {
    const growth_model m;
    const intake_solution at0 = optimal_intake(m, 0.0);
    CHECK(at0.I == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(at0.dI == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    const intake_solution at_half = optimal_intake(m, 0.5);
    CHECK(at_half.I == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(at_half.dI == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("zero-growth intake with the bump perturbation") {
    const growth_model m = perturbed_model();
    const double d = 0.5 - 0.25;
    const double expected = 0.75 + 0.08 * std::exp(-d * d / (2.0 * 0.35 * 0.35));
    const intake_solution s = optimal_intake(m, 0.5);
    CHECK(s.I == doctest::Approx(expected).epsilon(1e-10));
    CHECK(s.I == doctest::Approx(0.8119869943).epsilon(1e-9));
    CHECK(s.dI == doctest::Approx(-m.Rx(0.5) / m.RI()).epsilon(1e-9));
}

TEST_CASE("no nonnegative intake balances growth outside the viable range") {
    const growth_model m;
    CHECK_THROWS_AS(optimal_intake(m, 1.5), degeneracy_error);
}

TEST_CASE("carrying intake maximizes the zero-growth curve") {
    CHECK(carrying_intake(growth_model{}) == doctest::Approx(1.0).epsilon(1e-9));

    growth_model scaled;
    scaled.r0 = 2.0;
    scaled.b = 4.0;
    CHECK(carrying_intake(scaled) == doctest::Approx(0.5).epsilon(1e-9));

    growth_model bumped;
    bumped.bump_amp = 0.1;
    bumped.bump_center = 0.0;
    bumped.bump_width = 1.0 / std::sqrt(2.0);
    const double cap = carrying_intake(bumped);
    CHECK(cap >= 1.0999);
    CHECK(cap <= 1.1001);
}

TEST_CASE("auto amplitude matches the limit intake at the concentration point") {
    const growth_model m;
    const weight_fn psi;
    const double r = auto_amplitude(m, psi, 1.0, 0.5);
    CHECK(r == doctest::Approx(0.75 * std::sqrt(1.0 / M_PI)).epsilon(1e-12));

    initial_data init;
    init.l1 = 1.0;
    init.x_c = 0.5;
    init.r = r;
    const double mass = psi.value(0.5) * r * std::sqrt(M_PI / init.l1);
    CHECK(m.R(0.5, mass) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("envelope constants collapse for a pure quadratic growth rate") {
    const growth_model m;
    initial_data init;
    init.l1 = 0.5;
    init.x_c = 0.0;
    init.r = 1.0;
    const envelope_constants env = compute_envelope(m, init, grid1d::make(-4.0, 4.0, 401));
    CHECK(env.k_lower == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(env.k_upper == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(env.m_lower == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(env.m_upper == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("assumption table covers every hypothesis and passes on a sound setup") {
    const growth_model m;
    const weight_fn psi;
    initial_data init;
    init.l1 = 0.5;
    init.x_c = 0.0;
    init.r = auto_amplitude(m, psi, 0.5, 0.0);
    init.layer_coeff = -1.0;
    const grid1d g = grid1d::make(-6.0, 6.0, 1201);
    const std::vector<double> eps_list = {0.1, 0.05, 0.025};
    const std::vector<assumption_check> checks = validate_assumptions(m, psi, init, g, eps_list);
    CHECK(all_pass(checks));
    CHECK(init.r == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));

    const std::vector<std::string> wanted = {
        "psi_bounds",      "growth_concavity", "intake_sensitivity",
        "carrying_capacity", "datum_envelope", "datum_normalized",
        "datum_regularity", "survival_margin", "datum_concentration"};
    for (const std::string& id : wanted) {
        int hits = 0;
        for (const assumption_check& c : checks) {
            if (c.id == id) ++hits;
        }
        CHECK_MESSAGE(hits >= 1, id);
        if (id == "survival_margin") CHECK(hits == 3);
    }
}

TEST_CASE("mismatched amplitude fails the concentration check") {
    const growth_model m;
    const weight_fn psi;
    initial_data init;
    init.l1 = 1.0;
    init.x_c = 0.0;
    init.r = 1.0;
    const std::vector<assumption_check> checks =
        validate_assumptions(m, psi, init, grid1d::make(-6.0, 6.0, 1201), {0.05});
    CHECK_FALSE(all_pass(checks));
    bool found = false;
    for (const assumption_check& c : checks) {
        if (c.id == "datum_concentration") {
            found = true;
            CHECK_FALSE(c.pass);
        }
    }
    CHECK(found);
}
