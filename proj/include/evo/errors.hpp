#pragma once

#include <stdexcept>
#include <string>

namespace evo {

// Exit codes used by the command-line driver. Library code throws the typed
// errors below; the driver maps them to these codes.
enum exit_code : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_validation = 2,
    exit_blow_up = 3,
    exit_boundary_contact = 4,
    exit_degeneracy = 5,
};

// Configuration or assumption validation failed before any stepping started.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A field became NaN/Inf during time stepping.
struct blow_up_error : std::runtime_error {
    explicit blow_up_error(const std::string& msg) : std::runtime_error(msg) {}
};

// The field maximum reached the edge of the truncated domain.
struct boundary_contact_error : std::runtime_error {
    explicit boundary_contact_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A quantity that must stay strictly signed (curvature at the maximum,
// intake sensitivity) degenerated, or a trait left the viable domain.
struct degeneracy_error : std::runtime_error {
    explicit degeneracy_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace evo
