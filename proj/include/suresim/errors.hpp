#pragma once

#include <stdexcept>
#include <string>

namespace suresim {

// Error taxonomy, one type per CLI exit code (config 2, data 3, infeasible 4).
// Anything else escaping main() is a plain bug and exits 1.

// Invalid knobs: alpha out of range, bad grid size, malformed flags.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad inputs: malformed CSV, out-of-range scores, empty candidate sets.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A search hit its cap: generator could not reach the target correlation,
// savings search exceeded the sample budget.  Carries the best value reached
// when one exists, so callers can report how close the search got.
struct infeasible_error : std::runtime_error {
    infeasible_error(const std::string& msg)
        : std::runtime_error(msg) {}
    infeasible_error(const std::string& msg, double best)
        : std::runtime_error(msg), achieved(best), has_achieved(true) {}

    double achieved = 0.0;
    bool has_achieved = false;
};

} // namespace suresim
