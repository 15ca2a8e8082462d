#pragma once

#include <ostream>

namespace rsgda {

// Built-in verification battery: analytic gradients against central finite
// differences, closed-form golden values, stopping-law behavior, Monte Carlo
// against the exact corruption expectation, plan feasibility algebra, format
// round-trips, and replay determinism. Prints one line per check and returns
// the number of failures.
int run_self_checks(std::ostream& out, bool verbose);

}  // namespace rsgda
