#pragma once

#include <iosfwd>

namespace tvkb::cli {

/// Compares the incremental GP posterior, the candidate-set posterior and
/// the closed-form Matern kernels against independent dense computations.
/// Prints the max deviation of each check; returns false if any exceeds
/// its tolerance.
bool run_selftest(std::ostream& out, unsigned cases = 50);

}  // namespace tvkb::cli
