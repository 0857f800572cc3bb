#pragma once

#include <cstdint>
#include <ostream>

namespace tinylic::cli {

// Seeded-model property checks on the tiny profile. Prints one line per
// check and returns the number of failures.
int run_selftest(std::uint64_t seed, std::ostream& out);

}  // namespace tinylic::cli
