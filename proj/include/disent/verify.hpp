#pragma once

// Invariant battery behind the `verify` CLI subcommand: generator identities,
// the two-route entanglement equivalence, product-state inertness, frame
// consistency and sphere preservation, with per-check residuals.

#include <cstdint>
#include <string>
#include <vector>

namespace disent {

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

std::vector<CheckResult> run_verification(std::uint64_t seed, bool quick);

}  // namespace disent
