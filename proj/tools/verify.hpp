#pragma once

#include "kato/core_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kato::cli {

struct Check {
  std::string name;
  bool pass = true;
  bool skipped = false;
  double value = 0.0;
  double threshold = 0.0;
  /// "le": pass when value ≤ threshold; "ge": pass when value ≥ threshold.
  std::string relation = "le";
  std::string note;
};

/// Invariant suite over one scenario with seeded random inputs. Kato-level
/// checks use tol; all others use the scenario's tolerances.
std::vector<Check> run_verification(const Scenario& scenario, std::uint64_t seed, double tol);

}  // namespace kato::cli
