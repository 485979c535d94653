#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "saddleflow/experiments.hpp"

namespace saddleflow {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // measured value vs threshold
};

// Named invariant checks run against one problem instance: KKT certification,
// operator monotonicity, gap bounds, the quadratic-likeness identity,
// gradient consistency, multiplier-projection geometry, the Lagrangian
// derivative identity, descent/boundedness of a short flow run, the ergodic
// averaged-gap bound, and agreement with the closed-form affine flow.
std::vector<CheckResult> run_validation(const ReferenceInstance& inst,
                                        std::uint64_t seed = 42);

}  // namespace saddleflow
