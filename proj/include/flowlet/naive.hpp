#pragma once

#include <vector>

#include "flowlet/graph.hpp"
#include "flowlet/types.hpp"

namespace flowlet {

// Reference closure: the propagation rules applied to a plain constraint set
// until fixpoint, with none of the union-find machinery. Exponential-friendly
// at desk scale; used as the oracle the optimized graph is checked against.
struct NaiveResult {
  ConstraintSet closure;
  std::vector<Inconsistency> inconsistencies;
  bool diverged = false;
};

NaiveResult naive_close(const ConstraintSet &generated,
                        size_t max_constraints = 200000);

} // namespace flowlet
