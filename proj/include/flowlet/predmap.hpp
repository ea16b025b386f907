#pragma once

#include <memory>

#include "flowlet/types.hpp"

namespace flowlet {

// Symbolic formula over variables recording which predicates hold when an
// expression evaluates truthy. Kept symbolic until environment refinement.
struct PredMap;
using PredMapPtr = std::shared_ptr<const PredMap>;

struct PredMap {
  enum class Tag { Empty, Single, And, Or, Not, ExcludeEffect } tag;
  Ident id;          // Single
  Predicate pred;    // Single
  PredMapPtr left;   // And/Or, Not(child in left), ExcludeEffect(child)
  PredMapPtr right;  // And/Or
  EffectPtr effect;  // ExcludeEffect
};

PredMapPtr pm_empty();
PredMapPtr pm_single(Ident id, Predicate p);
PredMapPtr pm_and(PredMapPtr l, PredMapPtr r);
PredMapPtr pm_or(PredMapPtr l, PredMapPtr r);
PredMapPtr pm_not(PredMapPtr p);
PredMapPtr pm_exclude(PredMapPtr p, EffectPtr eff);

// Pushes negations inward: the result contains no Not node.
//   ~(P1 & P2) = ~P1 | ~P2      ~(P \ e) = (~P) \ e
//   ~(P1 | P2) = ~P1 & ~P2      ~~P = P
PredMapPtr negate_predmap(const PredMapPtr &p);

bool predmap_equal(const PredMapPtr &a, const PredMapPtr &b);
bool predmap_has_not(const PredMapPtr &p);

std::string predmap_str(const PredMapPtr &p);

} // namespace flowlet
