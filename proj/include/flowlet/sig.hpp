#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "flowlet/diag.hpp"
#include "flowlet/graph.hpp"

namespace flowlet {

// A module's interface: its export type plus the pruned constraints reachable
// from it through lower bounds. Variables are renumbered by a deterministic
// walk from the export root, so two extractions of the same source hash
// identically even though the underlying fresh variables differ.
struct SigType;
using SigTypePtr = std::shared_ptr<const SigType>;

struct SigLit {
  enum class Tag { Base, Arrow, Record } tag = Tag::Base;
  BaseKind base_kind = BaseKind::Void;
  std::string base_value;
  bool base_singleton = false;
  std::vector<AnnotPtr> arrow_params; // null entry = annotation missing
  SigTypePtr arrow_ret;
  std::map<std::string, SigTypePtr> record_fields;
};

struct SigType {
  enum class Tag { Var, Lit, Join } tag = Tag::Var;
  uint32_t var = 0;
  std::shared_ptr<const SigLit> lit;
  SigTypePtr left, right;
};

struct ModuleSignature {
  SigTypePtr export_type;
  std::vector<std::pair<uint32_t, SigLit>> constraints; // var <- lit, emission order
  std::vector<Loc> required_annotations;
  std::string serialized;
  uint64_t hash = 0;
  bool valid = false;
};

// Walks the export type through the graph's lower bounds, pruning upper
// bounds, substituting parameter annotations into negative positions and
// demanding annotations where none exist. Arrow effects are erased to the
// escaping effect.
ModuleSignature extract_signature(const ConstraintGraph &g, const TypePtr &export_type,
                                  const std::string &file, Span export_span);

// Signature of a file that failed to produce an export (parse error or no
// export statement): plain void.
ModuleSignature void_signature();

// Replays a signature into a dependent's graph with fresh variables; returns
// the materialized export type. The origin graph is never touched, so
// signatures stay closed under dependent-side propagation.
TypePtr load_signature(ConstraintGraph &g, const ModuleSignature &sig, Span import_span);

std::string serialize_signature(const ModuleSignature &sig);
// Inverse of serialize_signature; throws std::runtime_error on malformed input.
ModuleSignature parse_signature(const std::string &bytes);
uint64_t fnv1a64(const std::string &bytes);

} // namespace flowlet
