#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flowlet/annot.hpp"
#include "flowlet/pred.hpp"
#include "flowlet/span.hpp"

namespace flowlet {

// Unknowns. Type and effect variables share one id space per graph; the kind
// tag only aids rendering and sanity checks.
struct TypeVar {
  uint32_t id = 0;
  friend bool operator==(TypeVar a, TypeVar b) { return a.id == b.id; }
  friend bool operator!=(TypeVar a, TypeVar b) { return a.id != b.id; }
  friend bool operator<(TypeVar a, TypeVar b) { return a.id < b.id; }
};

struct EffectVar {
  uint32_t id = 0;
  friend bool operator==(EffectVar a, EffectVar b) { return a.id == b.id; }
  friend bool operator!=(EffectVar a, EffectVar b) { return a.id != b.id; }
  friend bool operator<(EffectVar a, EffectVar b) { return a.id < b.id; }
};

struct Type;
struct Effect;
using TypePtr = std::shared_ptr<const Type>;
using EffectPtr = std::shared_ptr<const Effect>;

// ---- Type literals ---------------------------------------------------------

struct BaseLit {
  BaseKind kind;
  std::string value; // singleton literal; empty + !singleton => whole kind
  bool singleton = false;
};

struct ArrowLit {
  std::vector<TypeVar> params;
  EffectPtr effect;
  TypePtr ret;
};

// Field values are type variables as generated; predicate concretization may
// substitute full types in their place.
struct RecordLit {
  std::map<std::string, TypePtr> fields;
};

struct TypeLit {
  std::variant<BaseLit, ArrowLit, RecordLit> v;

  const BaseLit *as_base() const { return std::get_if<BaseLit>(&v); }
  const ArrowLit *as_arrow() const { return std::get_if<ArrowLit>(&v); }
  const RecordLit *as_record() const { return std::get_if<RecordLit>(&v); }
};

struct JoinType {
  TypePtr left, right;
};

struct Type {
  std::variant<TypeLit, JoinType, TypeVar> v;

  const TypeLit *as_lit() const { return std::get_if<TypeLit>(&v); }
  const JoinType *as_join() const { return std::get_if<JoinType>(&v); }
  const TypeVar *as_var() const { return std::get_if<TypeVar>(&v); }
};

// ---- Effects ----------------------------------------------------------------

struct EmptyEffect {};
struct JoinEffect {
  EffectPtr left, right;
};

struct Effect {
  std::variant<EmptyEffect, Ident, JoinEffect, EffectVar> v;

  bool is_empty() const { return std::holds_alternative<EmptyEffect>(v); }
  const Ident *as_name() const { return std::get_if<Ident>(&v); }
  const JoinEffect *as_join() const { return std::get_if<JoinEffect>(&v); }
  const EffectVar *as_var() const { return std::get_if<EffectVar>(&v); }
};

// ---- Builders ---------------------------------------------------------------

TypePtr t_base(BaseKind k);
TypePtr t_singleton(BaseKind k, std::string value);
TypePtr t_num();
TypePtr t_str();
TypePtr t_bool();
TypePtr t_void();
TypePtr t_null();
TypePtr t_var(TypeVar v);
TypePtr t_lit(TypeLit lit);
TypePtr t_arrow(std::vector<TypeVar> params, EffectPtr eff, TypePtr ret);
TypePtr t_record(std::map<std::string, TypePtr> fields);
TypePtr t_join(TypePtr l, TypePtr r);

EffectPtr e_empty();
EffectPtr e_name(Ident id);
EffectPtr e_var(EffectVar v);
EffectPtr e_join(EffectPtr l, EffectPtr r);

// ---- Uses -------------------------------------------------------------------

struct UseToVar {
  TypeVar target;
};

struct CallArg {
  TypePtr type;
  Span span;
};

struct UseCall {
  std::vector<CallArg> args;
  EffectVar effect;
  TypeVar ret;
};

struct UseGet {
  std::string field;
  TypeVar out;
};

struct UseSet {
  std::string field;
  TypePtr value;
};

struct UsePred {
  Predicate pred;
  TypeVar out;
};

// lhs operand of `+` has been seen; rhs flows here.
struct UseArith {
  TypePtr rhs;
  Span rhs_span;
  TypeVar out;
};

struct UseArithCheck {
  std::optional<BaseKind> lhs_kind; // Num or Str; nullopt = never addable
  Span lhs_span;
  TypeVar out;
};

struct UseAnnot {
  AnnotPtr annot;
};

// Write into a record field whose type was pinned by predicate
// concretization; the incoming value must keep the pinned literal.
struct UseWriteCheck {
  std::shared_ptr<const TypeLit> pinned;
};

using TypeUse = std::variant<UseToVar, UseCall, UseGet, UseSet, UsePred,
                             UseArith, UseArithCheck, UseAnnot, UseWriteCheck>;

struct UseToEVar {
  EffectVar target;
};

// One environment entry captured by a havoc use. `source` is a plain var
// after call-site widening; conditional-refinement havoc may carry a full
// pre-refinement type instead.
struct HavocEntry {
  Ident id;
  TypeVar target;
  TypePtr source;
};

struct UseHavoc {
  std::vector<HavocEntry> entries;
};

using EffectUse = std::variant<UseToEVar, UseHavoc>;

// ---- Constraints ------------------------------------------------------------

struct TypeConstraint {
  TypePtr lhs;
  TypeUse use;
  Span lhs_span;
  Span use_span;
};

struct EffectConstraint {
  EffectPtr lhs;
  EffectUse use;
  Span lhs_span;
  Span use_span;
};

using Constraint = std::variant<TypeConstraint, EffectConstraint>;
using ConstraintSet = std::vector<Constraint>;

// ---- Rendering & structural identity ---------------------------------------

// Canonical text rendering; record fields come out in lexicographic order.
std::string type_str(const TypePtr &t);
std::string type_lit_str(const TypeLit &l);
std::string effect_str(const EffectPtr &e);
std::string use_str(const TypeUse &u);
std::string effect_use_str(const EffectUse &u);
std::string constraint_str(const Constraint &c);

bool type_equal(const TypePtr &a, const TypePtr &b);
bool lit_equal(const TypeLit &a, const TypeLit &b);
bool effect_equal(const EffectPtr &a, const EffectPtr &b);
bool use_equal(const TypeUse &a, const TypeUse &b);

// Every type variable mentioned in the value, with the polarity of its
// position (true = positive). Starts from positive unless flipped.
void collect_vars(const TypePtr &t, bool positive,
                  std::vector<std::pair<TypeVar, bool>> &out);
void collect_vars(const TypeLit &l, bool positive,
                  std::vector<std::pair<TypeVar, bool>> &out);

} // namespace flowlet
