#pragma once

#include <string>

namespace flowlet {

enum class TypeofKind { Number, String, Boolean, Function, Object, Undefined };

const char *typeof_kind_str(TypeofKind k);
bool parse_typeof_kind(const std::string &s, TypeofKind &out);

// Base predicates of runtime tests. Truthy/Falsy are each other's negation,
// so a Predicate never stores `negated` on them.
struct BasePred {
  enum class Tag { Truthy, Falsy, Nullish, TypeofIs, FieldEq } tag;
  TypeofKind typeof_kind = TypeofKind::Number; // TypeofIs
  std::string field;                           // FieldEq
  std::string value;                           // FieldEq

  static BasePred truthy() { return {Tag::Truthy, {}, {}, {}}; }
  static BasePred falsy() { return {Tag::Falsy, {}, {}, {}}; }
  static BasePred nullish() { return {Tag::Nullish, {}, {}, {}}; }
  static BasePred typeof_is(TypeofKind k) { return {Tag::TypeofIs, k, {}, {}}; }
  static BasePred field_eq(std::string f, std::string v) {
    return {Tag::FieldEq, {}, std::move(f), std::move(v)};
  }
};

bool operator==(const BasePred &a, const BasePred &b);

struct Predicate {
  BasePred base;
  bool negated = false;

  Predicate() : base(BasePred::truthy()) {}
  explicit Predicate(BasePred b, bool neg = false);

  Predicate negate() const;
};

bool operator==(const Predicate &a, const Predicate &b);

std::string pred_str(const Predicate &p);
std::string base_pred_str(const BasePred &p);

} // namespace flowlet
