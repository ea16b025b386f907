#include "flowlet/pred.hpp"

namespace flowlet {

const char *typeof_kind_str(TypeofKind k) {
  switch (k) {
  case TypeofKind::Number: return "number";
  case TypeofKind::String: return "string";
  case TypeofKind::Boolean: return "boolean";
  case TypeofKind::Function: return "function";
  case TypeofKind::Object: return "object";
  case TypeofKind::Undefined: return "undefined";
  }
  return "?";
}

bool parse_typeof_kind(const std::string &s, TypeofKind &out) {
  if (s == "number") out = TypeofKind::Number;
  else if (s == "string") out = TypeofKind::String;
  else if (s == "boolean") out = TypeofKind::Boolean;
  else if (s == "function") out = TypeofKind::Function;
  else if (s == "object") out = TypeofKind::Object;
  else if (s == "undefined") out = TypeofKind::Undefined;
  else return false;
  return true;
}

bool operator==(const BasePred &a, const BasePred &b) {
  if (a.tag != b.tag) return false;
  switch (a.tag) {
  case BasePred::Tag::TypeofIs: return a.typeof_kind == b.typeof_kind;
  case BasePred::Tag::FieldEq: return a.field == b.field && a.value == b.value;
  default: return true;
  }
}

Predicate::Predicate(BasePred b, bool neg) : base(std::move(b)), negated(neg) {
  // Truthy and Falsy are each other's negation; fold eagerly.
  if (negated && base.tag == BasePred::Tag::Truthy) {
    base = BasePred::falsy();
    negated = false;
  } else if (negated && base.tag == BasePred::Tag::Falsy) {
    base = BasePred::truthy();
    negated = false;
  }
}

Predicate Predicate::negate() const { return Predicate(base, !negated); }

bool operator==(const Predicate &a, const Predicate &b) {
  return a.negated == b.negated && a.base == b.base;
}

std::string base_pred_str(const BasePred &p) {
  switch (p.tag) {
  case BasePred::Tag::Truthy: return "truthy";
  case BasePred::Tag::Falsy: return "falsy";
  case BasePred::Tag::Nullish: return "nullish";
  case BasePred::Tag::TypeofIs:
    return std::string("typeof=") + typeof_kind_str(p.typeof_kind);
  case BasePred::Tag::FieldEq:
    return "." + p.field + "==\"" + p.value + "\"";
  }
  return "?";
}

std::string pred_str(const Predicate &p) {
  return p.negated ? "!" + base_pred_str(p.base) : base_pred_str(p.base);
}

} // namespace flowlet
