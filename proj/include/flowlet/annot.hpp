#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "flowlet/span.hpp"

namespace flowlet {

// Source-level type annotations. Unlike inferred types they contain no type
// variables and no effects. `?T` is desugared at parse time into
// null | void | T, so no "maybe" node exists here.
struct Annot;
using AnnotPtr = std::shared_ptr<const Annot>;

enum class BaseKind { Num, Str, Bool, Void, Null };

struct AnnotBase {
  BaseKind kind;
  // Singleton literal ("cons", 5, true). Empty means the whole base kind.
  std::string value;
  bool has_value = false;
};

struct AnnotArrow {
  std::vector<AnnotPtr> params;
  AnnotPtr ret;
};

struct AnnotRecord {
  std::map<std::string, AnnotPtr> fields;
};

struct AnnotUnion {
  AnnotPtr left;
  AnnotPtr right;
};

struct Annot {
  enum class Tag { Base, Arrow, Record, Union } tag;
  AnnotBase base;
  AnnotArrow arrow;
  AnnotRecord record;
  AnnotUnion uni;
  Span span;
};

AnnotPtr annot_base(BaseKind k, Span sp = {});
AnnotPtr annot_singleton(BaseKind k, std::string value, Span sp = {});
AnnotPtr annot_arrow(std::vector<AnnotPtr> params, AnnotPtr ret, Span sp = {});
AnnotPtr annot_record(std::map<std::string, AnnotPtr> fields, Span sp = {});
AnnotPtr annot_union(AnnotPtr l, AnnotPtr r, Span sp = {});
AnnotPtr annot_maybe(AnnotPtr inner, Span sp = {}); // null | void | inner

// Canonical text form, used in error messages and signatures.
std::string annot_str(const AnnotPtr &a);

bool annot_equal(const AnnotPtr &a, const AnnotPtr &b);

} // namespace flowlet
