#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support/helpers.hpp"

#include "flowlet/gen.hpp"

using namespace flowlet;
using flowlet::test::has_code;

namespace {

const char *ambiguous_union_src =
    "type IDString = (string) => string;\n"
    "type IDNullableString = (?string) => ?string;\n"
    "type Ambiguous = IDString | IDNullableString;\n"
    "function onString(f: Ambiguous) { f(\"\"); }\n"
    "var id = (x) => x;\n"
    "onString(id);\n"
    "id(null);\n";

const char *correlated_union_src =
    "type Correlated = { type: \"string\", val: string }\n"
    "  | { type: \"number\", val: number };\n"
    "function stringIsString(x: Correlated) {\n"
    "  if (x.type === \"string\") {\n"
    "    x.val;\n"
    "  }\n"
    "}\n"
    "stringIsString({ type: \"string\", val: 0 });\n";

} // namespace

TEST_CASE("record annotations expand field-wise") {
  // matching record: no error
  UnitCheck ok = check_source("var x: {kind: string} = {kind: \"nil\"};", "t");
  CHECK(ok.errors.empty());
  // wrong field type: mismatch
  UnitCheck bad = check_source("var x: {kind: number} = {kind: \"nil\"};", "t");
  CHECK(has_code(bad.errors, ErrorCode::AnnotationMismatch));
  // missing field: the expansion's get reports it
  UnitCheck missing = check_source("var x: {kind: string, val: number} = {kind: \"a\"};", "t");
  CHECK(has_code(missing.errors, ErrorCode::MissingField));
}

TEST_CASE("singleton values subsume into their base kind") {
  UnitCheck u = check_source("var x: number = 5;", "t");
  CHECK(u.errors.empty());
  UnitCheck s = check_source("var x: \"nil\" = \"nil\";", "t");
  CHECK(s.errors.empty());
  UnitCheck bad = check_source("var x: number = \"nope\";", "t");
  CHECK(has_code(bad.errors, ErrorCode::AnnotationMismatch));
  // a general string does not satisfy a singleton annotation
  UnitCheck narrow = check_source("var s = \"a\" + \"b\";\nvar x: \"ab\" = s;", "t");
  CHECK(has_code(narrow.errors, ErrorCode::AnnotationMismatch));
}

TEST_CASE("arrow annotations route the body effect into the escaping effect") {
  UnitCheck u = check_source("var y = 1;\n"
                             "var f: (string) => string = (s) => { y = 2; return s; };",
                             "t");
  CHECK(u.errors.empty());
  EffectVar esc = u.graph->escape_var();
  auto lows = u.graph->effect_lowers_of(esc);
  bool saw_y = false;
  for (const auto &l : lows) saw_y = saw_y || l.id.text == "y";
  CHECK(saw_y);
}

TEST_CASE("union against a singleton picks the consistent branch") {
  ConstraintGraph g;
  AnnotPtr u = annot_union(annot_base(BaseKind::Num), annot_base(BaseKind::Str));
  auto sp = g.speculate_union(*t_singleton(BaseKind::Num, "5")->as_lit(), {}, {},
                              u->uni.left, u->uni.right);
  CHECK(!sp.ambiguous);
  CHECK(sp.branch == 0);
  auto sp2 = g.speculate_union(*t_singleton(BaseKind::Str, "s")->as_lit(), {}, {},
                               u->uni.left, u->uni.right);
  CHECK(!sp2.ambiguous);
  CHECK(sp2.branch == 1);
  // and end to end
  UnitCheck ok = check_source("var x: number | string = 5;", "t");
  CHECK(ok.errors.empty());
}

TEST_CASE("ambiguous union over an unannotated function") {
  UnitCheck u = check_source(ambiguous_union_src, "ambiguous.fc");
  REQUIRE(has_code(u.errors, ErrorCode::AmbiguousUnion));
  // reported where the ambiguous value arrives: the onString(id) call line
  for (const auto &e : u.errors)
    if (e.code == ErrorCode::AmbiguousUnion) CHECK(e.span.line == 6);
}

TEST_CASE("correlated union does not distribute field-wise") {
  UnitCheck u = check_source(correlated_union_src, "correlated.fc");
  // both branches are inconsistent, so the call errs rather than passing
  REQUIRE(has_code(u.errors, ErrorCode::AnnotationMismatch));
  for (const auto &e : u.errors)
    if (e.code == ErrorCode::AnnotationMismatch) CHECK(e.span.line == 8);
}

TEST_CASE("speculation does not mutate the graph") {
  UnitCheck u = check_source("var id = (x) => x;\nid;", "t");
  ConstraintGraph &g = *u.graph;
  uint32_t vars_before = g.var_count();
  size_t incons_before = g.inconsistencies().size();
  size_t amb_before = g.ambiguities().size();

  AnnotPtr left = annot_arrow({annot_base(BaseKind::Str)}, annot_base(BaseKind::Str));
  AnnotPtr right =
      annot_arrow({annot_maybe(annot_base(BaseKind::Str))}, annot_maybe(annot_base(BaseKind::Str)));
  // the id arrow literal is the lower bound of its declaration variable
  TypeLit id_arrow{{}};
  bool found = false;
  for (uint32_t i = 0; i < vars_before && !found; i++) {
    for (const auto &lb : g.lowers_of(TypeVar{i}))
      if (lb.lit.as_arrow()) {
        id_arrow = lb.lit;
        found = true;
        break;
      }
  }
  REQUIRE(found);
  auto sp = g.speculate_union(id_arrow, {}, {}, left, right);
  CHECK(sp.ambiguous);
  CHECK(!sp.condition_vars.empty());
  CHECK(g.var_count() == vars_before);
  CHECK(g.inconsistencies().size() == incons_before);
  CHECK(g.ambiguities().size() == amb_before);
}

TEST_CASE("one consistent branch equals checking that branch directly") {
  struct Case {
    const char *with_union;
    const char *direct;
  };
  // the inconsistent side differs; the consistent side is the same
  Case cases[] = {
      {"var x: number | string = 5;", "var x: number = 5;"},
      {"var x: string | number = 5;", "var x: number = 5;"},
      {"var x: {kind: string} | number = {kind: \"a\"};",
       "var x: {kind: string} = {kind: \"a\"};"},
      {"var x: number | {kind: string} = {kind: \"b\"};",
       "var x: {kind: string} = {kind: \"b\"};"},
  };
  for (const auto &c : cases) {
    CAPTURE(c.with_union);
    UnitCheck a = check_source(c.with_union, "t");
    UnitCheck b = check_source(c.direct, "t");
    CHECK(flowlet::test::error_codes(a.errors) == flowlet::test::error_codes(b.errors));
  }
}

TEST_CASE("conditions are not transitively propagated during speculation") {
  // the parameter's class carries a call use; flowing a non-function into it
  // would be an inconsistency under full propagation.
  UnitCheck u = check_source("var use = (v) => v(1);", "t");
  ConstraintGraph &g = *u.graph;
  REQUIRE(g.inconsistencies().empty());
  // Find v's general variable: the class with a call upper bound.
  std::optional<TypeVar> v_var;
  for (uint32_t i = 0; i < g.var_count(); i++) {
    for (const auto &ub : g.uppers_of(TypeVar{i}))
      if (std::holds_alternative<UseCall>(ub.use)) v_var = TypeVar{i};
  }
  REQUIRE(v_var.has_value());
  // A record annotation whose field wiring would dump `num` into v's class.
  std::map<std::string, AnnotPtr> fields{{"f", annot_base(BaseKind::Num)}};
  AnnotPtr rec_annot = annot_record(fields);
  TypeLit rec = *t_record({{"f", t_var(*v_var)}})->as_lit();
  auto sp = g.speculate_union(rec, {}, {}, rec_annot, annot_base(BaseKind::Num));
  CHECK(!sp.ambiguous);
  CHECK(sp.branch == 0); // the record branch is the consistent one
  // restricted propagation must not have pushed num through v's call use
  CHECK(g.inconsistencies().empty());
  // whereas the unrestricted route derives the error
  g.add(TypeConstraint{t_num(), UseToVar{*v_var}, {}, {}});
  CHECK(!g.inconsistencies().empty());
}

TEST_CASE("type aliases expand at parse time") {
  UnitCheck u = check_source("type N = number;\nvar x: N = 5;", "t");
  CHECK(u.errors.empty());
  UnitCheck bad = check_source("var x: Unknown = 5;", "t");
  CHECK(has_code(bad.errors, ErrorCode::Parse));
}

TEST_CASE("maybe annotations accept null, undefined and the payload") {
  UnitCheck u = check_source("var a: ?string = null;\n"
                             "var b: ?string = undefined;\n"
                             "var c: ?string = \"s\";",
                             "t");
  CHECK(u.errors.empty());
  UnitCheck bad = check_source("var a: ?string = 5;", "t");
  CHECK(has_code(bad.errors, ErrorCode::AnnotationMismatch));
}
