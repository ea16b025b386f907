#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "support/helpers.hpp"
#include "support/progen.hpp"

#include "flowlet/gen.hpp"
#include "flowlet/naive.hpp"

using namespace flowlet;
using flowlet::test::parse_renamed;

namespace {

const char *havoc_src = "var nil = {kind: \"nil\"};\n"
                        "function havoc(x) {\n"
                        "  function reset() { x = null; }\n"
                        "  x = x || nil;\n"
                        "  reset();\n"
                        "  return x.kind;\n"
                        "}\n"
                        "havoc(nil);\n";

const char *merge_src = "var nil = {kind: \"nil\"};\n"
                        "function merge(x) {\n"
                        "  x = x || nil;\n"
                        "  return x.kind;\n"
                        "}\n"
                        "merge(undefined);\n";

std::multiset<std::string> incons_keys(const std::vector<Inconsistency> &incs) {
  std::multiset<std::string> out;
  for (const auto &i : incs) out.insert(inconsistency_key(i));
  return out;
}

TypeLit record_with(std::map<std::string, TypePtr> fields) {
  return TypeLit{RecordLit{std::move(fields)}};
}

} // namespace

TEST_CASE("call decomposition flows arguments, return and effect") {
  ConstraintGraph g;
  TypeVar param = g.fresh_type_var();
  TypeVar ret_site = g.fresh_type_var();
  EffectVar eff_site = g.fresh_effect_var();
  TypePtr arrow = t_arrow({param}, e_name(Ident{"x", 7}), t_num());
  g.add(TypeConstraint{arrow, UseCall{{CallArg{t_str(), {}}}, eff_site, ret_site}, {}, {}});
  // argument reached the parameter
  auto plows = g.lowers_of(param);
  REQUIRE(plows.size() == 1);
  CHECK(type_lit_str(plows[0].lit) == "str");
  // return reached the call site
  auto rlows = g.lowers_of(ret_site);
  REQUIRE(rlows.size() == 1);
  CHECK(type_lit_str(rlows[0].lit) == "num");
  // effect reached the call's effect variable
  auto elows = g.effect_lowers_of(eff_site);
  REQUIRE(elows.size() == 1);
  CHECK(elows[0].id.uid == 7);
}

TEST_CASE("havoc takes the unification form") {
  ConstraintGraph g;
  TypeVar general = g.fresh_type_var();
  TypeVar widened = g.fresh_type_var();
  g.add(TypeConstraint{t_null(), UseToVar{general}, {}, {}});
  g.add(EffectConstraint{e_name(Ident{"x", 1}),
                         UseHavoc{{HavocEntry{Ident{"x", 1}, widened, t_var(general)}}},
                         {},
                         {}});
  CHECK(g.find(general.id) == g.find(widened.id));
  // the general's lower bound is now visible through the widened variable
  auto lows = g.lowers_of(widened);
  REQUIRE(lows.size() == 1);
  CHECK(type_lit_str(lows[0].lit) == "null");
}

TEST_CASE("a successful field test concretizes and passes the record") {
  ConstraintGraph g;
  TypeVar kind_var = g.fresh_type_var();
  TypeVar head_var = g.fresh_type_var();
  TypeVar out = g.fresh_type_var();
  TypeLit rec = record_with({{"kind", t_var(kind_var)}, {"head", t_var(head_var)}});
  g.add(TypeConstraint{t_lit(rec),
                       UsePred{Predicate(BasePred::field_eq("kind", "cons")), out},
                       {},
                       {}});
  CHECK(g.lowers_of(out).empty()); // unresolved sentinel: nothing flows yet
  g.add(TypeConstraint{t_singleton(BaseKind::Str, "cons"), UseToVar{kind_var}, {}, {}});
  auto lows = g.lowers_of(out);
  REQUIRE(lows.size() == 1);
  CHECK(type_lit_str(lows[0].lit).find("kind: \"cons\"") != std::string::npos);
  CHECK(type_lit_str(lows[0].lit).find("head") != std::string::npos);
}

TEST_CASE("a failing field test filters the record out") {
  ConstraintGraph g;
  TypeVar kind_var = g.fresh_type_var();
  TypeVar out = g.fresh_type_var();
  TypeLit rec = record_with({{"kind", t_var(kind_var)}});
  g.add(TypeConstraint{t_singleton(BaseKind::Str, "nil"), UseToVar{kind_var}, {}, {}});
  g.add(TypeConstraint{t_lit(rec),
                       UsePred{Predicate(BasePred::field_eq("kind", "cons")), out},
                       {},
                       {}});
  CHECK(g.lowers_of(out).empty());
  CHECK(g.inconsistencies().empty());
}

TEST_CASE("check_pred on literals") {
  TypeLit cons_rec =
      record_with({{"kind", t_singleton(BaseKind::Str, "cons")}, {"head", t_num()}});
  CHECK(check_pred(cons_rec, Predicate(BasePred::field_eq("kind", "cons"))));
  CHECK(!check_pred(cons_rec, Predicate(BasePred::field_eq("kind", "nil"))));
  CHECK(!check_pred(cons_rec, Predicate(BasePred::field_eq("kind", "cons"), true)));

  CHECK(!check_pred(*t_void()->as_lit(), Predicate(BasePred::truthy())));
  CHECK(check_pred(*t_void()->as_lit(), Predicate(BasePred::falsy())));

  // whole base kinds are conservative: both 1 and 0 inhabit num
  CHECK(check_pred(*t_num()->as_lit(), Predicate(BasePred::truthy())));
  CHECK(check_pred(*t_num()->as_lit(), Predicate(BasePred::falsy())));

  // singletons are exact
  CHECK(check_pred(*t_singleton(BaseKind::Num, "5")->as_lit(), Predicate(BasePred::truthy())));
  CHECK(!check_pred(*t_singleton(BaseKind::Num, "0")->as_lit(), Predicate(BasePred::truthy())));
  CHECK(!check_pred(*t_singleton(BaseKind::Str, "")->as_lit(), Predicate(BasePred::truthy())));

  CHECK(check_pred(*t_null()->as_lit(), Predicate(BasePred::nullish())));
  CHECK(check_pred(*t_void()->as_lit(), Predicate(BasePred::nullish())));
  CHECK(!check_pred(*t_num()->as_lit(), Predicate(BasePred::nullish())));
  CHECK(check_pred(*t_num()->as_lit(), Predicate(BasePred::nullish(), true)));

  CHECK(check_pred(*t_num()->as_lit(), Predicate(BasePred::typeof_is(TypeofKind::Number))));
  TypeLit arrow = *t_arrow({}, e_empty(), t_num())->as_lit();
  CHECK(check_pred(arrow, Predicate(BasePred::typeof_is(TypeofKind::Function))));
  CHECK(check_pred(arrow, Predicate(BasePred::truthy())));
  // typeof null is "object", as at runtime
  CHECK(check_pred(*t_null()->as_lit(), Predicate(BasePred::typeof_is(TypeofKind::Object))));
}

TEST_CASE("unify merges classes and repropagates") {
  ConstraintGraph g;
  TypeVar a = g.fresh_type_var();
  TypeVar b = g.fresh_type_var();
  TypeVar out = g.fresh_type_var();
  g.unify(a.id, a.id); // no-op
  CHECK(g.find(a.id) != g.find(b.id));
  g.add(TypeConstraint{t_var(b), UseGet{"kind", out}, {}, {}});
  g.unify(a.id, b.id);
  // a lower arriving at a now reaches b's uses
  g.add(TypeConstraint{t_record({{"kind", t_num()}}), UseToVar{a}, {}, {}});
  auto lows = g.lowers_of(out);
  REQUIRE(lows.size() == 1);
  CHECK(type_lit_str(lows[0].lit) == "num");
}

TEST_CASE("naive closure of the empty set is empty") {
  NaiveResult r = naive_close({});
  CHECK(r.closure.empty());
  CHECK(r.inconsistencies.empty());
  CHECK(!r.diverged);
}

TEST_CASE("naive closure of the havoc program derives null into the field read") {
  UnitCheck u = check_source(havoc_src, "havoc.fc");
  NaiveResult r = naive_close(u.gen_log);
  bool found = false;
  for (const auto &c : r.closure) {
    const auto *tc = std::get_if<TypeConstraint>(&c);
    if (!tc) continue;
    const auto *get = std::get_if<UseGet>(&tc->use);
    if (!get || get->field != "kind") continue;
    if (tc->lhs->as_lit() && tc->lhs->as_lit()->as_base() &&
        tc->lhs->as_lit()->as_base()->kind == BaseKind::Null)
      found = true;
  }
  CHECK(found);
  CHECK(!r.inconsistencies.empty());
}

TEST_CASE("naive closure of the merge program stays consistent") {
  UnitCheck u = check_source(merge_src, "merge.fc");
  NaiveResult r = naive_close(u.gen_log);
  CHECK(r.inconsistencies.empty());
  CHECK(!r.diverged);
}

TEST_CASE("naive closure flags divergence at its cap") {
  UnitCheck u = check_source(havoc_src, "havoc.fc");
  NaiveResult r = naive_close(u.gen_log, 10);
  CHECK(r.diverged);
}

TEST_CASE("consistency errors: the pipe programs") {
  UnitCheck bad = check_source("function pipe(x, f) { f(x); }\npipe(\"hello\", null);", "t");
  auto errs = bad.graph->consistency_errors();
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].reason == InconsistencyReason::NotAFunction);

  UnitCheck guarded = check_source(
      "function pipe(x, f) { if (f != null) { f(x); } }\npipe(\"hello\", null);", "t");
  CHECK(guarded.graph->consistency_errors().empty());

  ConstraintGraph empty;
  CHECK(empty.consistency_errors().empty());
}

TEST_CASE("field-test concretization is positive-position only") {
  // positive: a record field hole concretizes under its field test
  ConstraintGraph g;
  TypeVar hole = g.fresh_type_var();
  TypeVar out = g.fresh_type_var();
  g.add(TypeConstraint{t_lit(record_with({{"kind", t_var(hole)}})),
                       UsePred{Predicate(BasePred::field_eq("kind", "a")), out},
                       {},
                       {}});
  g.add(TypeConstraint{t_singleton(BaseKind::Str, "a"), UseToVar{hole}, {}, {}});
  CHECK(g.lowers_of(out).size() == 1);

  // negative: an arrow-parameter hole never concretizes
  ConstraintGraph g2;
  TypeVar param = g2.fresh_type_var();
  TypeVar out2 = g2.fresh_type_var();
  g2.add(TypeConstraint{t_arrow({param}, e_empty(), t_num()),
                        UsePred{Predicate(BasePred::typeof_is(TypeofKind::Function)), out2},
                        {},
                        {}});
  g2.add(TypeConstraint{t_str(), UseToVar{param}, {}, {}});
  auto lows = g2.lowers_of(out2);
  REQUIRE(lows.size() == 1); // the arrow passed through unchanged, once
  const ArrowLit *a = lows[0].lit.as_arrow();
  REQUIRE(a != nullptr);
  CHECK(a->params[0] == param); // parameter still the variable, not str
}

TEST_CASE("adding constraints never removes inconsistencies") {
  ConstraintGraph g;
  TypeVar f = g.fresh_type_var();
  g.add(TypeConstraint{t_null(), UseToVar{f}, {}, {}});
  g.add(TypeConstraint{t_var(f), UseCall{{}, g.fresh_effect_var(), g.fresh_type_var()}, {}, {}});
  REQUIRE(g.inconsistencies().size() == 1);
  auto before = incons_keys(g.inconsistencies());
  g.add(TypeConstraint{t_num(), UseToVar{f}, {}, {}});
  g.add(TypeConstraint{t_var(f), UseGet{"kind", g.fresh_type_var()}, {}, {}});
  auto after = incons_keys(g.inconsistencies());
  for (const auto &k : before) CHECK(after.count(k) >= 1);
  CHECK(after.size() >= before.size());
}

TEST_CASE("closure verdict is insertion-order independent") {
  std::mt19937 rng(11);
  int interesting = 0;
  for (uint32_t seed = 1; seed <= 25; seed++) {
    flowlet::test::Progen gen(seed, 40);
    std::string src = gen.program();
    CAPTURE(src);
    UnitCheck u = check_source(src, "t");
    if (!u.parse_ok) continue;
    auto baseline = incons_keys(u.graph->inconsistencies());
    if (!baseline.empty()) interesting++;
    for (int perm = 0; perm < 4; perm++) {
      ConstraintSet shuffled = u.gen_log;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      ConstraintGraph g;
      g.reserve_vars(u.graph->var_count());
      for (const auto &c : shuffled) g.add(c);
      CHECK(incons_keys(g.inconsistencies()) == baseline);
    }
  }
  CHECK(interesting > 0); // the corpus must exercise the error paths
}

TEST_CASE("optimized graph agrees with the naive closure") {
  int checked = 0, inconsistent = 0;
  for (uint32_t seed = 200; seed < 260; seed++) {
    flowlet::test::Progen gen(seed, 35);
    std::string src = gen.program();
    CAPTURE(src);
    UnitCheck u = check_source(src, "t");
    if (!u.parse_ok) continue;
    NaiveResult naive = naive_close(u.gen_log);
    REQUIRE(!naive.diverged);
    auto fast = incons_keys(u.graph->inconsistencies());
    auto slow = incons_keys(naive.inconsistencies);
    CHECK(fast == slow);
    checked++;
    if (!fast.empty()) inconsistent++;
  }
  CHECK(checked >= 40);
  CHECK(inconsistent > 0);
}
