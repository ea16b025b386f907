#include <algorithm>
#include <map>
#include <set>

#include "flowlet/graph.hpp"

namespace flowlet {

namespace {

BaseLit base_of_annot(const AnnotBase &b) {
  return BaseLit{b.kind, b.value, b.has_value};
}

// lb satisfies a base annotation when its kind matches and, for singleton
// annotations, the value matches too. Singletons subsume into their kind.
bool base_annot_ok(const TypeLit &lb, const AnnotBase &a) {
  const BaseLit *b = lb.as_base();
  if (!b || b->kind != a.kind) return false;
  if (!a.has_value) return true;
  return b->singleton && b->value == a.value;
}

} // namespace

// ---- Materialization: annotation as a value source ----------------------------------

TypePtr ConstraintGraph::materialize_annot(const AnnotPtr &a, Span span) {
  if (!a) return t_var(fresh_type_var(span)); // missing annotation: unconstrained
  switch (a->tag) {
  case Annot::Tag::Base: {
    BaseLit b = base_of_annot(a->base);
    return t_lit(TypeLit{b});
  }
  case Annot::Tag::Union:
    return t_join(materialize_annot(a->uni.left, span),
                  materialize_annot(a->uni.right, span));
  case Annot::Tag::Record: {
    std::map<std::string, TypePtr> fields;
    for (const auto &[f, fa] : a->record.fields) {
      TypeVar fv = fresh_type_var(fa ? fa->span : span);
      add(TypeConstraint{materialize_annot(fa, span), UseToVar{fv}, fa->span, fa->span});
      add(TypeConstraint{t_var(fv), UseAnnot{fa}, fa->span, fa->span});
      fields.emplace(f, t_var(fv));
    }
    return t_record(std::move(fields));
  }
  case Annot::Tag::Arrow: {
    std::vector<TypeVar> params;
    for (const auto &pa : a->arrow.params) {
      TypeVar pv = fresh_type_var(pa ? pa->span : span);
      if (pa) add(TypeConstraint{t_var(pv), UseAnnot{pa}, pa->span, pa->span});
      params.push_back(pv);
    }
    TypePtr ret = materialize_annot(a->arrow.ret, span);
    return t_arrow(std::move(params), e_var(escape_var()), std::move(ret));
  }
  }
  return t_var(fresh_type_var(span));
}

void ConstraintGraph::check_annotation(const TypePtr &lb, const AnnotPtr &a,
                                       Span lb_span, Span use_span) {
  add(TypeConstraint{lb, UseAnnot{a}, lb_span, use_span});
}

// ---- Annotation as a use --------------------------------------------------------------

void ConstraintGraph::handle_annot_use(const TypeLit &lit, Span origin, Span hop,
                                       const AnnotPtr &a, Span use_span) {
  if (!a) return;
  // The wiring of an annotated binding makes the annotation's own
  // materialization a lower bound of the checked class; testing it against
  // itself is a tautology (and would second-guess union choices).
  if (origin == use_span) return;
  switch (a->tag) {
  case Annot::Tag::Base:
    if (!base_annot_ok(lit, a->base))
      report(InconsistencyReason::AnnotationMismatch, lit, UseAnnot{a}, "", origin, hop,
             use_span);
    return;
  case Annot::Tag::Record: {
    // Expand field-wise against the arriving value; non-records fail on the
    // derived get/set uses.
    for (const auto &[f, fa] : a->record.fields) {
      TypeVar out = fresh_type_var(hop);
      enqueue(PendingPair{lit, origin, hop, UseGet{f, out}, hop});
      enqueue(TypeConstraint{t_var(out), UseAnnot{fa}, fa ? fa->span : use_span, hop});
      enqueue(PendingPair{lit, origin, hop, UseSet{f, materialize_annot(fa, use_span)},
                          hop});
    }
    return;
  }
  case Annot::Tag::Arrow: {
    std::vector<CallArg> args;
    for (const auto &pa : a->arrow.params)
      args.push_back(CallArg{materialize_annot(pa, use_span), pa ? pa->span : use_span});
    TypeVar ret = fresh_type_var(use_span);
    enqueue(PendingPair{lit, origin, hop,
                        UseCall{std::move(args), escape_var(), ret}, hop});
    enqueue(TypeConstraint{t_var(ret), UseAnnot{a->arrow.ret},
                           a->arrow.ret ? a->arrow.ret->span : use_span, hop});
    return;
  }
  case Annot::Tag::Union: {
    Speculation sp = speculate_union(lit, origin, hop, a->uni.left, a->uni.right);
    if (sp.ambiguous) {
      AmbiguityError amb;
      amb.annot = a;
      amb.span = hop;
      amb.origin = origin;
      std::set<uint32_t> seen_vars;
      for (TypeVar v : sp.condition_vars) {
        uint32_t rep = find(v.id);
        if (!seen_vars.insert(rep).second) continue;
        Span s = var_span(v.id);
        if (s.end > s.pos || s.line) amb.implicated.push_back(s);
      }
      std::string key = "A|" + annot_str(a) + span_key_for(amb.span) + span_key_for(origin);
      if (seen_.insert(key).second) ambiguities_.push_back(std::move(amb));
      return;
    }
    const AnnotPtr &chosen = sp.branch == 0 ? a->uni.left : a->uni.right;
    enqueue(PendingPair{lit, origin, hop, UseAnnot{chosen}, use_span});
    return;
  }
  }
}

std::string ConstraintGraph::span_key_for(const Span &s) {
  return std::to_string(s.file) + ":" + std::to_string(s.pos) + "-" +
         std::to_string(s.end);
}

// ---- Restricted speculation -------------------------------------------------------------

namespace {

// Closure without transitivity: constraints touching pre-existing graph
// variables are recorded as conditions and never pushed through them.
// Fresh sandbox variables (annotation wiring) propagate locally. Existing
// lower bounds of graph variables may be read, never written.
struct Sandbox {
  const ConstraintGraph &main;
  uint32_t sandbox_base;
  uint32_t next_fresh;
  std::map<uint32_t, std::vector<TypeLowerBound>> local_lowers;
  std::map<uint32_t, std::vector<TypeUpperBound>> local_uppers;
  std::set<std::string> seen;
  std::vector<std::string> recorded; // canonical constraint renderings
  std::map<uint32_t, uint32_t> canon; // var id -> canonical number
  std::set<uint32_t> condition_vars;  // main-graph vars in conditions
  bool inconsistent = false;
  bool ambiguous = false;
  int depth = 0;

  explicit Sandbox(const ConstraintGraph &g, uint32_t base)
      : main(g), sandbox_base(base), next_fresh(base) {}

  bool is_sandbox(uint32_t id) const { return id >= sandbox_base; }

  TypeVar fresh() { return TypeVar{next_fresh++}; }

  std::string var_name(uint32_t id) {
    auto it = canon.find(id);
    uint32_t n;
    if (it != canon.end()) {
      n = it->second;
    } else {
      n = static_cast<uint32_t>(canon.size());
      canon.emplace(id, n);
    }
    return (is_sandbox(id) ? "S" : "V") + std::to_string(n);
  }

  std::string render_type(const TypePtr &t) {
    if (!t) return "?";
    if (const auto *v = t->as_var()) return var_name(v->id);
    if (const auto *j = t->as_join())
      return "(" + render_type(j->left) + " v " + render_type(j->right) + ")";
    return render_lit(*t->as_lit());
  }

  std::string render_lit(const TypeLit &l) {
    if (const auto *b = l.as_base()) return type_lit_str(TypeLit{*b});
    if (const auto *a = l.as_arrow()) {
      std::string s = "(";
      for (size_t i = 0; i < a->params.size(); i++) {
        if (i) s += ", ";
        s += var_name(a->params[i].id);
      }
      return s + ") -> " + render_type(a->ret);
    }
    std::string s = "{";
    bool first = true;
    for (const auto &[f, v] : l.as_record()->fields) {
      if (!first) s += ", ";
      first = false;
      s += f + ": " + render_type(v);
    }
    return s + "}";
  }

  std::string render_use(const TypeUse &u) {
    struct V {
      Sandbox &sb;
      std::string operator()(const UseToVar &x) { return sb.var_name(x.target.id); }
      std::string operator()(const UseCall &x) {
        std::string s = "call(";
        for (size_t i = 0; i < x.args.size(); i++) {
          if (i) s += ", ";
          s += sb.render_type(x.args[i].type);
        }
        return s + "; " + sb.var_name(x.ret.id) + ")";
      }
      std::string operator()(const UseGet &x) {
        return "get(" + x.field + ", " + sb.var_name(x.out.id) + ")";
      }
      std::string operator()(const UseSet &x) {
        return "set(" + x.field + ", " + sb.render_type(x.value) + ")";
      }
      std::string operator()(const UsePred &x) {
        return "pred(" + pred_str(x.pred) + ", " + sb.var_name(x.out.id) + ")";
      }
      std::string operator()(const UseArith &x) {
        return "arith(" + sb.render_type(x.rhs) + ")";
      }
      std::string operator()(const UseArithCheck &) { return "arith-rhs"; }
      std::string operator()(const UseAnnot &x) { return "annot(" + annot_str(x.annot) + ")"; }
      std::string operator()(const UseWriteCheck &x) {
        return "write-check(" + (x.pinned ? sb.render_lit(*x.pinned) : "?") + ")";
      }
    };
    return std::visit(V{*this}, u);
  }

  void note_condition_vars(const TypePtr &t) {
    std::vector<std::pair<TypeVar, bool>> vars;
    collect_vars(t, true, vars);
    for (auto &[v, pos] : vars)
      if (!is_sandbox(v.id)) condition_vars.insert(v.id);
  }

  void record(const std::string &line) {
    if (seen.insert("R|" + line).second) recorded.push_back(line);
  }

  void flow_type(const TypePtr &t, const TypeUse &use, Span tspan, Span uspan);

  void lit_vs_use(const TypeLit &lit, Span origin, const TypeUse &use, Span uspan);

  // Lower bounds visible for a variable: the main graph's closed bounds for
  // pre-existing vars, locally accumulated ones for sandbox vars.
  std::vector<TypeLowerBound> lowers(uint32_t id) {
    if (is_sandbox(id)) {
      auto it = local_lowers.find(id);
      return it == local_lowers.end() ? std::vector<TypeLowerBound>{} : it->second;
    }
    return main.lowers_of(TypeVar{id});
  }

  TypePtr materialize(const AnnotPtr &a, Span span);
  void check_union(const TypeLit &lit, Span origin, const AnnotPtr &l,
                   const AnnotPtr &r, Span uspan);
};

void Sandbox::flow_type(const TypePtr &t, const TypeUse &use, Span tspan, Span uspan) {
  if (!t || inconsistent || ambiguous) return;
  if (const auto *j = t->as_join()) {
    flow_type(j->left, use, tspan, uspan);
    flow_type(j->right, use, tspan, uspan);
    return;
  }
  if (const auto *v = t->as_var()) {
    record(var_name(v->id) + " <= " + render_use(use));
    if (!is_sandbox(v->id)) {
      condition_vars.insert(v->id);
      if (const auto *tv = std::get_if<UseToVar>(&use)) {
        // Feed established facts into sandbox wiring; never the reverse.
        if (is_sandbox(tv->target.id))
          for (const auto &lb : lowers(v->id))
            flow_type(t_lit(lb.lit), use, lb.origin, uspan);
      } else {
        for (const auto &lb : lowers(v->id))
          lit_vs_use(lb.lit, lb.origin, use, uspan);
      }
      return;
    }
    // Sandbox variable: full local propagation.
    if (const auto *tv = std::get_if<UseToVar>(&use); tv && !is_sandbox(tv->target.id)) {
      condition_vars.insert(tv->target.id);
      return; // a condition on a graph var; not propagated
    }
    auto &ups = local_uppers[v->id];
    std::string key = "u" + std::to_string(v->id) + "|" + render_use(use);
    if (seen.insert(key).second) {
      ups.push_back(TypeUpperBound{use, uspan});
      for (const auto &lb : lowers(v->id)) lit_vs_use(lb.lit, lb.origin, use, uspan);
    }
    return;
  }
  lit_vs_use(*t->as_lit(), tspan, use, uspan);
}

void Sandbox::lit_vs_use(const TypeLit &lit, Span origin, const TypeUse &use, Span uspan) {
  if (inconsistent || ambiguous) return;
  std::string key = "P|" + render_lit(lit) + "<=" + render_use(use);
  if (!seen.insert(key).second) return;
  record(render_lit(lit) + " <= " + render_use(use));

  if (const auto *tv = std::get_if<UseToVar>(&use)) {
    if (!is_sandbox(tv->target.id)) {
      condition_vars.insert(tv->target.id);
      return; // condition: lit into a graph var is never replayed here
    }
    auto &los = local_lowers[tv->target.id];
    los.push_back(TypeLowerBound{lit, origin, origin});
    auto it = local_uppers.find(tv->target.id);
    if (it != local_uppers.end()) {
      auto ups = it->second;
      for (const auto &u : ups) lit_vs_use(lit, origin, u.use, u.span);
    }
    return;
  }

  if (const auto *call = std::get_if<UseCall>(&use)) {
    const ArrowLit *a = lit.as_arrow();
    if (!a || a->params.size() != call->args.size()) {
      inconsistent = true;
      return;
    }
    for (size_t i = 0; i < a->params.size(); i++)
      flow_type(call->args[i].type, UseToVar{a->params[i]}, call->args[i].span, uspan);
    flow_type(a->ret, UseToVar{call->ret}, origin, uspan);
    return;
  }

  if (const auto *get = std::get_if<UseGet>(&use)) {
    const RecordLit *r = lit.as_record();
    if (!r) {
      inconsistent = true;
      return;
    }
    auto it = r->fields.find(get->field);
    if (it == r->fields.end()) {
      inconsistent = true;
      return;
    }
    flow_type(it->second, UseToVar{get->out}, origin, uspan);
    return;
  }

  if (const auto *set = std::get_if<UseSet>(&use)) {
    const RecordLit *r = lit.as_record();
    if (!r || !r->fields.count(set->field)) {
      inconsistent = true;
      return;
    }
    const TypePtr &fv = r->fields.at(set->field);
    if (const auto *v = fv->as_var())
      flow_type(set->value, UseToVar{*v}, uspan, uspan);
    return;
  }

  if (const auto *an = std::get_if<UseAnnot>(&use)) {
    const AnnotPtr &a = an->annot;
    if (!a) return;
    switch (a->tag) {
    case Annot::Tag::Base:
      if (!base_annot_ok(lit, a->base)) inconsistent = true;
      return;
    case Annot::Tag::Record: {
      for (const auto &[f, fa] : a->record.fields) {
        TypeVar out = fresh();
        lit_vs_use(lit, origin, UseGet{f, out}, uspan);
        if (inconsistent) return;
        flow_type(t_var(out), UseAnnot{fa}, uspan, uspan);
        if (inconsistent) return;
        lit_vs_use(lit, origin, UseSet{f, materialize(fa, uspan)}, uspan);
        if (inconsistent) return;
      }
      return;
    }
    case Annot::Tag::Arrow: {
      std::vector<CallArg> args;
      for (const auto &pa : a->arrow.params)
        args.push_back(CallArg{materialize(pa, uspan), uspan});
      TypeVar ret = fresh();
      lit_vs_use(lit, origin, UseCall{std::move(args), EffectVar{0}, ret}, uspan);
      if (inconsistent) return;
      flow_type(t_var(ret), UseAnnot{a->arrow.ret}, uspan, uspan);
      return;
    }
    case Annot::Tag::Union:
      check_union(lit, origin, a->uni.left, a->uni.right, uspan);
      return;
    }
    return;
  }

  // Remaining uses (pred, arith, write-check) do not arise from annotation
  // expansion; treat them like their unrestricted counterparts minus flows.
  if (const auto *wc = std::get_if<UseWriteCheck>(&use)) {
    if (!lit_subsumes(*wc->pinned, lit)) inconsistent = true;
    return;
  }
}

TypePtr Sandbox::materialize(const AnnotPtr &a, Span span) {
  if (!a) return t_var(fresh());
  switch (a->tag) {
  case Annot::Tag::Base:
    return t_lit(TypeLit{base_of_annot(a->base)});
  case Annot::Tag::Union:
    return t_join(materialize(a->uni.left, span), materialize(a->uni.right, span));
  case Annot::Tag::Record: {
    std::map<std::string, TypePtr> fields;
    for (const auto &[f, fa] : a->record.fields) {
      TypeVar fv = fresh();
      flow_type(materialize(fa, span), UseToVar{fv}, span, span);
      flow_type(t_var(fv), UseAnnot{fa}, span, span);
      fields.emplace(f, t_var(fv));
    }
    return t_record(std::move(fields));
  }
  case Annot::Tag::Arrow: {
    std::vector<TypeVar> params;
    for (const auto &pa : a->arrow.params) {
      TypeVar pv = fresh();
      if (pa) flow_type(t_var(pv), UseAnnot{pa}, span, span);
      params.push_back(pv);
    }
    return t_arrow(std::move(params), e_empty(), materialize(a->arrow.ret, span));
  }
  }
  return t_var(fresh());
}

// The union decision tree, applied recursively for n-ary (right-nested) unions.
void Sandbox::check_union(const TypeLit &lit, Span origin, const AnnotPtr &l,
                          const AnnotPtr &r, Span uspan) {
  if (depth > 16) {
    ambiguous = true;
    return;
  }
  Sandbox b1(main, sandbox_base);
  b1.next_fresh = next_fresh;
  b1.depth = depth + 1;
  b1.lit_vs_use(lit, origin, UseAnnot{l}, uspan);
  Sandbox b2(main, sandbox_base);
  b2.next_fresh = next_fresh;
  b2.depth = depth + 1;
  b2.lit_vs_use(lit, origin, UseAnnot{r}, uspan);

  auto adopt = [&](Sandbox &b) {
    for (const auto &line : b.recorded) record(line);
    for (uint32_t v : b.condition_vars) condition_vars.insert(v);
    next_fresh = std::max(next_fresh, b.next_fresh);
    if (b.inconsistent) inconsistent = true;
    if (b.ambiguous) ambiguous = true;
  };

  if (b1.ambiguous || b2.ambiguous) {
    ambiguous = true;
    adopt(b1.ambiguous ? b1 : b2);
    return;
  }
  if (b1.inconsistent) {
    adopt(b2);
    return;
  }
  if (b2.inconsistent) {
    adopt(b1);
    return;
  }
  // Both consistent: keep the left branch only when its constraints are a
  // subset of the right's.
  std::set<std::string> s2(b2.recorded.begin(), b2.recorded.end());
  bool subset = true;
  for (const auto &c : b1.recorded)
    if (!s2.count(c)) {
      subset = false;
      break;
    }
  if (subset) {
    adopt(b1);
    return;
  }
  ambiguous = true;
  adopt(b1);
  adopt(b2);
}

} // namespace

ConstraintGraph::Speculation
ConstraintGraph::speculate_union(const TypeLit &lb, Span lb_origin, Span lb_hop,
                                 const AnnotPtr &left, const AnnotPtr &right) const {
  Speculation out;
  // Sandbox ids start far above anything the graph will allocate.
  const uint32_t base = 1u << 30;
  Sandbox b1(*this, base);
  b1.lit_vs_use(lb, lb_origin, UseAnnot{left}, lb_hop);
  Sandbox b2(*this, base);
  b2.lit_vs_use(lb, lb_origin, UseAnnot{right}, lb_hop);

  auto vars_of = [](const Sandbox &b) {
    std::vector<TypeVar> vs;
    for (uint32_t id : b.condition_vars) vs.push_back(TypeVar{id});
    return vs;
  };

  if (b1.ambiguous || b2.ambiguous) {
    out.ambiguous = true;
    out.condition_vars = vars_of(b1.ambiguous ? b1 : b2);
    return out;
  }
  if (b1.inconsistent) {
    out.branch = 1;
    out.constraints = b2.recorded;
    return out;
  }
  if (b2.inconsistent) {
    out.branch = 0;
    out.constraints = b1.recorded;
    return out;
  }
  std::set<std::string> s2(b2.recorded.begin(), b2.recorded.end());
  bool subset = true;
  for (const auto &c : b1.recorded)
    if (!s2.count(c)) {
      subset = false;
      break;
    }
  if (subset) {
    out.branch = 0;
    out.constraints = b1.recorded;
    return out;
  }
  out.ambiguous = true;
  std::set<uint32_t> all(b1.condition_vars.begin(), b1.condition_vars.end());
  all.insert(b2.condition_vars.begin(), b2.condition_vars.end());
  for (uint32_t id : all) out.condition_vars.push_back(TypeVar{id});
  return out;
}

} // namespace flowlet
