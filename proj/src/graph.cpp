#include "flowlet/graph.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace flowlet {

// ---- Reasons -------------------------------------------------------------------

const char *reason_str(InconsistencyReason r) {
  switch (r) {
  case InconsistencyReason::NotAFunction: return "not-a-function";
  case InconsistencyReason::MissingField: return "missing-field";
  case InconsistencyReason::NotARecord: return "not-a-record";
  case InconsistencyReason::ArityMismatch: return "arity-mismatch";
  case InconsistencyReason::ArithMismatch: return "arith-mismatch";
  case InconsistencyReason::IncompatibleWrite: return "incompatible-write";
  case InconsistencyReason::AnnotationMismatch: return "annotation-mismatch";
  }
  return "?";
}

ErrorCode reason_code(InconsistencyReason r) {
  switch (r) {
  case InconsistencyReason::NotAFunction: return ErrorCode::NotAFunction;
  case InconsistencyReason::MissingField: return ErrorCode::MissingField;
  case InconsistencyReason::NotARecord: return ErrorCode::NotARecord;
  case InconsistencyReason::ArityMismatch: return ErrorCode::Arity;
  case InconsistencyReason::ArithMismatch: return ErrorCode::ArithMismatch;
  case InconsistencyReason::IncompatibleWrite: return ErrorCode::IncompatibleWrite;
  case InconsistencyReason::AnnotationMismatch: return ErrorCode::AnnotationMismatch;
  }
  return ErrorCode::Parse;
}

// ---- Variable-erased rendering (closure comparison across renamings) -------------

namespace {

void erased_type(const TypePtr &t, std::string &out);

void erased_lit(const TypeLit &l, std::string &out) {
  if (const auto *b = l.as_base()) {
    out += type_lit_str(TypeLit{*b});
    return;
  }
  if (const auto *a = l.as_arrow()) {
    out += "(";
    for (size_t i = 0; i < a->params.size(); i++) out += i ? ",*" : "*";
    out += ")->";
    erased_type(a->ret, out);
    return;
  }
  out += "{";
  bool first = true;
  for (const auto &[f, v] : l.as_record()->fields) {
    if (!first) out += ",";
    first = false;
    out += f + ":";
    erased_type(v, out);
  }
  out += "}";
}

void erased_type(const TypePtr &t, std::string &out) {
  if (!t) {
    out += "?";
    return;
  }
  if (t->as_var()) {
    out += "*";
    return;
  }
  if (const auto *j = t->as_join()) {
    out += "(";
    erased_type(j->left, out);
    out += " v ";
    erased_type(j->right, out);
    out += ")";
    return;
  }
  erased_lit(*t->as_lit(), out);
}

std::string span_key(const Span &s) {
  return std::to_string(s.file) + ":" + std::to_string(s.pos) + "-" +
         std::to_string(s.end);
}

const char *use_tag(const TypeUse &u) {
  struct V {
    const char *operator()(const UseToVar &) { return "var"; }
    const char *operator()(const UseCall &) { return "call"; }
    const char *operator()(const UseGet &) { return "get"; }
    const char *operator()(const UseSet &) { return "set"; }
    const char *operator()(const UsePred &) { return "pred"; }
    const char *operator()(const UseArith &) { return "arith"; }
    const char *operator()(const UseArithCheck &) { return "arith2"; }
    const char *operator()(const UseAnnot &) { return "annot"; }
    const char *operator()(const UseWriteCheck &) { return "write"; }
  };
  return std::visit(V{}, u);
}

} // namespace

std::string inconsistency_key(const Inconsistency &inc) {
  std::string lhs;
  erased_lit(inc.lhs, lhs);
  std::string field;
  if (const auto *g = std::get_if<UseGet>(&inc.use)) field = g->field;
  if (const auto *s = std::get_if<UseSet>(&inc.use)) field = s->field;
  return std::string(reason_str(inc.reason)) + "|" + use_tag(inc.use) + "|" +
         inc.field + field + "|" + lhs + "|" + span_key(inc.lhs_origin) + "|" +
         span_key(inc.use_span);
}

// ---- check -----------------------------------------------------------------------

namespace {

bool singleton_truthy(const BaseLit &b) {
  switch (b.kind) {
  case BaseKind::Num: return b.value != "0" && b.value != "-0";
  case BaseKind::Str: return !b.value.empty();
  case BaseKind::Bool: return b.value == "true";
  case BaseKind::Void:
  case BaseKind::Null: return false;
  }
  return true;
}

TypeofKind lit_typeof(const TypeLit &l) {
  if (const auto *b = l.as_base()) {
    switch (b->kind) {
    case BaseKind::Num: return TypeofKind::Number;
    case BaseKind::Str: return TypeofKind::String;
    case BaseKind::Bool: return TypeofKind::Boolean;
    case BaseKind::Void: return TypeofKind::Undefined;
    case BaseKind::Null: return TypeofKind::Object; // as at runtime
    }
  }
  if (l.as_arrow()) return TypeofKind::Function;
  return TypeofKind::Object;
}

bool check_base(const TypeLit &l, const BasePred &p) {
  const BaseLit *b = l.as_base();
  switch (p.tag) {
  case BasePred::Tag::Truthy:
    if (l.as_arrow() || l.as_record()) return true;
    if (b->kind == BaseKind::Void || b->kind == BaseKind::Null) return false;
    return b->singleton ? singleton_truthy(*b) : true;
  case BasePred::Tag::Falsy:
    if (l.as_arrow() || l.as_record()) return false;
    if (b->kind == BaseKind::Void || b->kind == BaseKind::Null) return true;
    return b->singleton ? !singleton_truthy(*b) : true;
  case BasePred::Tag::Nullish:
    return b && (b->kind == BaseKind::Void || b->kind == BaseKind::Null);
  case BasePred::Tag::TypeofIs:
    return lit_typeof(l) == p.typeof_kind;
  case BasePred::Tag::FieldEq: {
    const RecordLit *r = l.as_record();
    if (!r) return false;
    auto it = r->fields.find(p.field);
    if (it == r->fields.end()) return false;
    const TypePtr &fv = it->second;
    if (fv->as_var()) return false; // awaits concretization
    if (fv->as_join()) return true; // mixed content: keep it
    const BaseLit *fb = fv->as_lit()->as_base();
    if (!fb || fb->kind != BaseKind::Str) return false;
    return fb->singleton ? fb->value == p.value : true;
  }
  }
  return true;
}

bool check_neg(const TypeLit &l, const BasePred &p) {
  switch (p.tag) {
  case BasePred::Tag::Truthy:
  case BasePred::Tag::Falsy:
    // never negated; folded at construction
    return !check_base(l, p);
  case BasePred::Tag::Nullish:
  case BasePred::Tag::TypeofIs:
    return !check_base(l, p); // exact on constructors
  case BasePred::Tag::FieldEq: {
    const RecordLit *r = l.as_record();
    if (!r) return true;
    auto it = r->fields.find(p.field);
    if (it == r->fields.end()) return true;
    const TypePtr &fv = it->second;
    if (fv->as_var() || fv->as_join()) return true; // unresolved: keep it
    const BaseLit *fb = fv->as_lit()->as_base();
    if (!fb || fb->kind != BaseKind::Str) return true;
    return fb->singleton ? fb->value != p.value : true;
  }
  }
  return true;
}

} // namespace

bool check_pred(const TypeLit &l, const Predicate &q) {
  return q.negated ? check_neg(l, q.base) : check_base(l, q.base);
}

// Whether a value of literal type `incoming` fits a pinned literal.
bool lit_subsumes(const TypeLit &pinned, const TypeLit &incoming) {
  if (const auto *pb = pinned.as_base()) {
    const BaseLit *ib = incoming.as_base();
    if (!ib || ib->kind != pb->kind) return false;
    if (!pb->singleton) return true;
    return ib->singleton && ib->value == pb->value;
  }
  return lit_equal(pinned, incoming);
}

// ---- Graph basics -------------------------------------------------------------------

uint32_t ConstraintGraph::alloc(Span sp) {
  uint32_t id = next_id_++;
  parent_.push_back(id);
  spans_.push_back(sp);
  return id;
}

TypeVar ConstraintGraph::fresh_type_var(Span sp) { return TypeVar{alloc(sp)}; }
EffectVar ConstraintGraph::fresh_effect_var(Span sp) { return EffectVar{alloc(sp)}; }

EffectVar ConstraintGraph::escape_var() {
  if (!escape_) escape_ = fresh_effect_var({});
  return *escape_;
}

void ConstraintGraph::reserve_vars(uint32_t count) {
  while (next_id_ < count) alloc({});
}

Span ConstraintGraph::var_span(uint32_t id) const {
  return id < spans_.size() ? spans_[id] : Span{};
}

void ConstraintGraph::note_param_annotation(TypeVar v, AnnotPtr a) {
  param_annots_[find(v.id)] = std::move(a);
}

AnnotPtr ConstraintGraph::param_annotation(TypeVar v) const {
  auto it = param_annots_.find(find(v.id));
  return it == param_annots_.end() ? nullptr : it->second;
}

uint32_t ConstraintGraph::find(uint32_t id) const {
  while (parent_[id] != id) {
    parent_[id] = parent_[parent_[id]];
    id = parent_[id];
  }
  return id;
}

ConstraintGraph::Class &ConstraintGraph::cls(uint32_t rep) { return classes_[rep]; }

const ConstraintGraph::Class *ConstraintGraph::cls_if(uint32_t rep) const {
  auto it = classes_.find(rep);
  return it == classes_.end() ? nullptr : &it->second;
}

std::vector<TypeLowerBound> ConstraintGraph::lowers_of(TypeVar v) const {
  const Class *c = cls_if(find(v.id));
  return c ? c->tlowers : std::vector<TypeLowerBound>{};
}

std::vector<TypeUpperBound> ConstraintGraph::uppers_of(TypeVar v) const {
  const Class *c = cls_if(find(v.id));
  return c ? c->tuppers : std::vector<TypeUpperBound>{};
}

std::vector<EffectLowerBound> ConstraintGraph::effect_lowers_of(EffectVar v) const {
  const Class *c = cls_if(find(v.id));
  return c ? c->elowers : std::vector<EffectLowerBound>{};
}

// ---- Worklist ------------------------------------------------------------------------

void ConstraintGraph::enqueue(WorkItem w) { queue_.push_back(std::move(w)); }

void ConstraintGraph::add(const TypeConstraint &c) {
  enqueue(c);
  drain();
}

void ConstraintGraph::add(const EffectConstraint &c) {
  enqueue(c);
  drain();
}

void ConstraintGraph::add(const Constraint &c) {
  if (const auto *t = std::get_if<TypeConstraint>(&c)) add(*t);
  else add(std::get<EffectConstraint>(c));
}

void ConstraintGraph::drain() {
  if (draining_) return; // the outer drain loop finishes the queue
  draining_ = true;
  while (!queue_.empty()) {
    WorkItem w = std::move(queue_.front());
    queue_.pop_front();
    if (auto *tc = std::get_if<TypeConstraint>(&w)) process(*tc);
    else if (auto *ec = std::get_if<EffectConstraint>(&w)) process(*ec);
    else if (auto *pp = std::get_if<PendingPair>(&w))
      pair_lit_use(pp->lit, pp->origin, pp->hop, pp->use, pp->use_span);
    else {
      auto &ep = std::get<PendingEffPair>(w);
      pair_eff_use(ep.id, ep.origin, ep.use, ep.use_span);
    }
  }
  draining_ = false;
}

void ConstraintGraph::process(const TypeConstraint &c) {
  if (!c.lhs) return;
  if (const auto *v = c.lhs->as_var()) {
    uint32_t rep = find(v->id);
    if (const auto *tv = std::get_if<UseToVar>(&c.use))
      if (find(tv->target.id) == rep) return; // self edge
    insert_upper(rep, c.use, c.use_span);
    return;
  }
  if (const auto *j = c.lhs->as_join()) {
    enqueue(TypeConstraint{j->left, c.use, c.lhs_span, c.use_span});
    enqueue(TypeConstraint{j->right, c.use, c.lhs_span, c.use_span});
    return;
  }
  enqueue(PendingPair{*c.lhs->as_lit(), c.lhs_span, c.lhs_span, c.use, c.use_span});
}

void ConstraintGraph::process(const EffectConstraint &c) {
  if (!c.lhs || c.lhs->is_empty()) return;
  if (const auto *v = c.lhs->as_var()) {
    uint32_t rep = find(v->id);
    if (const auto *tv = std::get_if<UseToEVar>(&c.use))
      if (find(tv->target.id) == rep) return;
    insert_eff_upper(rep, c.use, c.use_span);
    return;
  }
  if (const auto *j = c.lhs->as_join()) {
    enqueue(EffectConstraint{j->left, c.use, c.lhs_span, c.use_span});
    enqueue(EffectConstraint{j->right, c.use, c.lhs_span, c.use_span});
    return;
  }
  enqueue(PendingEffPair{*c.lhs->as_name(), c.lhs_span, c.use, c.use_span});
}

void ConstraintGraph::insert_lower(uint32_t rep, const TypeLit &lit, Span origin,
                                   Span hop) {
  std::string key =
      "L" + std::to_string(rep) + "|" + type_lit_str(lit) + "|" + span_key(origin);
  if (!seen_.insert(key).second) return;
  Class &c = cls(rep);
  c.tlowers.push_back(TypeLowerBound{lit, origin, hop});
  auto uppers = c.tuppers; // snapshot: pairing may grow the class
  for (const auto &u : uppers)
    enqueue(PendingPair{lit, origin, hop, u.use, u.span});
  auto watchers = c.watchers;
  for (const auto &w : watchers) fire_watcher(w, lit, origin);
}

void ConstraintGraph::insert_upper(uint32_t rep, const TypeUse &use, Span span) {
  std::string key = "U" + std::to_string(rep) + "|" + use_str(use) + "|" + span_key(span);
  if (!seen_.insert(key).second) return;
  Class &c = cls(rep);
  c.tuppers.push_back(TypeUpperBound{use, span});
  auto lowers = c.tlowers;
  for (const auto &l : lowers)
    enqueue(PendingPair{l.lit, l.origin, l.hop, use, span});
}

void ConstraintGraph::insert_eff_lower(uint32_t rep, const Ident &id, Span origin) {
  std::string key = "l" + std::to_string(rep) + "|" + std::to_string(id.uid) + "|" +
                    id.text + "|" + span_key(origin);
  if (!seen_.insert(key).second) return;
  Class &c = cls(rep);
  c.elowers.push_back(EffectLowerBound{id, origin});
  auto uppers = c.euppers;
  for (const auto &u : uppers)
    enqueue(PendingEffPair{id, origin, u.use, u.span});
}

void ConstraintGraph::insert_eff_upper(uint32_t rep, const EffectUse &use, Span span) {
  std::string key =
      "u" + std::to_string(rep) + "|" + effect_use_str(use) + "|" + span_key(span);
  if (!seen_.insert(key).second) return;
  Class &c = cls(rep);
  c.euppers.push_back(EffectUpperBound{use, span});
  auto lowers = c.elowers;
  for (const auto &l : lowers)
    enqueue(PendingEffPair{l.id, l.origin, use, span});
}

void ConstraintGraph::report(InconsistencyReason r, const TypeLit &lhs,
                             const TypeUse &use, std::string field, Span lhs_origin,
                             Span lhs_hop, Span use_span) {
  Inconsistency inc{lhs, use, r, std::move(field), lhs_origin, lhs_hop, use_span};
  std::string key = "I|" + inconsistency_key(inc);
  if (!seen_.insert(key).second) return;
  incons_.push_back(std::move(inc));
}

// One lower bound meets one use.
void ConstraintGraph::pair_lit_use(const TypeLit &lit, Span origin, Span hop,
                                   const TypeUse &use, Span use_span) {
  std::string key = "P|" + type_lit_str(lit) + "|" + span_key(origin) + "<=" +
                    use_str(use) + "|" + span_key(use_span);
  if (!seen_.insert(key).second) return;

  if (const auto *tv = std::get_if<UseToVar>(&use)) {
    insert_lower(find(tv->target.id), lit, origin, use_span);
    return;
  }

  if (const auto *call = std::get_if<UseCall>(&use)) {
    const ArrowLit *a = lit.as_arrow();
    if (!a) {
      report(InconsistencyReason::NotAFunction, lit, use, "", origin, hop, use_span);
      return;
    }
    if (a->params.size() != call->args.size()) {
      report(InconsistencyReason::ArityMismatch, lit, use, "", origin, hop, use_span);
      return;
    }
    for (size_t i = 0; i < a->params.size(); i++)
      enqueue(TypeConstraint{call->args[i].type, UseToVar{a->params[i]},
                             call->args[i].span, call->args[i].span});
    enqueue(TypeConstraint{a->ret, UseToVar{call->ret}, origin, use_span});
    enqueue(EffectConstraint{a->effect, UseToEVar{call->effect}, origin, use_span});
    return;
  }

  if (const auto *get = std::get_if<UseGet>(&use)) {
    const RecordLit *r = lit.as_record();
    if (!r) {
      report(InconsistencyReason::NotARecord, lit, use, get->field, origin, hop, use_span);
      return;
    }
    auto it = r->fields.find(get->field);
    if (it == r->fields.end()) {
      report(InconsistencyReason::MissingField, lit, use, get->field, origin, hop,
             use_span);
      return;
    }
    enqueue(TypeConstraint{it->second, UseToVar{get->out}, origin, use_span});
    return;
  }

  if (const auto *set = std::get_if<UseSet>(&use)) {
    const RecordLit *r = lit.as_record();
    if (!r) {
      report(InconsistencyReason::NotARecord, lit, use, set->field, origin, hop, use_span);
      return;
    }
    auto it = r->fields.find(set->field);
    if (it == r->fields.end()) {
      report(InconsistencyReason::MissingField, lit, use, set->field, origin, hop,
             use_span);
      return;
    }
    if (const auto *fv = it->second->as_var()) {
      enqueue(TypeConstraint{set->value, UseToVar{*fv}, use_span, use_span});
    } else if (it->second->as_lit()) {
      // The field was pinned by a predicate test; writes must keep the value.
      auto pinned = std::make_shared<const TypeLit>(*it->second->as_lit());
      enqueue(TypeConstraint{set->value, UseWriteCheck{std::move(pinned)}, use_span,
                             use_span});
    }
    return;
  }

  if (const auto *wc = std::get_if<UseWriteCheck>(&use)) {
    if (!lit_subsumes(*wc->pinned, lit))
      report(InconsistencyReason::IncompatibleWrite, lit, use, "", origin, hop, use_span);
    return;
  }

  if (const auto *pred = std::get_if<UsePred>(&use)) {
    if (!refinements_ || check_pred(lit, pred->pred)) {
      PendingPair pass{lit, origin, hop, UseToVar{pred->out}, use_span};
      enqueue(std::move(pass));
    }
    if (refinements_) register_watchers(lit, origin, hop, *pred, use_span);
    return;
  }

  if (const auto *ar = std::get_if<UseArith>(&use)) {
    std::optional<BaseKind> k;
    if (const auto *b = lit.as_base())
      if (b->kind == BaseKind::Num || b->kind == BaseKind::Str) k = b->kind;
    enqueue(TypeConstraint{ar->rhs, UseArithCheck{k, origin, ar->out}, ar->rhs_span,
                           use_span});
    return;
  }

  if (const auto *ac = std::get_if<UseArithCheck>(&use)) {
    const BaseLit *b = lit.as_base();
    bool ok = ac->lhs_kind && b && b->kind == *ac->lhs_kind &&
              (b->kind == BaseKind::Num || b->kind == BaseKind::Str);
    if (!ok) {
      report(InconsistencyReason::ArithMismatch, lit, use, "", origin, hop, use_span);
      return;
    }
    enqueue(TypeConstraint{t_base(*ac->lhs_kind), UseToVar{ac->out}, use_span, use_span});
    return;
  }

  const auto &an = std::get<UseAnnot>(use);
  handle_annot_use(lit, origin, hop, an.annot, use_span);
}

void ConstraintGraph::pair_eff_use(const Ident &id, Span origin, const EffectUse &use,
                                   Span use_span) {
  std::string key = "E|" + std::to_string(id.uid) + id.text + "|" + span_key(origin) +
                    "<=" + effect_use_str(use) + "|" + span_key(use_span);
  if (!seen_.insert(key).second) return;
  if (const auto *tv = std::get_if<UseToEVar>(&use)) {
    insert_eff_lower(find(tv->target.id), id, origin);
    return;
  }
  const auto &h = std::get<UseHavoc>(use);
  for (const auto &entry : h.entries) {
    if (entry.id.uid != id.uid) continue;
    if (const auto *src = entry.source->as_var()) {
      unify(src->id, entry.target.id);
    } else {
      enqueue(TypeConstraint{entry.source, UseToVar{entry.target}, use_span, use_span});
    }
  }
}

void ConstraintGraph::unify(uint32_t a, uint32_t b) {
  uint32_t ra = find(a), rb = find(b);
  if (ra == rb) return;
  // Keep the smaller id as representative for deterministic dumps.
  if (rb < ra) std::swap(ra, rb);
  Class merged = classes_.count(rb) ? std::move(classes_[rb]) : Class{};
  classes_.erase(rb);
  parent_[rb] = ra;
  Class &dst = cls(ra);
  for (auto &x : merged.tlowers) dst.tlowers.push_back(std::move(x));
  for (auto &x : merged.tuppers) dst.tuppers.push_back(std::move(x));
  for (auto &x : merged.elowers) dst.elowers.push_back(std::move(x));
  for (auto &x : merged.euppers) dst.euppers.push_back(std::move(x));
  for (auto &x : merged.watchers) dst.watchers.push_back(std::move(x));
  auto pa = param_annots_.find(rb);
  if (pa != param_annots_.end()) {
    param_annots_.emplace(ra, pa->second);
    param_annots_.erase(pa);
  }
  requeue_class(ra);
}

void ConstraintGraph::requeue_class(uint32_t rep) {
  const Class &c = cls(rep);
  auto lowers = c.tlowers;
  auto uppers = c.tuppers;
  auto elos = c.elowers;
  auto eups = c.euppers;
  auto watchers = c.watchers;
  for (const auto &l : lowers) {
    for (const auto &u : uppers)
      enqueue(PendingPair{l.lit, l.origin, l.hop, u.use, u.span});
    for (const auto &w : watchers) fire_watcher(w, l.lit, l.origin);
  }
  for (const auto &l : elos)
    for (const auto &u : eups)
      enqueue(PendingEffPair{l.id, l.origin, u.use, u.span});
}

// ---- Predicate concretization -----------------------------------------------------

namespace {

TypePtr subst_type(const TypePtr &t, const std::vector<std::string> &path, size_t at,
                   const TypeLit &replacement);

TypeLit subst_lit(const TypeLit &l, const std::vector<std::string> &path, size_t at,
                  const TypeLit &replacement) {
  if (at == path.size()) return replacement; // unreachable; holes are vars
  const std::string &step = path[at];
  if (step == "->ret") {
    const ArrowLit *a = l.as_arrow();
    return TypeLit{ArrowLit{a->params, a->effect, subst_type(a->ret, path, at + 1, replacement)}};
  }
  const RecordLit *r = l.as_record();
  RecordLit out = *r;
  const std::string field = step.substr(1);
  out.fields[field] = subst_type(out.fields.at(field), path, at + 1, replacement);
  return TypeLit{std::move(out)};
}

TypePtr subst_type(const TypePtr &t, const std::vector<std::string> &path, size_t at,
                   const TypeLit &replacement) {
  if (at == path.size()) return t_lit(replacement); // t is the hole var
  const std::string &step = path[at];
  if (step == "|l") {
    const JoinType *j = t->as_join();
    return t_join(subst_type(j->left, path, at + 1, replacement), j->right);
  }
  if (step == "|r") {
    const JoinType *j = t->as_join();
    return t_join(j->left, subst_type(j->right, path, at + 1, replacement));
  }
  return t_lit(subst_lit(*t->as_lit(), path, at, replacement));
}

} // namespace

// Holes are instantiated only where the check can see the difference: the
// field a field-equality test inspects, one level deep, in positive position.
// Truthiness, nullability and typeof tests read the top-level constructor
// alone, so concretizing under them would change nothing. This also keeps the
// derivable literal universe finite for recursive record types.
void ConstraintGraph::register_watchers(const TypeLit &lit, Span origin, Span hop,
                                        const UsePred &use, Span use_span) {
  if (use.pred.base.tag != BasePred::Tag::FieldEq) return;
  const RecordLit *r = lit.as_record();
  if (!r) return;
  auto it = r->fields.find(use.pred.base.field);
  if (it == r->fields.end()) return;
  const TypeVar *fv = it->second->as_var();
  if (!fv) return; // already concrete
  std::vector<std::string> path{"." + use.pred.base.field};
  uint32_t rep = find(fv->id);
  std::string key = "W" + std::to_string(rep) + "|" + type_lit_str(lit) + "|" + path[0] +
                    "|" + use_str(TypeUse{use}) + span_key(use_span) + span_key(origin);
  if (!seen_.insert(key).second) return;
  Class::Watcher w{lit, path, use, origin, hop, use_span};
  Class &c = cls(rep);
  c.watchers.push_back(w);
  auto lowers = c.tlowers;
  for (const auto &l : lowers) fire_watcher(w, l.lit, l.origin);
}

void ConstraintGraph::fire_watcher(const Class::Watcher &w, const TypeLit &arrived,
                                   Span arrived_origin) {
  (void)arrived_origin;
  TypeLit substituted = subst_lit(w.pattern, w.path, 0, arrived);
  enqueue(PendingPair{std::move(substituted), w.origin, w.hop, TypeUse{w.use}, w.use_span});
}

// ---- Ordering & dumps ------------------------------------------------------------------

std::vector<Inconsistency> ConstraintGraph::consistency_errors() const {
  std::vector<Inconsistency> out = incons_;
  std::stable_sort(out.begin(), out.end(), [](const Inconsistency &a, const Inconsistency &b) {
    if (!(a.use_span == b.use_span)) return a.use_span < b.use_span;
    if (a.reason != b.reason) return static_cast<int>(a.reason) < static_cast<int>(b.reason);
    return a.lhs_origin < b.lhs_origin;
  });
  return out;
}

std::string ConstraintGraph::dump_dot() const {
  std::ostringstream os;
  os << "digraph constraints {\n  node [shape=box, fontname=\"monospace\"];\n";
  for (const auto &[rep, c] : classes_) {
    std::vector<uint32_t> members;
    for (uint32_t i = 0; i < next_id_; i++)
      if (find(i) == rep) members.push_back(i);
    os << "  n" << rep << " [label=\"";
    for (size_t i = 0; i < members.size(); i++)
      os << (i ? " = " : "") << "a" << members[i];
    for (const auto &l : c.tlowers) os << "\\n<- " << type_lit_str(l.lit);
    for (const auto &l : c.elowers) os << "\\n<- " << l.id.text;
    os << "\"];\n";
    for (const auto &u : c.tuppers) {
      if (const auto *tv = std::get_if<UseToVar>(&u.use)) {
        os << "  n" << rep << " -> n" << find(tv->target.id) << ";\n";
      } else {
        os << "  n" << rep << " -> \"" << use_str(u.use) << "\" [style=dashed];\n";
      }
    }
  }
  int i = 0;
  for (const auto &inc : incons_) {
    os << "  err" << i++ << " [color=red, label=\"" << reason_str(inc.reason) << ": "
       << type_lit_str(inc.lhs) << " <= " << use_str(inc.use) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

} // namespace flowlet
