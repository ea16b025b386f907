#include "flowlet/types.hpp"

namespace flowlet {

static TypePtr mk(Type t) { return std::make_shared<Type>(std::move(t)); }
static EffectPtr mke(Effect e) { return std::make_shared<Effect>(std::move(e)); }

TypePtr t_lit(TypeLit lit) { return mk(Type{std::move(lit)}); }

TypePtr t_base(BaseKind k) {
  return t_lit(TypeLit{BaseLit{k, "", false}});
}

TypePtr t_singleton(BaseKind k, std::string value) {
  return t_lit(TypeLit{BaseLit{k, std::move(value), true}});
}

TypePtr t_num() { return t_base(BaseKind::Num); }
TypePtr t_str() { return t_base(BaseKind::Str); }
TypePtr t_bool() { return t_base(BaseKind::Bool); }
TypePtr t_void() { return t_base(BaseKind::Void); }
TypePtr t_null() { return t_base(BaseKind::Null); }

TypePtr t_var(TypeVar v) { return mk(Type{v}); }

TypePtr t_arrow(std::vector<TypeVar> params, EffectPtr eff, TypePtr ret) {
  return t_lit(TypeLit{ArrowLit{std::move(params), std::move(eff), std::move(ret)}});
}

TypePtr t_record(std::map<std::string, TypePtr> fields) {
  return t_lit(TypeLit{RecordLit{std::move(fields)}});
}

TypePtr t_join(TypePtr l, TypePtr r) {
  return mk(Type{JoinType{std::move(l), std::move(r)}});
}

EffectPtr e_empty() { return mke(Effect{EmptyEffect{}}); }
EffectPtr e_name(Ident id) { return mke(Effect{std::move(id)}); }
EffectPtr e_var(EffectVar v) { return mke(Effect{v}); }

EffectPtr e_join(EffectPtr l, EffectPtr r) {
  if (l->is_empty()) return r;
  if (r->is_empty()) return l;
  return mke(Effect{JoinEffect{std::move(l), std::move(r)}});
}

// ---- Rendering ---------------------------------------------------------------

static const char *kind_str(BaseKind k) {
  switch (k) {
  case BaseKind::Num: return "num";
  case BaseKind::Str: return "str";
  case BaseKind::Bool: return "bool";
  case BaseKind::Void: return "void";
  case BaseKind::Null: return "null";
  }
  return "?";
}

std::string type_lit_str(const TypeLit &l) {
  if (const auto *b = l.as_base()) {
    if (!b->singleton) return kind_str(b->kind);
    if (b->kind == BaseKind::Str) return "\"" + b->value + "\"";
    return std::string(kind_str(b->kind)) + ":" + b->value;
  }
  if (const auto *a = l.as_arrow()) {
    std::string s = "(";
    for (size_t i = 0; i < a->params.size(); i++) {
      if (i) s += ", ";
      s += "a" + std::to_string(a->params[i].id);
    }
    s += ") ->";
    std::string eff = effect_str(a->effect);
    if (eff != "0") s += "[" + eff + "]";
    return s + " " + type_str(a->ret);
  }
  const auto *r = l.as_record();
  std::string s = "{";
  bool first = true;
  for (const auto &[f, t] : r->fields) {
    if (!first) s += ", ";
    first = false;
    s += f + ": " + type_str(t);
  }
  return s + "}";
}

std::string type_str(const TypePtr &t) {
  if (!t) return "<null>";
  if (const auto *l = t->as_lit()) return type_lit_str(*l);
  if (const auto *j = t->as_join())
    return "(" + type_str(j->left) + " v " + type_str(j->right) + ")";
  return "a" + std::to_string(t->as_var()->id);
}

std::string effect_str(const EffectPtr &e) {
  if (!e || e->is_empty()) return "0";
  if (const auto *n = e->as_name()) return n->text + "#" + std::to_string(n->uid);
  if (const auto *j = e->as_join())
    return "(" + effect_str(j->left) + " v " + effect_str(j->right) + ")";
  return "e" + std::to_string(e->as_var()->id);
}

std::string use_str(const TypeUse &u) {
  struct V {
    std::string operator()(const UseToVar &x) { return "a" + std::to_string(x.target.id); }
    std::string operator()(const UseCall &x) {
      std::string s = "call(";
      for (size_t i = 0; i < x.args.size(); i++) {
        if (i) s += ", ";
        s += type_str(x.args[i].type);
      }
      return s + "; e" + std::to_string(x.effect.id) + "; a" +
             std::to_string(x.ret.id) + ")";
    }
    std::string operator()(const UseGet &x) {
      return "get(" + x.field + ", a" + std::to_string(x.out.id) + ")";
    }
    std::string operator()(const UseSet &x) {
      return "set(" + x.field + ", " + type_str(x.value) + ")";
    }
    std::string operator()(const UsePred &x) {
      return "pred(" + pred_str(x.pred) + ", a" + std::to_string(x.out.id) + ")";
    }
    std::string operator()(const UseArith &x) {
      return "arith(" + type_str(x.rhs) + ", a" + std::to_string(x.out.id) + ")";
    }
    std::string operator()(const UseArithCheck &x) {
      std::string k = x.lhs_kind ? kind_str(*x.lhs_kind) : "none";
      return "arith-rhs(" + k + ", a" + std::to_string(x.out.id) + ")";
    }
    std::string operator()(const UseAnnot &x) { return "annot(" + annot_str(x.annot) + ")"; }
    std::string operator()(const UseWriteCheck &x) {
      return "write-check(" + (x.pinned ? type_lit_str(*x.pinned) : "?") + ")";
    }
  };
  return std::visit(V{}, u);
}

std::string effect_use_str(const EffectUse &u) {
  if (const auto *t = std::get_if<UseToEVar>(&u))
    return "e" + std::to_string(t->target.id);
  const auto &h = std::get<UseHavoc>(u);
  std::string s = "havoc{";
  bool first = true;
  for (const auto &e : h.entries) {
    if (!first) s += ", ";
    first = false;
    s += e.id.text + "#" + std::to_string(e.id.uid) + ": <a" +
         std::to_string(e.target.id) + "; " + type_str(e.source) + ">";
  }
  return s + "}";
}

std::string constraint_str(const Constraint &c) {
  if (const auto *t = std::get_if<TypeConstraint>(&c))
    return type_str(t->lhs) + " <= " + use_str(t->use);
  const auto &e = std::get<EffectConstraint>(c);
  return effect_str(e.lhs) + " <= " + effect_use_str(e.use);
}

// ---- Structural identity -------------------------------------------------------

bool type_equal(const TypePtr &a, const TypePtr &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return type_str(a) == type_str(b);
}

bool lit_equal(const TypeLit &a, const TypeLit &b) {
  return type_lit_str(a) == type_lit_str(b);
}

bool effect_equal(const EffectPtr &a, const EffectPtr &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return effect_str(a) == effect_str(b);
}

bool use_equal(const TypeUse &a, const TypeUse &b) {
  return use_str(a) == use_str(b);
}

// ---- Variable occurrences ------------------------------------------------------

void collect_vars(const TypeLit &l, bool positive,
                  std::vector<std::pair<TypeVar, bool>> &out) {
  if (l.as_base()) return;
  if (const auto *a = l.as_arrow()) {
    for (TypeVar p : a->params) out.emplace_back(p, !positive);
    collect_vars(a->ret, positive, out);
    return;
  }
  for (const auto &[f, t] : l.as_record()->fields) collect_vars(t, positive, out);
}

void collect_vars(const TypePtr &t, bool positive,
                  std::vector<std::pair<TypeVar, bool>> &out) {
  if (!t) return;
  if (const auto *v = t->as_var()) {
    out.emplace_back(*v, positive);
    return;
  }
  if (const auto *j = t->as_join()) {
    collect_vars(j->left, positive, out);
    collect_vars(j->right, positive, out);
    return;
  }
  collect_vars(*t->as_lit(), positive, out);
}

} // namespace flowlet
