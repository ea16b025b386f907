#include "flowlet/gen.hpp"

#include "flowlet/rename.hpp"

namespace flowlet {

using ast::Expr;
using ast::ExprKind;
using ast::Stmt;
using ast::StmtKind;

void GenContext::emit(TypeConstraint c) {
  log.push_back(c);
  graph.add(c);
}

void GenContext::emit(EffectConstraint c) {
  log.push_back(c);
  graph.add(c);
}

// ---- Environment operations ------------------------------------------------------

Env erase_env(const Env &env) {
  Env out;
  for (const auto &[uid, e] : env) out.extend(e.id, t_var(e.general), e.general);
  return out;
}

Env widen_env(GenContext &ctx, const Env &env) {
  Env out;
  for (const auto &[uid, e] : env) {
    TypeVar b = ctx.graph.fresh_type_var(ctx.graph.var_span(e.general.id));
    ctx.emit(TypeConstraint{e.specific, UseToVar{b}, ctx.graph.var_span(e.general.id), {}});
    ctx.emit(TypeConstraint{t_var(b), UseToVar{e.general}, {}, {}});
    out.extend(e.id, t_var(b), e.general);
  }
  return out;
}

Env refine_env(GenContext &ctx, const Env &env, const PredMapPtr &preds) {
  if (!ctx.graph.refinements()) return env;
  if (!preds) return env;
  switch (preds->tag) {
  case PredMap::Tag::Empty:
    return env;
  case PredMap::Tag::Single: {
    const EnvEntry *e = env.lookup(preds->id);
    if (!e) return env; // refining an unbound name is a no-op
    TypeVar b = ctx.graph.fresh_type_var(ctx.graph.var_span(e->general.id));
    Span site = ctx.graph.var_span(e->general.id);
    ctx.emit(TypeConstraint{e->specific, UsePred{preds->pred, b}, site, site});
    Env out = env;
    out.update(preds->id, t_var(b));
    return out;
  }
  case PredMap::Tag::And: {
    Env e1 = refine_env(ctx, env, preds->left);
    return refine_env(ctx, e1, preds->right);
  }
  case PredMap::Tag::Or: {
    Env e1 = refine_env(ctx, env, preds->left);
    Env e2 = refine_env(ctx, env, preds->right);
    return join_env(e1, e2);
  }
  case PredMap::Tag::Not:
    return refine_env(ctx, env, negate_predmap(preds->left));
  case PredMap::Tag::ExcludeEffect: {
    // Refine, widen, then havoc the refined entries back to their
    // pre-refinement types for whatever the effect reaches.
    Env refined = refine_env(ctx, env, preds->left);
    Env widened = widen_env(ctx, refined);
    std::vector<HavocEntry> entries;
    for (const auto &[uid, old_entry] : env) {
      const EnvEntry *w = widened.lookup(old_entry.id);
      const TypeVar *wv = w->specific->as_var();
      entries.push_back(HavocEntry{old_entry.id, *wv, old_entry.specific});
    }
    ctx.emit(EffectConstraint{preds->effect, UseHavoc{std::move(entries)}, {}, {}});
    return widened;
  }
  }
  return env;
}

// ---- Helpers -----------------------------------------------------------------------

namespace {

TypePtr const_type(const Expr &e) {
  switch (e.const_kind) {
  case ast::ConstKind::Num: return t_singleton(BaseKind::Num, e.lexeme);
  case ast::ConstKind::Str: return t_singleton(BaseKind::Str, e.lexeme);
  case ast::ConstKind::Bool: return t_singleton(BaseKind::Bool, e.lexeme);
  case ast::ConstKind::Null: return t_null();
  case ast::ConstKind::Undefined: return t_void();
  }
  return t_void();
}

// All declaration sites in a body, with spans, not crossing nested arrows.
void local_decl_sites(const Stmt &s, std::vector<std::pair<Ident, Span>> &out) {
  switch (s.kind) {
  case StmtKind::VarDecl: {
    for (const auto &[id, sp] : out)
      if (id.uid == s.ident.uid) return;
    out.emplace_back(s.ident, s.span);
    break;
  }
  case StmtKind::Seq:
  case StmtKind::If:
    local_decl_sites(*s.a, out);
    local_decl_sites(*s.b, out);
    break;
  default:
    break;
  }
}

ExprResult gen_assign_like(GenContext &ctx, const Env &env, const Ident &target,
                           const Expr &value, Span span);

} // namespace

// ---- Expressions ----------------------------------------------------------------------

ExprResult gen_expr(GenContext &ctx, const Env &env, const Expr &e) {
  ExprResult r;
  r.log_begin = ctx.log.size();
  switch (e.kind) {
  case ExprKind::Const: {
    r.type = const_type(e);
    r.effect = e_empty();
    r.preds = pm_empty();
    r.env = env;
    break;
  }
  case ExprKind::Var: {
    const EnvEntry *entry = env.lookup(e.ident);
    // Unbound names were reported during renaming; keep going, unconstrained.
    r.type = entry ? entry->specific : t_var(ctx.graph.fresh_type_var(e.span));
    r.effect = e_empty();
    r.preds = pm_single(e.ident, Predicate(BasePred::truthy()));
    r.env = env;
    break;
  }
  case ExprKind::Assign: {
    r = gen_assign_like(ctx, env, e.ident, *e.lhs, e.span);
    break;
  }
  case ExprKind::Arrow: {
    Env inner = erase_env(env);
    std::vector<TypeVar> param_vars;
    for (const auto &p : e.params) {
      TypeVar pv = ctx.graph.fresh_type_var(p.span);
      param_vars.push_back(pv);
      inner.extend(p.name, t_var(pv), pv);
      if (p.annot) {
        ctx.graph.note_param_annotation(pv, p.annot);
        ctx.emit(TypeConstraint{ctx.graph.materialize_annot(p.annot, p.annot->span),
                                UseToVar{pv}, p.annot->span, p.span});
        ctx.emit(TypeConstraint{t_var(pv), UseAnnot{p.annot}, p.span, p.annot->span});
      }
    }
    std::vector<std::pair<Ident, Span>> decls;
    local_decl_sites(*e.body, decls);
    for (const auto &[id, sp] : decls) {
      TypeVar lv = ctx.graph.fresh_type_var(sp);
      inner.extend(id, t_void(), lv);
    }
    StmtResult body = gen_stmt(ctx, inner, *e.body);
    ExprResult ret = gen_expr(ctx, body.env, *e.ret);
    EffectPtr body_eff = e_join(body.effect, ret.effect);
    // Parameters and locals are invisible outside; drop them from the effect.
    std::set<uint32_t> hidden;
    for (const auto &p : e.params) hidden.insert(p.name.uid);
    for (const auto &[id, sp] : decls) hidden.insert(id.uid);
    std::function<EffectPtr(const EffectPtr &)> strip =
        [&](const EffectPtr &eff) -> EffectPtr {
      if (!eff || eff->is_empty()) return e_empty();
      if (const auto *n = eff->as_name())
        return hidden.count(n->uid) ? e_empty() : eff;
      if (const auto *j = eff->as_join()) return e_join(strip(j->left), strip(j->right));
      return eff;
    };
    r.type = t_arrow(std::move(param_vars), strip(body_eff), ret.type);
    r.effect = e_empty();
    r.preds = pm_empty();
    r.env = env;
    break;
  }
  case ExprKind::Call: {
    ExprResult callee = gen_expr(ctx, env, *e.lhs);
    Env cur = callee.env;
    EffectPtr eff = callee.effect;
    std::vector<CallArg> args;
    for (const auto &a : e.args) {
      ExprResult ar = gen_expr(ctx, cur, *a);
      cur = ar.env;
      eff = e_join(eff, ar.effect);
      args.push_back(CallArg{ar.type, a->span});
    }
    TypeVar ret = ctx.graph.fresh_type_var(e.span);
    EffectVar callee_eff = ctx.graph.fresh_effect_var(e.span);
    Env widened = widen_env(ctx, cur);
    std::vector<HavocEntry> entries;
    for (const auto &[uid, we] : widened) {
      const EnvEntry *before = cur.lookup(we.id);
      entries.push_back(HavocEntry{we.id, *we.specific->as_var(), t_var(before->general)});
    }
    ctx.emit(EffectConstraint{e_var(callee_eff), UseHavoc{std::move(entries)}, e.span,
                              e.span});
    ctx.emit(TypeConstraint{callee.type, UseCall{std::move(args), callee_eff, ret},
                            e.lhs->span, e.span});
    r.type = t_var(ret);
    r.effect = e_join(eff, e_var(callee_eff));
    r.preds = pm_empty();
    r.env = widened;
    break;
  }
  case ExprKind::Record: {
    Env cur = env;
    EffectPtr eff = e_empty();
    std::map<std::string, TypePtr> fields;
    for (const auto &f : e.fields) {
      ExprResult fr = gen_expr(ctx, cur, *f.init);
      cur = fr.env;
      eff = e_join(eff, fr.effect);
      TypeVar fv = ctx.graph.fresh_type_var(f.init->span);
      ctx.emit(TypeConstraint{fr.type, UseToVar{fv}, f.init->span, f.init->span});
      fields.emplace(f.name, t_var(fv));
    }
    r.type = t_record(std::move(fields));
    r.effect = eff;
    r.preds = pm_empty();
    r.env = cur;
    break;
  }
  case ExprKind::FieldRead: {
    ExprResult obj = gen_expr(ctx, env, *e.lhs);
    TypeVar out = ctx.graph.fresh_type_var(e.span);
    ctx.emit(TypeConstraint{obj.type, UseGet{e.field, out}, e.lhs->span, e.span});
    r.type = t_var(out);
    r.effect = obj.effect;
    r.preds = pm_empty();
    r.env = obj.env;
    break;
  }
  case ExprKind::FieldWrite: {
    ExprResult obj = gen_expr(ctx, env, *e.lhs);
    ExprResult val = gen_expr(ctx, obj.env, *e.rhs);
    ctx.emit(TypeConstraint{obj.type, UseSet{e.field, val.type}, e.lhs->span, e.span});
    r.type = val.type;
    r.effect = e_join(obj.effect, val.effect);
    r.preds = pm_empty();
    r.env = val.env;
    break;
  }
  case ExprKind::PredTest: {
    r.type = t_bool();
    r.effect = e_empty();
    r.preds = pm_single(e.ident, Predicate(e.pred));
    r.env = env;
    break;
  }
  case ExprKind::And: {
    ExprResult a = gen_expr(ctx, env, *e.lhs);
    Env under = refine_env(ctx, a.env, a.preds);
    ExprResult b = gen_expr(ctx, under, *e.rhs);
    TypeVar filtered = ctx.graph.fresh_type_var(e.lhs->span);
    ctx.emit(TypeConstraint{a.type, UsePred{Predicate(BasePred::falsy()), filtered},
                            e.lhs->span, e.span});
    Env not_taken = refine_env(ctx, a.env, negate_predmap(a.preds));
    r.type = t_join(t_var(filtered), b.type);
    r.effect = e_join(a.effect, b.effect);
    r.preds = pm_and(pm_exclude(a.preds, b.effect), b.preds);
    r.env = join_env(not_taken, b.env);
    break;
  }
  case ExprKind::Or: {
    ExprResult a = gen_expr(ctx, env, *e.lhs);
    Env under = refine_env(ctx, a.env, negate_predmap(a.preds));
    ExprResult b = gen_expr(ctx, under, *e.rhs);
    TypeVar filtered = ctx.graph.fresh_type_var(e.lhs->span);
    ctx.emit(TypeConstraint{a.type, UsePred{Predicate(BasePred::truthy()), filtered},
                            e.lhs->span, e.span});
    Env taken = refine_env(ctx, a.env, a.preds);
    r.type = t_join(t_var(filtered), b.type);
    r.effect = e_join(a.effect, b.effect);
    r.preds = pm_or(pm_exclude(a.preds, b.effect), b.preds);
    r.env = join_env(taken, b.env);
    break;
  }
  case ExprKind::Not: {
    ExprResult a = gen_expr(ctx, env, *e.lhs);
    r.type = t_bool();
    r.effect = a.effect;
    r.preds = pm_not(a.preds);
    r.env = a.env;
    break;
  }
  case ExprKind::BinOp: {
    ExprResult a = gen_expr(ctx, env, *e.lhs);
    ExprResult b = gen_expr(ctx, a.env, *e.rhs);
    TypeVar out = ctx.graph.fresh_type_var(e.span);
    ctx.emit(TypeConstraint{a.type, UseArith{b.type, e.rhs->span, out}, e.lhs->span,
                            e.span});
    r.type = t_var(out);
    r.effect = e_join(a.effect, b.effect);
    r.preds = pm_empty();
    r.env = b.env;
    break;
  }
  case ExprKind::Require: {
    TypeVar v{0};
    bool bound = false;
    if (ctx.import_binder) {
      if (auto iv = ctx.import_binder(e.lexeme, e.span)) {
        v = *iv;
        bound = true;
      }
    }
    r.type = bound ? t_var(v) : t_var(ctx.graph.fresh_type_var(e.span));
    r.effect = e_empty();
    r.preds = pm_empty();
    r.env = env;
    break;
  }
  }
  r.log_end = ctx.log.size();
  return r;
}

namespace {

ExprResult gen_assign_like(GenContext &ctx, const Env &env, const Ident &target,
                           const Expr &value, Span span) {
  ExprResult v = gen_expr(ctx, env, value);
  ExprResult r;
  r.log_begin = v.log_begin;
  const EnvEntry *entry = v.env.lookup(target);
  if (entry) {
    ctx.emit(TypeConstraint{v.type, UseToVar{entry->general}, value.span, span});
    r.env = v.env;
    r.env.update(target, v.type);
  } else {
    r.env = v.env; // unbound target was already reported
  }
  r.type = v.type;
  r.effect = e_join(v.effect, e_name(target));
  r.preds = pm_exclude(v.preds, e_name(target));
  r.log_end = ctx.log.size();
  return r;
}

} // namespace

// ---- Statements --------------------------------------------------------------------------

StmtResult gen_stmt(GenContext &ctx, const Env &env, const Stmt &s) {
  StmtResult r;
  r.log_begin = ctx.log.size();
  switch (s.kind) {
  case StmtKind::Expr: {
    ExprResult e = gen_expr(ctx, env, *s.expr);
    r.effect = e.effect;
    r.env = e.env;
    break;
  }
  case StmtKind::VarDecl: {
    // Hoisting put the name in scope already; the declaration assigns.
    if (s.annot) {
      const EnvEntry *entry = env.lookup(s.ident);
      if (entry) {
        ctx.emit(TypeConstraint{ctx.graph.materialize_annot(s.annot, s.annot->span),
                                UseToVar{entry->general}, s.annot->span, s.span});
        ctx.emit(TypeConstraint{t_var(entry->general), UseAnnot{s.annot}, s.span,
                                s.annot->span});
        ctx.graph.note_param_annotation(entry->general, s.annot);
      }
    }
    ExprResult e = gen_assign_like(ctx, env, s.ident, *s.expr, s.span);
    r.effect = e.effect;
    r.env = e.env;
    break;
  }
  case StmtKind::If: {
    ExprResult cond = gen_expr(ctx, env, *s.expr);
    Env then_env = refine_env(ctx, cond.env, cond.preds);
    StmtResult then_r = gen_stmt(ctx, then_env, *s.a);
    Env else_env = refine_env(ctx, cond.env, negate_predmap(cond.preds));
    StmtResult else_r = gen_stmt(ctx, else_env, *s.b);
    r.effect = e_join(cond.effect, e_join(then_r.effect, else_r.effect));
    r.env = join_env(then_r.env, else_r.env);
    break;
  }
  case StmtKind::Seq: {
    StmtResult a = gen_stmt(ctx, env, *s.a);
    StmtResult b = gen_stmt(ctx, a.env, *s.b);
    r.effect = e_join(a.effect, b.effect);
    r.env = b.env;
    break;
  }
  case StmtKind::Skip: {
    r.effect = e_empty();
    r.env = env;
    break;
  }
  case StmtKind::Return: {
    // Normalized away by the parser; treat like an expression statement.
    ExprResult e = gen_expr(ctx, env, *s.expr);
    r.effect = e.effect;
    r.env = e.env;
    break;
  }
  case StmtKind::Export: {
    ExprResult e = gen_expr(ctx, env, *s.expr);
    if (!ctx.export_info)
      ctx.export_info = GenContext::ExportInfo{e.type, s.span};
    r.effect = e.effect;
    r.env = e.env;
    break;
  }
  }
  r.log_end = ctx.log.size();
  return r;
}

StmtResult gen_program(GenContext &ctx, const ast::Program &p) {
  Env env;
  std::vector<std::pair<Ident, Span>> decls;
  for (const auto &s : p.statements) local_decl_sites(*s, decls);
  for (const auto &[id, sp] : decls) {
    TypeVar v = ctx.graph.fresh_type_var(sp);
    env.extend(id, t_void(), v);
  }
  StmtResult r;
  r.effect = e_empty();
  r.env = env;
  for (const auto &s : p.statements) {
    StmtResult sr = gen_stmt(ctx, r.env, *s);
    r.effect = e_join(r.effect, sr.effect);
    r.env = sr.env;
  }
  r.log_end = ctx.log.size();
  return r;
}

} // namespace flowlet
