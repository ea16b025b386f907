#pragma once

#include <functional>
#include <optional>

#include "flowlet/ast.hpp"
#include "flowlet/env.hpp"
#include "flowlet/graph.hpp"
#include "flowlet/predmap.hpp"

namespace flowlet {

// Drives flow-sensitive constraint generation for one file. Constraints are
// inserted into the graph as they are produced (the graph stays closed); the
// log keeps the generated set for dumps and the naive-closure oracle.
struct GenContext {
  ConstraintGraph &graph;
  ConstraintSet log;

  // Maps a require() reference to the file's import variable; absent binder
  // or nullopt return leaves the import unconstrained.
  std::function<std::optional<TypeVar>(const std::string &ref, Span)> import_binder;

  struct ExportInfo {
    TypePtr type;
    Span span;
  };
  std::optional<ExportInfo> export_info;

  explicit GenContext(ConstraintGraph &g) : graph(g) {}

  void emit(TypeConstraint c);
  void emit(EffectConstraint c);
};

struct ExprResult {
  TypePtr type;
  EffectPtr effect;
  PredMapPtr preds;
  Env env;
  size_t log_begin = 0, log_end = 0; // generated-constraint window
};

struct StmtResult {
  EffectPtr effect;
  Env env;
  size_t log_begin = 0, log_end = 0;
};

ExprResult gen_expr(GenContext &ctx, const Env &env, const ast::Expr &e);
StmtResult gen_stmt(GenContext &ctx, const Env &env, const ast::Stmt &s);

// Refinement application. Not-nodes are pushed inward first; refining an
// unbound name is a no-op.
Env refine_env(GenContext &ctx, const Env &env, const PredMapPtr &preds);

// <t; a> becomes <b; a> with t <= b <= a, b fresh.
Env widen_env(GenContext &ctx, const Env &env);

// <t; a> becomes <a; a>; emits nothing.
Env erase_env(const Env &env);

// Whole program as an arrow-less body: top-level declarations are hoisted and
// bound to undefined before the statements run.
StmtResult gen_program(GenContext &ctx, const ast::Program &p);

} // namespace flowlet
