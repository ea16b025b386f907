#include "flowlet/rename.hpp"

#include <map>
#include <vector>

namespace flowlet {

using namespace ast;

namespace {

// One scope per arrow body (and one for the top level). `var` is
// function-scoped: declarations anywhere in the body are visible throughout.
struct Renamer {
  uint32_t next_uid;
  std::vector<std::map<std::string, uint32_t>> scopes;
  std::vector<UnboundVariable> errors;

  explicit Renamer(uint32_t first) : next_uid(first) {}

  uint32_t lookup(const std::string &name) {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    return 0;
  }

  void collect_decls(Stmt &s, std::map<std::string, uint32_t> &scope) {
    switch (s.kind) {
    case StmtKind::VarDecl:
      if (!scope.count(s.ident.text)) scope.emplace(s.ident.text, next_uid++);
      break;
    case StmtKind::Seq:
      collect_decls(*s.a, scope);
      collect_decls(*s.b, scope);
      break;
    case StmtKind::If:
      collect_decls(*s.a, scope);
      collect_decls(*s.b, scope);
      break;
    default:
      break;
    }
  }

  void use(Ident &id, Span sp) {
    uint32_t uid = lookup(id.text);
    if (!uid) {
      errors.push_back(UnboundVariable{id, sp});
      return;
    }
    id.uid = uid;
  }

  void rename_expr(Expr &e) {
    switch (e.kind) {
    case ExprKind::Var:
    case ExprKind::PredTest:
      use(e.ident, e.span);
      break;
    case ExprKind::Assign:
      use(e.ident, e.span);
      rename_expr(*e.lhs);
      break;
    case ExprKind::Arrow: {
      scopes.emplace_back();
      auto &scope = scopes.back();
      for (auto &p : e.params) {
        // Later duplicates shadow earlier ones, as in JS.
        p.name.uid = next_uid++;
        scope[p.name.text] = p.name.uid;
      }
      collect_decls(*e.body, scope);
      rename_stmt(*e.body);
      rename_expr(*e.ret);
      scopes.pop_back();
      break;
    }
    case ExprKind::Call:
      rename_expr(*e.lhs);
      for (auto &a : e.args) rename_expr(*a);
      break;
    case ExprKind::Record:
      for (auto &f : e.fields) rename_expr(*f.init);
      break;
    case ExprKind::FieldRead:
      rename_expr(*e.lhs);
      break;
    case ExprKind::FieldWrite:
      rename_expr(*e.lhs);
      rename_expr(*e.rhs);
      break;
    case ExprKind::And:
    case ExprKind::Or:
    case ExprKind::BinOp:
      rename_expr(*e.lhs);
      rename_expr(*e.rhs);
      break;
    case ExprKind::Not:
      rename_expr(*e.lhs);
      break;
    case ExprKind::Const:
    case ExprKind::Require:
      break;
    }
  }

  void rename_stmt(Stmt &s) {
    switch (s.kind) {
    case StmtKind::Expr:
    case StmtKind::Return:
    case StmtKind::Export:
      rename_expr(*s.expr);
      break;
    case StmtKind::VarDecl: {
      uint32_t uid = lookup(s.ident.text);
      // The scope pass assigned the uid; a redeclaration resolves to the
      // first declaration's uid and acts as a plain assignment.
      s.ident.uid = uid;
      rename_expr(*s.expr);
      break;
    }
    case StmtKind::If:
      rename_expr(*s.expr);
      rename_stmt(*s.a);
      rename_stmt(*s.b);
      break;
    case StmtKind::Seq:
      rename_stmt(*s.a);
      rename_stmt(*s.b);
      break;
    case StmtKind::Skip:
      break;
    }
  }
};

void locals_of(const Stmt &s, std::set<Ident> &out) {
  switch (s.kind) {
  case StmtKind::VarDecl:
    out.insert(s.ident);
    break;
  case StmtKind::Seq:
  case StmtKind::If:
    locals_of(*s.a, out);
    locals_of(*s.b, out);
    break;
  default:
    break;
  }
}

} // namespace

RenameResult alpha_rename(Program &p, uint32_t first_uid) {
  Renamer r(first_uid);
  r.scopes.emplace_back();
  auto &top = r.scopes.back();
  for (auto &s : p.statements) r.collect_decls(*s, top);
  for (auto &s : p.statements) r.rename_stmt(*s);
  RenameResult out;
  out.errors = std::move(r.errors);
  out.next_uid = r.next_uid;
  return out;
}

std::set<Ident> locals(const Stmt &s) {
  std::set<Ident> out;
  locals_of(s, out);
  return out;
}

std::set<Ident> locals(const std::vector<StmtPtr> &stmts) {
  std::set<Ident> out;
  for (const auto &s : stmts) locals_of(*s, out);
  return out;
}

} // namespace flowlet
