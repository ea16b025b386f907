#pragma once

#include <set>
#include <vector>

#include "flowlet/ast.hpp"

namespace flowlet {

struct UnboundVariable {
  Ident ident;
  Span span;
};

struct RenameResult {
  std::vector<UnboundVariable> errors;
  uint32_t next_uid = 1;
};

// Gives every definition point (var statement or arrow parameter) a unique
// uid and rebinds uses. `var` declarations are function-scoped and hoisted;
// a redeclaration in the same scope rewrites to a plain assignment. Free
// variables are reported, their uses keep uid 0.
RenameResult alpha_rename(ast::Program &p, uint32_t first_uid = 1);

// All identifiers var-declared in s, recursing through if/seq but not into
// nested arrow bodies.
std::set<Ident> locals(const ast::Stmt &s);
std::set<Ident> locals(const std::vector<ast::StmtPtr> &stmts);

} // namespace flowlet
