#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flowlet/annot.hpp"
#include "flowlet/pred.hpp"
#include "flowlet/span.hpp"

namespace flowlet::ast {

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;

enum class ConstKind { Num, Str, Bool, Null, Undefined };

struct Param {
  Ident name;
  AnnotPtr annot; // may be null
  Span span;
};

enum class ExprKind {
  Var,
  Const,
  Assign,
  Arrow,
  Call,
  Record,
  FieldRead,
  FieldWrite,
  PredTest,
  And,
  Or,
  Not,
  BinOp,
  Require,
};

struct RecordField {
  std::string name;
  ExprPtr init;
};

struct Expr {
  ExprKind kind;
  Span span;

  Ident ident;                        // Var, Assign(target), PredTest(subject)
  ConstKind const_kind = ConstKind::Undefined; // Const
  std::string lexeme;                 // Const literal text, Require ref
  double num_value = 0;               // Const num

  std::vector<Param> params;          // Arrow
  StmtPtr body;                       // Arrow
  ExprPtr ret;                        // Arrow return expression

  ExprPtr lhs;                        // Assign value, Call callee, unary/binary lhs
  ExprPtr rhs;                        // binary rhs, FieldWrite value
  std::vector<ExprPtr> args;          // Call
  std::vector<RecordField> fields;    // Record
  std::string field;                  // FieldRead/FieldWrite
  BasePred pred = BasePred::truthy(); // PredTest
  char op = 0;                        // BinOp ('+')
};

enum class StmtKind { Expr, VarDecl, If, Seq, Skip, Return, Export };

struct Stmt {
  StmtKind kind;
  Span span;

  ExprPtr expr;   // Expr, VarDecl init, If cond, Return, Export
  Ident ident;    // VarDecl
  AnnotPtr annot; // VarDecl annotation, may be null
  StmtPtr a;      // If then, Seq first
  StmtPtr b;      // If else, Seq second
};

struct Program {
  std::string source_file;
  std::vector<StmtPtr> statements;
};

ExprPtr make_expr(ExprKind k, Span sp);
StmtPtr make_stmt(StmtKind k, Span sp);

StmtPtr clone_stmt(const Stmt &s);
ExprPtr clone_expr(const Expr &e);
Program clone_program(const Program &p);

// Structural equality. Identifier uids participate; spans do not.
bool equal(const Program &a, const Program &b);
bool equal_modulo_idents(const Program &a, const Program &b);

// Canonical source form; parsing it back yields an equal program.
std::string print(const Program &p);
std::string print_expr(const Expr &e);

// Canonical JSON dump: {kind, span, children...}.
std::string dump_json(const Program &p, bool pretty = false);

} // namespace flowlet::ast
