#include "flowlet/ast.hpp"

#include <sstream>

#include "json.hpp"

namespace flowlet::ast {

ExprPtr make_expr(ExprKind k, Span sp) {
  auto e = std::make_unique<Expr>();
  e->kind = k;
  e->span = sp;
  return e;
}

StmtPtr make_stmt(StmtKind k, Span sp) {
  auto s = std::make_unique<Stmt>();
  s->kind = k;
  s->span = sp;
  return s;
}

// ---- Clone ---------------------------------------------------------------------

ExprPtr clone_expr(const Expr &e) {
  auto out = make_expr(e.kind, e.span);
  out->ident = e.ident;
  out->const_kind = e.const_kind;
  out->lexeme = e.lexeme;
  out->num_value = e.num_value;
  out->field = e.field;
  out->pred = e.pred;
  out->op = e.op;
  for (const auto &p : e.params) out->params.push_back(p);
  if (e.body) out->body = clone_stmt(*e.body);
  if (e.ret) out->ret = clone_expr(*e.ret);
  if (e.lhs) out->lhs = clone_expr(*e.lhs);
  if (e.rhs) out->rhs = clone_expr(*e.rhs);
  for (const auto &a : e.args) out->args.push_back(clone_expr(*a));
  for (const auto &f : e.fields)
    out->fields.push_back(RecordField{f.name, clone_expr(*f.init)});
  return out;
}

StmtPtr clone_stmt(const Stmt &s) {
  auto out = make_stmt(s.kind, s.span);
  out->ident = s.ident;
  out->annot = s.annot;
  if (s.expr) out->expr = clone_expr(*s.expr);
  if (s.a) out->a = clone_stmt(*s.a);
  if (s.b) out->b = clone_stmt(*s.b);
  return out;
}

Program clone_program(const Program &p) {
  Program out;
  out.source_file = p.source_file;
  for (const auto &s : p.statements) out.statements.push_back(clone_stmt(*s));
  return out;
}

// ---- Equality --------------------------------------------------------------------

namespace {

bool expr_eq(const Expr &a, const Expr &b, bool idents);
bool stmt_eq(const Stmt &a, const Stmt &b, bool idents);

bool ident_eq(const Ident &a, const Ident &b, bool idents) {
  return !idents || (a.text == b.text && a.uid == b.uid);
}

bool expr_eq(const Expr &a, const Expr &b, bool idents) {
  if (a.kind != b.kind) return false;
  if (!ident_eq(a.ident, b.ident, idents)) return false;
  if (a.const_kind != b.const_kind || a.lexeme != b.lexeme) return false;
  if (a.field != b.field || a.op != b.op) return false;
  if (!(a.pred == b.pred)) return false;
  if (a.params.size() != b.params.size()) return false;
  for (size_t i = 0; i < a.params.size(); i++) {
    if (!ident_eq(a.params[i].name, b.params[i].name, idents)) return false;
    if (!annot_equal(a.params[i].annot, b.params[i].annot)) return false;
  }
  auto both = [&](const ExprPtr &x, const ExprPtr &y) {
    if (!x != !y) return false;
    return !x || expr_eq(*x, *y, idents);
  };
  if (!both(a.lhs, b.lhs) || !both(a.rhs, b.rhs) || !both(a.ret, b.ret)) return false;
  if (!a.body != !b.body) return false;
  if (a.body && !stmt_eq(*a.body, *b.body, idents)) return false;
  if (a.args.size() != b.args.size()) return false;
  for (size_t i = 0; i < a.args.size(); i++)
    if (!expr_eq(*a.args[i], *b.args[i], idents)) return false;
  if (a.fields.size() != b.fields.size()) return false;
  for (size_t i = 0; i < a.fields.size(); i++) {
    if (a.fields[i].name != b.fields[i].name) return false;
    if (!expr_eq(*a.fields[i].init, *b.fields[i].init, idents)) return false;
  }
  return true;
}

bool stmt_eq(const Stmt &a, const Stmt &b, bool idents) {
  if (a.kind != b.kind) return false;
  if (!ident_eq(a.ident, b.ident, idents)) return false;
  if (!annot_equal(a.annot, b.annot)) return false;
  auto bs = [&](const StmtPtr &x, const StmtPtr &y) {
    if (!x != !y) return false;
    return !x || stmt_eq(*x, *y, idents);
  };
  if (!a.expr != !b.expr) return false;
  if (a.expr && !expr_eq(*a.expr, *b.expr, idents)) return false;
  return bs(a.a, b.a) && bs(a.b, b.b);
}

bool program_eq(const Program &a, const Program &b, bool idents) {
  if (a.statements.size() != b.statements.size()) return false;
  for (size_t i = 0; i < a.statements.size(); i++)
    if (!stmt_eq(*a.statements[i], *b.statements[i], idents)) return false;
  return true;
}

} // namespace

bool equal(const Program &a, const Program &b) { return program_eq(a, b, true); }
bool equal_modulo_idents(const Program &a, const Program &b) {
  return program_eq(a, b, false);
}

// ---- Printing ---------------------------------------------------------------------

namespace {

// assign < or < and < pred < add < unary < postfix
enum Prec { PAssign = 1, POr, PAnd, PPred, PAdd, PUnary, PPostfix, PPrimary };

std::string quote(const std::string &s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
    case '"': out += "\\\""; break;
    case '\\': out += "\\\\"; break;
    case '\n': out += "\\n"; break;
    case '\t': out += "\\t"; break;
    default: out += c;
    }
  }
  return out + "\"";
}

void print_stmt(std::ostream &os, const Stmt &s, int indent);
void print_expr_prec(std::ostream &os, const Expr &e, int min_prec, int indent);

void print_block(std::ostream &os, const Stmt *body, const Expr *ret, int indent) {
  os << "{\n";
  std::string pad(static_cast<size_t>(indent + 2), ' ');
  if (body && body->kind != StmtKind::Skip) print_stmt(os, *body, indent + 2);
  if (ret) {
    os << pad << "return ";
    print_expr_prec(os, *ret, PAssign, indent + 2);
    os << ";\n";
  }
  os << std::string(static_cast<size_t>(indent), ' ') << "}";
}

std::string pred_test_str(const Expr &e, bool negated, int indent) {
  std::ostringstream os;
  const BasePred &p = e.pred;
  const std::string x = e.ident.text;
  switch (p.tag) {
  case BasePred::Tag::Nullish:
    os << x << (negated ? " != " : " == ") << "null";
    break;
  case BasePred::Tag::TypeofIs:
    os << "typeof " << x << (negated ? " !== " : " === ") << '"'
       << typeof_kind_str(p.typeof_kind) << '"';
    break;
  case BasePred::Tag::FieldEq:
    os << x << "." << p.field << (negated ? " !== " : " === ") << quote(p.value);
    break;
  case BasePred::Tag::Truthy:
    os << (negated ? "!" : "") << x;
    break;
  case BasePred::Tag::Falsy:
    os << (negated ? "" : "!") << x;
    break;
  }
  (void)indent;
  return os.str();
}

void print_expr_prec(std::ostream &os, const Expr &e, int min_prec, int indent) {
  auto paren = [&](int prec, auto emit) {
    if (prec < min_prec) {
      os << "(";
      emit();
      os << ")";
    } else {
      emit();
    }
  };
  switch (e.kind) {
  case ExprKind::Var:
    os << e.ident.text;
    break;
  case ExprKind::Const:
    switch (e.const_kind) {
    case ConstKind::Num: os << e.lexeme; break;
    case ConstKind::Str: os << quote(e.lexeme); break;
    case ConstKind::Bool: os << e.lexeme; break;
    case ConstKind::Null: os << "null"; break;
    case ConstKind::Undefined: os << "undefined"; break;
    }
    break;
  case ExprKind::Assign:
    paren(PAssign, [&] {
      os << e.ident.text << " = ";
      print_expr_prec(os, *e.lhs, PAssign, indent);
    });
    break;
  case ExprKind::Arrow:
    paren(PAssign, [&] {
      os << "(";
      for (size_t i = 0; i < e.params.size(); i++) {
        if (i) os << ", ";
        os << e.params[i].name.text;
        if (e.params[i].annot) os << ": " << annot_str(e.params[i].annot);
      }
      os << ") => ";
      print_block(os, e.body.get(), e.ret.get(), indent);
    });
    break;
  case ExprKind::Call:
    paren(PPostfix, [&] {
      print_expr_prec(os, *e.lhs, PPostfix, indent);
      os << "(";
      for (size_t i = 0; i < e.args.size(); i++) {
        if (i) os << ", ";
        print_expr_prec(os, *e.args[i], PAssign, indent);
      }
      os << ")";
    });
    break;
  case ExprKind::Record:
    os << "{";
    for (size_t i = 0; i < e.fields.size(); i++) {
      if (i) os << ", ";
      os << e.fields[i].name << ": ";
      print_expr_prec(os, *e.fields[i].init, PAssign, indent);
    }
    os << "}";
    break;
  case ExprKind::FieldRead:
    paren(PPostfix, [&] {
      print_expr_prec(os, *e.lhs, PPostfix, indent);
      os << "." << e.field;
    });
    break;
  case ExprKind::FieldWrite:
    paren(PAssign, [&] {
      print_expr_prec(os, *e.lhs, PPostfix, indent);
      os << "." << e.field << " = ";
      print_expr_prec(os, *e.rhs, PAssign, indent);
    });
    break;
  case ExprKind::PredTest:
    paren(PPred, [&] { os << pred_test_str(e, false, indent); });
    break;
  case ExprKind::And:
    paren(PAnd, [&] {
      print_expr_prec(os, *e.lhs, PAnd, indent);
      os << " && ";
      print_expr_prec(os, *e.rhs, PPred, indent);
    });
    break;
  case ExprKind::Or:
    paren(POr, [&] {
      print_expr_prec(os, *e.lhs, POr, indent);
      os << " || ";
      print_expr_prec(os, *e.rhs, PAnd, indent);
    });
    break;
  case ExprKind::Not:
    // Negated runtime tests print in operator form.
    if (e.lhs->kind == ExprKind::PredTest &&
        e.lhs->pred.tag != BasePred::Tag::Truthy &&
        e.lhs->pred.tag != BasePred::Tag::Falsy) {
      paren(PPred, [&] { os << pred_test_str(*e.lhs, true, indent); });
    } else {
      paren(PUnary, [&] {
        os << "!";
        print_expr_prec(os, *e.lhs, PUnary, indent);
      });
    }
    break;
  case ExprKind::BinOp:
    paren(PAdd, [&] {
      print_expr_prec(os, *e.lhs, PAdd, indent);
      os << " " << e.op << " ";
      print_expr_prec(os, *e.rhs, PUnary, indent);
    });
    break;
  case ExprKind::Require:
    os << "require(" << quote(e.lexeme) << ")";
    break;
  }
}

void print_stmt(std::ostream &os, const Stmt &s, int indent) {
  std::string pad(static_cast<size_t>(indent), ' ');
  switch (s.kind) {
  case StmtKind::Expr:
    os << pad;
    print_expr_prec(os, *s.expr, PAssign, indent);
    os << ";\n";
    break;
  case StmtKind::VarDecl:
    os << pad << "var " << s.ident.text;
    if (s.annot) os << ": " << annot_str(s.annot);
    os << " = ";
    print_expr_prec(os, *s.expr, PAssign, indent);
    os << ";\n";
    break;
  case StmtKind::If:
    os << pad << "if (";
    print_expr_prec(os, *s.expr, PAssign, indent);
    os << ") ";
    print_block(os, s.a.get(), nullptr, indent);
    if (s.b && s.b->kind != StmtKind::Skip) {
      os << " else ";
      print_block(os, s.b.get(), nullptr, indent);
    }
    os << "\n";
    break;
  case StmtKind::Seq:
    print_stmt(os, *s.a, indent);
    print_stmt(os, *s.b, indent);
    break;
  case StmtKind::Skip:
    break;
  case StmtKind::Return:
    os << pad << "return ";
    print_expr_prec(os, *s.expr, PAssign, indent);
    os << ";\n";
    break;
  case StmtKind::Export:
    os << pad << "module.exports = ";
    print_expr_prec(os, *s.expr, PAssign, indent);
    os << ";\n";
    break;
  }
}

} // namespace

std::string print(const Program &p) {
  std::ostringstream os;
  for (const auto &s : p.statements) print_stmt(os, *s, 0);
  return os.str();
}

std::string print_expr(const Expr &e) {
  std::ostringstream os;
  print_expr_prec(os, e, PAssign, 0);
  return os.str();
}

// ---- JSON dump -----------------------------------------------------------------------

namespace {

using njson = nlohmann::ordered_json;

njson span_json(const Span &sp) {
  return {{"line", sp.line}, {"col", sp.col}, {"start", sp.pos}, {"end", sp.end}};
}

njson expr_json(const Expr &e);

njson stmt_json(const Stmt &s) {
  njson j;
  j["span"] = span_json(s.span);
  switch (s.kind) {
  case StmtKind::Expr:
    j["kind"] = "expr";
    j["children"] = {expr_json(*s.expr)};
    break;
  case StmtKind::VarDecl:
    j["kind"] = "var";
    j["name"] = s.ident.text;
    if (s.ident.uid) j["uid"] = s.ident.uid;
    if (s.annot) j["annot"] = annot_str(s.annot);
    j["children"] = {expr_json(*s.expr)};
    break;
  case StmtKind::If:
    j["kind"] = "if";
    j["children"] = {expr_json(*s.expr), stmt_json(*s.a), stmt_json(*s.b)};
    break;
  case StmtKind::Seq:
    j["kind"] = "seq";
    j["children"] = {stmt_json(*s.a), stmt_json(*s.b)};
    break;
  case StmtKind::Skip:
    j["kind"] = "skip";
    j["children"] = njson::array();
    break;
  case StmtKind::Return:
    j["kind"] = "return";
    j["children"] = {expr_json(*s.expr)};
    break;
  case StmtKind::Export:
    j["kind"] = "export";
    j["children"] = {expr_json(*s.expr)};
    break;
  }
  return j;
}

njson expr_json(const Expr &e) {
  njson j;
  j["span"] = span_json(e.span);
  auto kids = njson::array();
  switch (e.kind) {
  case ExprKind::Var:
    j["kind"] = "var";
    j["name"] = e.ident.text;
    if (e.ident.uid) j["uid"] = e.ident.uid;
    break;
  case ExprKind::Const: {
    j["kind"] = "const";
    const char *ck = "undefined";
    switch (e.const_kind) {
    case ConstKind::Num: ck = "number"; break;
    case ConstKind::Str: ck = "string"; break;
    case ConstKind::Bool: ck = "boolean"; break;
    case ConstKind::Null: ck = "null"; break;
    case ConstKind::Undefined: ck = "undefined"; break;
    }
    j["const"] = ck;
    j["lexeme"] = e.lexeme;
    break;
  }
  case ExprKind::Assign:
    j["kind"] = "assign";
    j["name"] = e.ident.text;
    if (e.ident.uid) j["uid"] = e.ident.uid;
    kids.push_back(expr_json(*e.lhs));
    break;
  case ExprKind::Arrow: {
    j["kind"] = "arrow";
    auto ps = njson::array();
    for (const auto &p : e.params) {
      njson pj;
      pj["name"] = p.name.text;
      if (p.name.uid) pj["uid"] = p.name.uid;
      if (p.annot) pj["annot"] = annot_str(p.annot);
      ps.push_back(pj);
    }
    j["params"] = ps;
    kids.push_back(stmt_json(*e.body));
    kids.push_back(expr_json(*e.ret));
    break;
  }
  case ExprKind::Call:
    j["kind"] = "call";
    kids.push_back(expr_json(*e.lhs));
    for (const auto &a : e.args) kids.push_back(expr_json(*a));
    break;
  case ExprKind::Record: {
    j["kind"] = "record";
    auto fs = njson::array();
    for (const auto &f : e.fields) fs.push_back(f.name);
    j["fields"] = fs;
    for (const auto &f : e.fields) kids.push_back(expr_json(*f.init));
    break;
  }
  case ExprKind::FieldRead:
    j["kind"] = "get";
    j["field"] = e.field;
    kids.push_back(expr_json(*e.lhs));
    break;
  case ExprKind::FieldWrite:
    j["kind"] = "set";
    j["field"] = e.field;
    kids.push_back(expr_json(*e.lhs));
    kids.push_back(expr_json(*e.rhs));
    break;
  case ExprKind::PredTest:
    j["kind"] = "pred";
    j["name"] = e.ident.text;
    if (e.ident.uid) j["uid"] = e.ident.uid;
    j["pred"] = base_pred_str(e.pred);
    break;
  case ExprKind::And:
    j["kind"] = "and";
    kids.push_back(expr_json(*e.lhs));
    kids.push_back(expr_json(*e.rhs));
    break;
  case ExprKind::Or:
    j["kind"] = "or";
    kids.push_back(expr_json(*e.lhs));
    kids.push_back(expr_json(*e.rhs));
    break;
  case ExprKind::Not:
    j["kind"] = "not";
    kids.push_back(expr_json(*e.lhs));
    break;
  case ExprKind::BinOp:
    j["kind"] = "binop";
    j["op"] = std::string(1, e.op);
    kids.push_back(expr_json(*e.lhs));
    kids.push_back(expr_json(*e.rhs));
    break;
  case ExprKind::Require:
    j["kind"] = "require";
    j["ref"] = e.lexeme;
    break;
  }
  j["children"] = kids;
  return j;
}

} // namespace

std::string dump_json(const Program &p, bool pretty) {
  njson j;
  j["kind"] = "program";
  j["file"] = p.source_file;
  auto kids = njson::array();
  for (const auto &s : p.statements) kids.push_back(stmt_json(*s));
  j["children"] = kids;
  return pretty ? j.dump(2) : j.dump();
}

} // namespace flowlet::ast
