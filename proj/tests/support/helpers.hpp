#pragma once

#include <string>
#include <vector>

#include "flowlet/ast.hpp"
#include "flowlet/check.hpp"
#include "flowlet/parse.hpp"
#include "flowlet/rename.hpp"

namespace flowlet::test {

inline ast::Program parse_ok(const std::string &src) {
  ParseResult r = parse(src, "<test>");
  if (!r.ok()) throw std::runtime_error("parse failed: " + r.error->message);
  return std::move(*r.program);
}

inline ast::Program parse_renamed(const std::string &src) {
  ast::Program p = parse_ok(src);
  alpha_rename(p);
  return p;
}

inline size_t count_nodes(const ast::Expr &e);

inline size_t count_nodes(const ast::Stmt &s) {
  size_t n = 1;
  if (s.expr) n += count_nodes(*s.expr);
  if (s.a) n += count_nodes(*s.a);
  if (s.b) n += count_nodes(*s.b);
  return n;
}

inline size_t count_nodes(const ast::Expr &e) {
  size_t n = 1;
  if (e.lhs) n += count_nodes(*e.lhs);
  if (e.rhs) n += count_nodes(*e.rhs);
  if (e.ret) n += count_nodes(*e.ret);
  if (e.body) n += count_nodes(*e.body);
  for (const auto &a : e.args) n += count_nodes(*a);
  for (const auto &f : e.fields) n += count_nodes(*f.init);
  return n;
}

inline size_t count_nodes(const ast::Program &p) {
  size_t n = 0;
  for (const auto &s : p.statements) n += count_nodes(*s);
  return n;
}

inline std::vector<std::string> error_codes(const std::vector<ErrorReport> &errors) {
  std::vector<std::string> out;
  for (const auto &e : errors) out.push_back(code_name(e.code));
  return out;
}

inline bool has_code(const std::vector<ErrorReport> &errors, ErrorCode c) {
  for (const auto &e : errors)
    if (e.code == c) return true;
  return false;
}

} // namespace flowlet::test
