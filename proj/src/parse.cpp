#include "flowlet/parse.hpp"

#include <charconv>
#include <cstdlib>
#include <map>

namespace flowlet {

namespace {

using namespace ast;

enum class Tok {
  End, Ident, Num, Str,
  LParen, RParen, LBrace, RBrace, Comma, Semi, Colon, Dot, Question, Pipe,
  Arrow, Assign, EqEq, EqEqEq, NotEq, NotEqEq, Plus, Bang, AndAnd, OrOr,
  KwVar, KwIf, KwElse, KwReturn, KwFunction, KwTypeof, KwType, KwTrue,
  KwFalse, KwNull, KwUndefined,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double num = 0;
  Span span;
};

struct ParseFail {
  Span span;
  std::string message;
};

struct Lexer {
  const std::string &src;
  uint32_t file;
  size_t pos = 0;
  uint32_t line = 1, col = 1;

  Lexer(const std::string &s, uint32_t f) : src(s), file(f) {}

  char peek(size_t off = 0) const {
    return pos + off < src.size() ? src[pos + off] : '\0';
  }
  void advance() {
    if (pos < src.size()) {
      if (src[pos] == '\n') {
        line++;
        col = 1;
      } else {
        col++;
      }
      pos++;
    }
  }

  void skip_trivia() {
    for (;;) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (peek() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        advance();
        advance();
        while (peek() && !(peek() == '*' && peek(1) == '/')) advance();
        if (peek()) { advance(); advance(); }
      } else {
        break;
      }
    }
  }

  static bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
           c == '$' || c == '%';
  }
  static bool ident_cont(char c) {
    return ident_start(c) || (c >= '0' && c <= '9');
  }

  Token next() {
    skip_trivia();
    Token t;
    t.span = {file, line, col, static_cast<uint32_t>(pos), static_cast<uint32_t>(pos)};
    char c = peek();
    if (!c) {
      t.kind = Tok::End;
      return t;
    }
    auto fin = [&](Tok k) {
      t.kind = k;
      t.span.end = static_cast<uint32_t>(pos);
      return t;
    };
    if (ident_start(c)) {
      std::string s;
      while (ident_cont(peek())) {
        s += peek();
        advance();
      }
      t.text = s;
      if (s == "var") return fin(Tok::KwVar);
      if (s == "if") return fin(Tok::KwIf);
      if (s == "else") return fin(Tok::KwElse);
      if (s == "return") return fin(Tok::KwReturn);
      if (s == "function") return fin(Tok::KwFunction);
      if (s == "typeof") return fin(Tok::KwTypeof);
      if (s == "type") return fin(Tok::KwType);
      if (s == "true") return fin(Tok::KwTrue);
      if (s == "false") return fin(Tok::KwFalse);
      if (s == "null") return fin(Tok::KwNull);
      if (s == "undefined") return fin(Tok::KwUndefined);
      return fin(Tok::Ident);
    }
    if (c >= '0' && c <= '9') {
      std::string s;
      while ((peek() >= '0' && peek() <= '9')) {
        s += peek();
        advance();
      }
      if (peek() == '.' && peek(1) >= '0' && peek(1) <= '9') {
        s += '.';
        advance();
        while (peek() >= '0' && peek() <= '9') {
          s += peek();
          advance();
        }
      }
      t.num = std::strtod(s.c_str(), nullptr);
      t.text = s;
      return fin(Tok::Num);
    }
    if (c == '"' || c == '\'') {
      char q = c;
      advance();
      std::string s;
      while (peek() && peek() != q) {
        char ch = peek();
        if (ch == '\\') {
          advance();
          char esc = peek();
          switch (esc) {
          case 'n': s += '\n'; break;
          case 't': s += '\t'; break;
          case '\\': s += '\\'; break;
          case '"': s += '"'; break;
          case '\'': s += '\''; break;
          default: s += esc;
          }
          advance();
        } else {
          s += ch;
          advance();
        }
      }
      if (!peek()) {
        t.kind = Tok::End;
        t.text = "unterminated string";
        return t;
      }
      advance();
      t.text = s;
      return fin(Tok::Str);
    }
    advance();
    switch (c) {
    case '(': return fin(Tok::LParen);
    case ')': return fin(Tok::RParen);
    case '{': return fin(Tok::LBrace);
    case '}': return fin(Tok::RBrace);
    case ',': return fin(Tok::Comma);
    case ';': return fin(Tok::Semi);
    case ':': return fin(Tok::Colon);
    case '.': return fin(Tok::Dot);
    case '?': return fin(Tok::Question);
    case '+': return fin(Tok::Plus);
    case '|':
      if (peek() == '|') {
        advance();
        return fin(Tok::OrOr);
      }
      return fin(Tok::Pipe);
    case '&':
      if (peek() == '&') {
        advance();
        return fin(Tok::AndAnd);
      }
      break;
    case '=':
      if (peek() == '=' && peek(1) == '=') {
        advance();
        advance();
        return fin(Tok::EqEqEq);
      }
      if (peek() == '=') {
        advance();
        return fin(Tok::EqEq);
      }
      if (peek() == '>') {
        advance();
        return fin(Tok::Arrow);
      }
      return fin(Tok::Assign);
    case '!':
      if (peek() == '=' && peek(1) == '=') {
        advance();
        advance();
        return fin(Tok::NotEqEq);
      }
      if (peek() == '=') {
        advance();
        return fin(Tok::NotEq);
      }
      return fin(Tok::Bang);
    }
    t.kind = Tok::End;
    t.text = std::string("unexpected character '") + c + "'";
    t.span.end = static_cast<uint32_t>(pos);
    return t;
  }
};

std::string canonical_num(double v, const std::string &raw) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return raw;
  return std::string(buf, p);
}

struct Parser {
  std::vector<Token> toks;
  size_t at = 0;
  std::map<std::string, AnnotPtr> aliases;
  int ret_counter = 0;
  int exports_seen = 0;

  explicit Parser(const std::string &src, uint32_t file) {
    Lexer lx(src, file);
    for (;;) {
      Token t = lx.next();
      if (t.kind == Tok::End && !t.text.empty())
        throw ParseFail{t.span, t.text};
      toks.push_back(t);
      if (t.kind == Tok::End) break;
    }
  }

  const Token &cur() const { return toks[at]; }
  const Token &ahead(size_t n) const {
    return toks[std::min(at + n, toks.size() - 1)];
  }
  Token take() { return toks[at++]; }

  bool is(Tok k) const { return cur().kind == k; }
  bool accept(Tok k) {
    if (!is(k)) return false;
    at++;
    return true;
  }
  Token expect(Tok k, const std::string &what) {
    if (!is(k)) throw ParseFail{cur().span, "expected " + what};
    return take();
  }

  [[noreturn]] void fail(const std::string &msg) { throw ParseFail{cur().span, msg}; }

  // Field names may collide with keywords ("type", "function", ...).
  Token expect_field_name() {
    switch (cur().kind) {
    case Tok::Ident:
    case Tok::KwVar:
    case Tok::KwIf:
    case Tok::KwElse:
    case Tok::KwReturn:
    case Tok::KwFunction:
    case Tok::KwTypeof:
    case Tok::KwType:
    case Tok::KwTrue:
    case Tok::KwFalse:
    case Tok::KwNull:
    case Tok::KwUndefined:
      return take();
    default:
      fail("expected field name");
    }
  }

  Span span_from(const Span &start) const {
    Span s = start;
    const Token &prev = toks[at ? at - 1 : 0];
    s.end = prev.span.end;
    return s;
  }

  // Whether the parenthesized group starting at `at` (which must be LParen)
  // is followed by `=>`.
  bool paren_is_arrow() const {
    size_t i = at;
    int depth = 0;
    for (; i < toks.size(); i++) {
      Tok k = toks[i].kind;
      if (k == Tok::LParen) depth++;
      else if (k == Tok::RParen) {
        depth--;
        if (depth == 0) break;
      } else if (k == Tok::End)
        return false;
    }
    return i + 1 < toks.size() && toks[i + 1].kind == Tok::Arrow;
  }

  // ---- Annotations ----

  AnnotPtr parse_annot() {
    Span start = cur().span;
    AnnotPtr first = parse_annot_atom();
    if (!is(Tok::Pipe)) return first;
    // Right-associative union chain.
    std::vector<AnnotPtr> parts{first};
    while (accept(Tok::Pipe)) parts.push_back(parse_annot_atom());
    AnnotPtr out = parts.back();
    for (size_t i = parts.size() - 1; i-- > 0;)
      out = annot_union(parts[i], out, span_from(start));
    return out;
  }

  AnnotPtr parse_annot_atom() {
    Span start = cur().span;
    if (accept(Tok::Question)) return annot_maybe(parse_annot_atom(), span_from(start));
    if (is(Tok::LParen)) {
      if (paren_is_arrow()) {
        take();
        std::vector<AnnotPtr> params;
        if (!is(Tok::RParen)) {
          params.push_back(parse_annot());
          while (accept(Tok::Comma)) params.push_back(parse_annot());
        }
        expect(Tok::RParen, "')'");
        expect(Tok::Arrow, "'=>'");
        AnnotPtr ret = parse_annot();
        return annot_arrow(std::move(params), ret, span_from(start));
      }
      take();
      AnnotPtr inner = parse_annot();
      expect(Tok::RParen, "')'");
      return inner;
    }
    if (is(Tok::LBrace)) {
      take();
      std::map<std::string, AnnotPtr> fields;
      if (!is(Tok::RBrace)) {
        do {
          Token f = expect_field_name();
          expect(Tok::Colon, "':'");
          AnnotPtr v = parse_annot();
          if (!fields.emplace(f.text, v).second)
            throw ParseFail{f.span, "duplicate field '" + f.text + "'"};
        } while (accept(Tok::Comma));
      }
      expect(Tok::RBrace, "'}'");
      return annot_record(std::move(fields), span_from(start));
    }
    if (is(Tok::Str)) {
      Token t = take();
      return annot_singleton(BaseKind::Str, t.text, t.span);
    }
    if (is(Tok::Num)) {
      Token t = take();
      return annot_singleton(BaseKind::Num, canonical_num(t.num, t.text), t.span);
    }
    if (is(Tok::KwTrue) || is(Tok::KwFalse)) {
      Token t = take();
      return annot_singleton(BaseKind::Bool, t.text, t.span);
    }
    if (is(Tok::KwNull)) return annot_base(BaseKind::Null, take().span);
    if (is(Tok::KwUndefined)) return annot_base(BaseKind::Void, take().span);
    if (is(Tok::Ident)) {
      Token t = take();
      if (t.text == "number") return annot_base(BaseKind::Num, t.span);
      if (t.text == "string") return annot_base(BaseKind::Str, t.span);
      if (t.text == "boolean") return annot_base(BaseKind::Bool, t.span);
      if (t.text == "void") return annot_base(BaseKind::Void, t.span);
      auto it = aliases.find(t.text);
      if (it == aliases.end())
        throw ParseFail{t.span, "unknown type name '" + t.text + "'"};
      return it->second;
    }
    fail("expected a type annotation");
  }

  // ---- Expressions ----

  ExprPtr parse_expr() { return parse_assign(); }

  ExprPtr parse_assign() {
    Span start = cur().span;
    ExprPtr lhs = parse_or();
    if (!is(Tok::Assign)) return lhs;
    take();
    ExprPtr value = parse_assign();
    if (lhs->kind == ExprKind::Var) {
      auto e = make_expr(ExprKind::Assign, span_from(start));
      e->ident = lhs->ident;
      e->lhs = std::move(value);
      return e;
    }
    if (lhs->kind == ExprKind::FieldRead) {
      auto e = make_expr(ExprKind::FieldWrite, span_from(start));
      e->field = lhs->field;
      e->lhs = std::move(lhs->lhs);
      e->rhs = std::move(value);
      return e;
    }
    throw ParseFail{lhs->span, "invalid assignment target"};
  }

  ExprPtr parse_or() {
    Span start = cur().span;
    ExprPtr e = parse_and();
    while (accept(Tok::OrOr)) {
      ExprPtr rhs = parse_and();
      auto o = make_expr(ExprKind::Or, span_from(start));
      o->lhs = std::move(e);
      o->rhs = std::move(rhs);
      e = std::move(o);
    }
    return e;
  }

  ExprPtr parse_and() {
    Span start = cur().span;
    ExprPtr e = parse_eq();
    while (accept(Tok::AndAnd)) {
      ExprPtr rhs = parse_eq();
      auto a = make_expr(ExprKind::And, span_from(start));
      a->lhs = std::move(e);
      a->rhs = std::move(rhs);
      e = std::move(a);
    }
    return e;
  }

  // The equality level admits exactly the three runtime-test shapes.
  ExprPtr parse_eq() {
    Span start = cur().span;
    if (is(Tok::KwTypeof)) {
      Token tk = take();
      Token subj = expect(Tok::Ident, "variable after 'typeof'");
      bool neg;
      if (accept(Tok::EqEqEq)) neg = false;
      else if (accept(Tok::NotEqEq)) neg = true;
      else if (accept(Tok::EqEq)) neg = false;
      else if (accept(Tok::NotEq)) neg = true;
      else throw ParseFail{tk.span, "typeof test must compare against a string literal"};
      Token lit = expect(Tok::Str, "string literal");
      TypeofKind k;
      if (!parse_typeof_kind(lit.text, k))
        throw ParseFail{lit.span, "unknown typeof kind '" + lit.text + "'"};
      auto pe = make_expr(ExprKind::PredTest, span_from(start));
      pe->ident = Ident{subj.text, 0};
      pe->pred = BasePred::typeof_is(k);
      return wrap_neg(std::move(pe), neg, span_from(start));
    }
    ExprPtr lhs = parse_add();
    bool neg;
    if (is(Tok::EqEqEq)) neg = false;
    else if (is(Tok::NotEqEq)) neg = true;
    else if (is(Tok::EqEq)) neg = false;
    else if (is(Tok::NotEq)) neg = true;
    else return lhs;
    take();
    Span whole = start;

    // x === null / x != null
    if (lhs->kind == ExprKind::Var && (is(Tok::KwNull) || is(Tok::KwUndefined))) {
      take();
      auto pe = make_expr(ExprKind::PredTest, span_from(whole));
      pe->ident = lhs->ident;
      pe->pred = BasePred::nullish();
      return wrap_neg(std::move(pe), neg, span_from(whole));
    }
    // x.f === "lit"
    if (lhs->kind == ExprKind::FieldRead && lhs->lhs->kind == ExprKind::Var &&
        is(Tok::Str)) {
      Token lit = take();
      auto pe = make_expr(ExprKind::PredTest, span_from(whole));
      pe->ident = lhs->lhs->ident;
      pe->pred = BasePred::field_eq(lhs->field, lit.text);
      return wrap_neg(std::move(pe), neg, span_from(whole));
    }
    fail("only 'x == null', 'typeof x == \"...\"' and 'x.f == \"...\"' comparisons are supported");
  }

  ExprPtr wrap_neg(ExprPtr e, bool neg, Span sp) {
    if (!neg) return e;
    auto n = make_expr(ExprKind::Not, sp);
    n->lhs = std::move(e);
    return n;
  }

  ExprPtr parse_add() {
    Span start = cur().span;
    ExprPtr e = parse_unary();
    while (is(Tok::Plus)) {
      take();
      ExprPtr rhs = parse_unary();
      auto b = make_expr(ExprKind::BinOp, span_from(start));
      b->op = '+';
      b->lhs = std::move(e);
      b->rhs = std::move(rhs);
      e = std::move(b);
    }
    return e;
  }

  ExprPtr parse_unary() {
    if (is(Tok::Bang)) {
      Span start = take().span;
      ExprPtr inner = parse_unary();
      auto n = make_expr(ExprKind::Not, span_from(start));
      n->lhs = std::move(inner);
      return n;
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    Span start = cur().span;
    ExprPtr e = parse_primary();
    for (;;) {
      if (is(Tok::LParen)) {
        take();
        std::vector<ExprPtr> args;
        if (!is(Tok::RParen)) {
          args.push_back(parse_expr());
          while (accept(Tok::Comma)) args.push_back(parse_expr());
        }
        expect(Tok::RParen, "')'");
        auto c = make_expr(ExprKind::Call, span_from(start));
        c->lhs = std::move(e);
        c->args = std::move(args);
        e = std::move(c);
      } else if (is(Tok::Dot)) {
        take();
        Token f = expect_field_name();
        auto g = make_expr(ExprKind::FieldRead, span_from(start));
        g->lhs = std::move(e);
        g->field = f.text;
        e = std::move(g);
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_primary() {
    Span start = cur().span;
    switch (cur().kind) {
    case Tok::Num: {
      Token t = take();
      auto e = make_expr(ExprKind::Const, t.span);
      e->const_kind = ConstKind::Num;
      e->num_value = t.num;
      e->lexeme = canonical_num(t.num, t.text);
      return e;
    }
    case Tok::Str: {
      Token t = take();
      auto e = make_expr(ExprKind::Const, t.span);
      e->const_kind = ConstKind::Str;
      e->lexeme = t.text;
      return e;
    }
    case Tok::KwTrue:
    case Tok::KwFalse: {
      Token t = take();
      auto e = make_expr(ExprKind::Const, t.span);
      e->const_kind = ConstKind::Bool;
      e->lexeme = t.text;
      return e;
    }
    case Tok::KwNull: {
      Token t = take();
      auto e = make_expr(ExprKind::Const, t.span);
      e->const_kind = ConstKind::Null;
      e->lexeme = "null";
      return e;
    }
    case Tok::KwUndefined: {
      Token t = take();
      auto e = make_expr(ExprKind::Const, t.span);
      e->const_kind = ConstKind::Undefined;
      e->lexeme = "undefined";
      return e;
    }
    case Tok::Ident: {
      if (cur().text == "require" && ahead(1).kind == Tok::LParen &&
          ahead(2).kind == Tok::Str && ahead(3).kind == Tok::RParen) {
        take();
        take();
        Token ref = take();
        take();
        auto e = make_expr(ExprKind::Require, span_from(start));
        e->lexeme = ref.text;
        return e;
      }
      Token t = take();
      auto e = make_expr(ExprKind::Var, t.span);
      e->ident = Ident{t.text, 0};
      return e;
    }
    case Tok::LBrace: {
      take();
      auto e = make_expr(ExprKind::Record, start);
      std::vector<std::string> seen;
      if (!is(Tok::RBrace)) {
        do {
          Token f = expect_field_name();
          for (const auto &s : seen)
            if (s == f.text)
              throw ParseFail{f.span, "duplicate field '" + f.text + "'"};
          seen.push_back(f.text);
          ExprPtr init;
          if (accept(Tok::Colon)) {
            init = parse_expr();
          } else {
            // shorthand {head, tail}
            init = make_expr(ExprKind::Var, f.span);
            init->ident = Ident{f.text, 0};
          }
          e->fields.push_back(RecordField{f.text, std::move(init)});
        } while (accept(Tok::Comma));
      }
      expect(Tok::RBrace, "'}'");
      e->span = span_from(start);
      return e;
    }
    case Tok::LParen: {
      if (paren_is_arrow()) return parse_arrow();
      take();
      ExprPtr inner = parse_expr();
      expect(Tok::RParen, "')'");
      return inner;
    }
    default:
      fail("expected an expression");
    }
  }

  ExprPtr parse_arrow() {
    Span start = cur().span;
    expect(Tok::LParen, "'('");
    std::vector<Param> params;
    if (!is(Tok::RParen)) {
      do {
        Token name = expect(Tok::Ident, "parameter name");
        AnnotPtr annot;
        if (accept(Tok::Colon)) annot = parse_annot();
        params.push_back(Param{Ident{name.text, 0}, annot, name.span});
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, "')'");
    expect(Tok::Arrow, "'=>'");
    auto e = make_expr(ExprKind::Arrow, start);
    e->params = std::move(params);
    if (is(Tok::LBrace)) {
      auto [body, ret] = parse_function_body();
      e->body = std::move(body);
      e->ret = std::move(ret);
    } else {
      ExprPtr value = parse_assign();
      e->body = make_stmt(StmtKind::Skip, value->span);
      e->ret = std::move(value);
    }
    e->span = span_from(start);
    return e;
  }

  // ---- Statements ----

  StmtPtr fold_seq(std::vector<StmtPtr> list, Span sp) {
    if (list.empty()) return make_stmt(StmtKind::Skip, sp);
    StmtPtr out = std::move(list.back());
    for (size_t i = list.size() - 1; i-- > 0;) {
      auto seq = make_stmt(StmtKind::Seq, sp);
      seq->a = std::move(list[i]);
      seq->b = std::move(out);
      out = std::move(seq);
    }
    return out;
  }

  static void flatten(StmtPtr s, std::vector<StmtPtr> &out) {
    if (!s || s->kind == StmtKind::Skip) return;
    if (s->kind == StmtKind::Seq) {
      flatten(std::move(s->a), out);
      flatten(std::move(s->b), out);
      return;
    }
    out.push_back(std::move(s));
  }

  static bool contains_return(const Stmt &s) {
    switch (s.kind) {
    case StmtKind::Return: return true;
    case StmtKind::Seq: return contains_return(*s.a) || contains_return(*s.b);
    case StmtKind::If: return contains_return(*s.a) || contains_return(*s.b);
    default: return false;
    }
  }

  struct Normalized {
    std::vector<StmtPtr> body;
    ExprPtr ret;
    bool guaranteed = false; // every path ended in an explicit return
  };

  // Rewrites tail returns so that the body returns exactly once, at the end.
  Normalized normalize_returns(std::vector<StmtPtr> list, Span body_span) {
    for (size_t i = 0; i < list.size(); i++) {
      Stmt &s = *list[i];
      if (s.kind == StmtKind::Return) {
        if (i + 1 != list.size())
          throw ParseFail{list[i + 1]->span, "unreachable code after return"};
        Normalized n;
        n.ret = std::move(s.expr);
        n.guaranteed = true;
        list.pop_back();
        n.body = std::move(list);
        return n;
      }
      if (s.kind == StmtKind::If && (contains_return(*s.a) || contains_return(*s.b))) {
        std::vector<StmtPtr> then_list, else_list;
        flatten(std::move(s.a), then_list);
        flatten(std::move(s.b), else_list);
        bool tail_empty = i + 1 == list.size();
        if (!tail_empty) {
          std::vector<StmtPtr> tail;
          for (size_t j = i + 1; j < list.size(); j++) tail.push_back(std::move(list[j]));
          list.resize(i + 1);
          bool then_has = false, else_has = false;
          for (auto &st : then_list) then_has = then_has || contains_return(*st);
          for (auto &st : else_list) else_has = else_has || contains_return(*st);
          if (then_has && else_has)
            throw ParseFail{tail.front()->span, "unreachable code after return"};
          // The returning branch must return on every path for the
          // fallthrough to move into the other branch.
          auto ensure_guaranteed = [&](std::vector<StmtPtr> &branch) {
            std::vector<StmtPtr> copy;
            for (auto &st : branch) copy.push_back(clone_stmt(*st));
            Normalized n = normalize_returns(std::move(copy), body_span);
            if (!n.guaranteed)
              throw ParseFail{s.span, "a conditional return must cover the whole branch"};
          };
          if (then_has) {
            ensure_guaranteed(then_list);
            for (auto &st : tail) else_list.push_back(std::move(st));
          } else {
            ensure_guaranteed(else_list);
            for (auto &st : tail) then_list.push_back(std::move(st));
          }
          s.a = fold_seq(std::move(then_list), s.span);
          s.b = fold_seq(std::move(else_list), s.span);
          return normalize_returns(std::move(list), body_span);
        }
        // Terminal if: route both branch results through a fresh local.
        Normalized tn = normalize_returns(std::move(then_list), s.span);
        Normalized en = normalize_returns(std::move(else_list), s.span);
        Ident slot{"%ret" + std::to_string(++ret_counter), 0};
        auto mk_undef = [&](Span sp) {
          auto u = make_expr(ExprKind::Const, sp);
          u->const_kind = ConstKind::Undefined;
          u->lexeme = "undefined";
          return u;
        };
        auto decl = make_stmt(StmtKind::VarDecl, s.span);
        decl->ident = slot;
        decl->expr = tn.ret ? std::move(tn.ret) : mk_undef(s.span);
        tn.body.push_back(std::move(decl));
        auto asg = make_expr(ExprKind::Assign, s.span);
        asg->ident = slot;
        asg->lhs = en.ret ? std::move(en.ret) : mk_undef(s.span);
        auto asg_stmt = make_stmt(StmtKind::Expr, s.span);
        asg_stmt->expr = std::move(asg);
        en.body.push_back(std::move(asg_stmt));
        s.a = fold_seq(std::move(tn.body), s.span);
        s.b = fold_seq(std::move(en.body), s.span);
        Normalized n;
        auto rd = make_expr(ExprKind::Var, s.span);
        rd->ident = slot;
        n.ret = std::move(rd);
        n.guaranteed = tn.guaranteed && en.guaranteed;
        n.body = std::move(list);
        return n;
      }
    }
    Normalized n;
    n.body = std::move(list);
    n.guaranteed = false;
    return n; // ret filled by caller with undefined
  }

  std::pair<StmtPtr, ExprPtr> parse_function_body() {
    Span start = cur().span;
    expect(Tok::LBrace, "'{'");
    std::vector<StmtPtr> list;
    while (!is(Tok::RBrace)) list.push_back(parse_stmt(true));
    expect(Tok::RBrace, "'}'");
    Span body_span = span_from(start);
    Normalized n = normalize_returns(std::move(list), body_span);
    ExprPtr ret = std::move(n.ret);
    if (!ret) {
      ret = make_expr(ExprKind::Const, body_span);
      ret->const_kind = ConstKind::Undefined;
      ret->lexeme = "undefined";
    }
    return {fold_seq(std::move(n.body), body_span), std::move(ret)};
  }

  StmtPtr parse_block() {
    Span start = cur().span;
    expect(Tok::LBrace, "'{'");
    std::vector<StmtPtr> list;
    while (!is(Tok::RBrace)) list.push_back(parse_stmt(true));
    expect(Tok::RBrace, "'}'");
    return fold_seq(std::move(list), span_from(start));
  }

  StmtPtr parse_stmt(bool inside_function) {
    Span start = cur().span;
    switch (cur().kind) {
    case Tok::Semi:
      take();
      return make_stmt(StmtKind::Skip, start);
    case Tok::KwVar: {
      take();
      Token name = expect(Tok::Ident, "variable name");
      AnnotPtr annot;
      if (accept(Tok::Colon)) annot = parse_annot();
      expect(Tok::Assign, "'='");
      ExprPtr init = parse_expr();
      expect(Tok::Semi, "';'");
      auto s = make_stmt(StmtKind::VarDecl, span_from(start));
      s->ident = Ident{name.text, 0};
      s->annot = annot;
      s->expr = std::move(init);
      return s;
    }
    case Tok::KwIf: {
      take();
      expect(Tok::LParen, "'('");
      ExprPtr cond = parse_expr();
      expect(Tok::RParen, "')'");
      StmtPtr then_s = parse_block();
      StmtPtr else_s;
      if (accept(Tok::KwElse)) {
        else_s = is(Tok::KwIf) ? parse_stmt(inside_function) : parse_block();
      } else {
        else_s = make_stmt(StmtKind::Skip, span_from(start));
      }
      auto s = make_stmt(StmtKind::If, span_from(start));
      s->expr = std::move(cond);
      s->a = std::move(then_s);
      s->b = std::move(else_s);
      return s;
    }
    case Tok::KwReturn: {
      take();
      if (!inside_function)
        throw ParseFail{start, "return outside of a function"};
      ExprPtr value;
      if (!is(Tok::Semi)) value = parse_expr();
      else {
        value = make_expr(ExprKind::Const, start);
        value->const_kind = ConstKind::Undefined;
        value->lexeme = "undefined";
      }
      expect(Tok::Semi, "';'");
      auto s = make_stmt(StmtKind::Return, span_from(start));
      s->expr = std::move(value);
      return s;
    }
    case Tok::KwFunction: {
      take();
      Token name = expect(Tok::Ident, "function name");
      expect(Tok::LParen, "'('");
      std::vector<Param> params;
      if (!is(Tok::RParen)) {
        do {
          Token p = expect(Tok::Ident, "parameter name");
          AnnotPtr annot;
          if (accept(Tok::Colon)) annot = parse_annot();
          params.push_back(Param{Ident{p.text, 0}, annot, p.span});
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen, "')'");
      auto [body, ret] = parse_function_body();
      auto arrow = make_expr(ExprKind::Arrow, span_from(start));
      arrow->params = std::move(params);
      arrow->body = std::move(body);
      arrow->ret = std::move(ret);
      auto s = make_stmt(StmtKind::VarDecl, span_from(start));
      s->ident = Ident{name.text, 0};
      s->expr = std::move(arrow);
      return s;
    }
    case Tok::KwType: {
      take();
      Token name = expect(Tok::Ident, "type alias name");
      expect(Tok::Assign, "'='");
      AnnotPtr a = parse_annot();
      expect(Tok::Semi, "';'");
      if (!aliases.emplace(name.text, a).second)
        throw ParseFail{name.span, "duplicate type alias '" + name.text + "'"};
      return make_stmt(StmtKind::Skip, span_from(start));
    }
    default:
      break;
    }
    // module.exports = e;
    if (is(Tok::Ident) && cur().text == "module" && ahead(1).kind == Tok::Dot &&
        ahead(2).kind == Tok::Ident && ahead(2).text == "exports" &&
        ahead(3).kind == Tok::Assign) {
      take();
      take();
      take();
      take();
      if (inside_function) throw ParseFail{start, "module.exports inside a function"};
      if (++exports_seen > 1)
        throw ParseFail{start, "duplicate module.exports"};
      ExprPtr e = parse_expr();
      expect(Tok::Semi, "';'");
      auto s = make_stmt(StmtKind::Export, span_from(start));
      s->expr = std::move(e);
      return s;
    }
    ExprPtr e = parse_expr();
    expect(Tok::Semi, "';'");
    auto s = make_stmt(StmtKind::Expr, span_from(start));
    s->expr = std::move(e);
    return s;
  }

  Program parse_program(const std::string &file) {
    Program p;
    p.source_file = file;
    while (!is(Tok::End)) {
      StmtPtr s = parse_stmt(false);
      if (s->kind != StmtKind::Skip) p.statements.push_back(std::move(s));
    }
    return p;
  }
};

} // namespace

ParseResult parse(const std::string &source, const std::string &file,
                  uint32_t file_index) {
  ParseResult out;
  try {
    Parser p(source, file_index);
    out.program = p.parse_program(file);
  } catch (const ParseFail &f) {
    out.error = ParseError{f.span, f.message};
  }
  return out;
}

} // namespace flowlet
