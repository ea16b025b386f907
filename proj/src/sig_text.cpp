// Signature deserialization: the inverse of serialize_signature. Signatures
// travel through the shared results table as bytes, so workers rebuild them
// from this format.
#include <cstdlib>
#include <stdexcept>

#include "flowlet/sig.hpp"

namespace flowlet {

namespace {

struct Cursor {
  const std::string &s;
  size_t pos = 0;

  explicit Cursor(const std::string &text) : s(text) {}

  bool eof() const { return pos >= s.size(); }
  char peek(size_t off = 0) const { return pos + off < s.size() ? s[pos + off] : '\0'; }
  bool try_eat(const std::string &tok) {
    if (s.compare(pos, tok.size(), tok) != 0) return false;
    pos += tok.size();
    return true;
  }
  void eat(const std::string &tok) {
    if (!try_eat(tok)) throw std::runtime_error("bad signature near '" + rest(16) + "'");
  }
  std::string rest(size_t n) const { return s.substr(pos, n); }

  uint32_t number() {
    size_t start = pos;
    while (peek() >= '0' && peek() <= '9') pos++;
    if (pos == start) throw std::runtime_error("bad signature: number expected");
    return static_cast<uint32_t>(std::strtoul(s.substr(start, pos - start).c_str(),
                                              nullptr, 10));
  }

  std::string quoted() {
    eat("\"");
    std::string out;
    while (!eof() && peek() != '"') {
      out += peek();
      pos++;
    }
    eat("\"");
    return out;
  }

  std::string word() {
    size_t start = pos;
    // Includes everything a canonical number lexeme can contain ("1e+25").
    while (isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
           peek() == '.' || peek() == '-' || peek() == '+' || peek() == '%')
      pos++;
    return s.substr(start, pos - start);
  }
};

bool word_base_kind(const std::string &w, BaseKind &out) {
  if (w == "num") out = BaseKind::Num;
  else if (w == "str") out = BaseKind::Str;
  else if (w == "bool") out = BaseKind::Bool;
  else if (w == "void") out = BaseKind::Void;
  else if (w == "null") out = BaseKind::Null;
  else return false;
  return true;
}

// Annotation grammar, mirroring annot_str's output.
AnnotPtr parse_annot(Cursor &c);

AnnotPtr parse_annot_atom(Cursor &c) {
  if (c.peek() == '(') {
    // Arrow or parenthesized group: find the matching ')' and look for '=>'.
    size_t depth = 0, i = c.pos;
    for (; i < c.s.size(); i++) {
      if (c.s[i] == '(') depth++;
      else if (c.s[i] == ')' && --depth == 0) break;
    }
    bool arrow = c.s.compare(i + 1, 4, " => ") == 0;
    c.eat("(");
    if (arrow) {
      std::vector<AnnotPtr> params;
      if (c.peek() != ')') {
        params.push_back(parse_annot(c));
        while (c.try_eat(", ")) params.push_back(parse_annot(c));
      }
      c.eat(")");
      c.eat(" => ");
      AnnotPtr ret = parse_annot_atom(c);
      return annot_arrow(std::move(params), std::move(ret));
    }
    AnnotPtr inner = parse_annot(c);
    c.eat(")");
    return inner;
  }
  if (c.peek() == '{') {
    c.eat("{");
    std::map<std::string, AnnotPtr> fields;
    if (c.peek() != '}') {
      for (;;) {
        std::string f = c.word();
        c.eat(": ");
        fields.emplace(f, parse_annot(c));
        if (!c.try_eat(", ")) break;
      }
    }
    c.eat("}");
    return annot_record(std::move(fields));
  }
  if (c.peek() == '"') return annot_singleton(BaseKind::Str, c.quoted());
  if (c.peek() == '-' || (c.peek() >= '0' && c.peek() <= '9')) {
    std::string w = c.word();
    return annot_singleton(BaseKind::Num, w);
  }
  std::string w = c.word();
  if (w == "true" || w == "false") return annot_singleton(BaseKind::Bool, w);
  if (w == "number") return annot_base(BaseKind::Num);
  if (w == "string") return annot_base(BaseKind::Str);
  if (w == "boolean") return annot_base(BaseKind::Bool);
  if (w == "void") return annot_base(BaseKind::Void);
  if (w == "null") return annot_base(BaseKind::Null);
  throw std::runtime_error("bad signature annotation near '" + w + "'");
}

AnnotPtr parse_annot(Cursor &c) {
  std::vector<AnnotPtr> parts;
  parts.push_back(parse_annot_atom(c));
  while (c.try_eat(" | ")) parts.push_back(parse_annot_atom(c));
  AnnotPtr out = parts.back();
  for (size_t i = parts.size() - 1; i-- > 0;) out = annot_union(parts[i], out);
  return out;
}

SigTypePtr parse_stype(Cursor &c);

SigLit parse_slit(Cursor &c) {
  SigLit l;
  if (c.try_eat("fn(")) {
    l.tag = SigLit::Tag::Arrow;
    if (c.peek() != ')') {
      for (;;) {
        if (c.try_eat("?")) l.arrow_params.push_back(nullptr);
        else l.arrow_params.push_back(parse_annot(c));
        if (!c.try_eat(", ")) break;
      }
    }
    c.eat(") -> ");
    l.arrow_ret = parse_stype(c);
    return l;
  }
  if (c.peek() == '{') {
    c.eat("{");
    l.tag = SigLit::Tag::Record;
    if (c.peek() != '}') {
      for (;;) {
        std::string f = c.word();
        c.eat(": ");
        l.record_fields.emplace(f, parse_stype(c));
        if (!c.try_eat(", ")) break;
      }
    }
    c.eat("}");
    return l;
  }
  l.tag = SigLit::Tag::Base;
  if (c.peek() == '"') {
    l.base_kind = BaseKind::Str;
    l.base_value = c.quoted();
    l.base_singleton = true;
    return l;
  }
  std::string w = c.word();
  // "num:5" style singletons carry the kind before the colon.
  if (c.peek() == ':' && (w == "num" || w == "bool")) {
    c.eat(":");
    word_base_kind(w, l.base_kind);
    l.base_value = c.word();
    l.base_singleton = true;
    return l;
  }
  if (!word_base_kind(w, l.base_kind))
    throw std::runtime_error("bad signature literal near '" + w + "'");
  return l;
}

SigTypePtr parse_stype(Cursor &c) {
  if (c.peek() == 'V' && c.peek(1) >= '0' && c.peek(1) <= '9') {
    c.eat("V");
    auto t = std::make_shared<SigType>();
    t->tag = SigType::Tag::Var;
    t->var = c.number();
    return t;
  }
  if (c.peek() == '(') {
    c.eat("(");
    SigTypePtr left = parse_stype(c);
    c.eat(" | ");
    SigTypePtr right = parse_stype(c);
    c.eat(")");
    auto t = std::make_shared<SigType>();
    t->tag = SigType::Tag::Join;
    t->left = std::move(left);
    t->right = std::move(right);
    return t;
  }
  auto t = std::make_shared<SigType>();
  t->tag = SigType::Tag::Lit;
  t->lit = std::make_shared<SigLit>(parse_slit(c));
  return t;
}

} // namespace

ModuleSignature parse_signature(const std::string &bytes) {
  ModuleSignature sig;
  Cursor c(bytes);
  c.eat("sig v1\n");
  c.eat("export ");
  sig.export_type = parse_stype(c);
  c.eat("\n");
  while (!c.eof()) {
    if (c.try_eat("needs-annotations")) {
      while (c.try_eat(" ")) {
        Span sp;
        sp.line = c.number();
        c.eat(":");
        sp.col = c.number();
        sig.required_annotations.push_back(Loc{"", sp});
      }
      c.eat("\n");
      continue;
    }
    if (c.try_eat("V")) {
      uint32_t var = c.number();
      c.eat(" <- ");
      sig.constraints.emplace_back(var, parse_slit(c));
      c.eat("\n");
      continue;
    }
    throw std::runtime_error("bad signature line near '" + c.rest(16) + "'");
  }
  sig.valid = true;
  sig.serialized = bytes;
  sig.hash = fnv1a64(bytes);
  return sig;
}

} // namespace flowlet
