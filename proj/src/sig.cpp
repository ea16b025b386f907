#include "flowlet/sig.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

namespace flowlet {

uint64_t fnv1a64(const std::string &bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

std::shared_ptr<const SigLit> mk_lit(SigLit l) {
  return std::make_shared<SigLit>(std::move(l));
}

SigTypePtr sig_var(uint32_t idx) {
  auto t = std::make_shared<SigType>();
  t->tag = SigType::Tag::Var;
  t->var = idx;
  return t;
}

SigTypePtr sig_lit(SigLit l) {
  auto t = std::make_shared<SigType>();
  t->tag = SigType::Tag::Lit;
  t->lit = mk_lit(std::move(l));
  return t;
}

SigTypePtr sig_join(SigTypePtr a, SigTypePtr b) {
  auto t = std::make_shared<SigType>();
  t->tag = SigType::Tag::Join;
  t->left = std::move(a);
  t->right = std::move(b);
  return t;
}

// Shallow structural key used to order a class's lower bounds before
// canonical numbering; variables render as '*' down to a small depth.
std::string sort_key(const TypePtr &t, int depth);

std::string sort_key_lit(const TypeLit &l, int depth) {
  if (const auto *b = l.as_base()) return type_lit_str(TypeLit{*b});
  if (const auto *a = l.as_arrow()) {
    std::string s = "(" + std::to_string(a->params.size()) + ")->";
    return s + sort_key(a->ret, depth - 1);
  }
  std::string s = "{";
  for (const auto &[f, v] : l.as_record()->fields)
    s += f + ":" + sort_key(v, depth - 1) + ",";
  return s + "}";
}

std::string sort_key(const TypePtr &t, int depth) {
  if (!t || depth <= 0) return "*";
  if (t->as_var()) return "*";
  if (const auto *j = t->as_join())
    return "(" + sort_key(j->left, depth - 1) + "|" + sort_key(j->right, depth - 1) + ")";
  return sort_key_lit(*t->as_lit(), depth);
}

struct Extractor {
  const ConstraintGraph &g;
  const std::string &file;
  ModuleSignature out;
  std::map<uint32_t, uint32_t> canon; // class rep -> canonical index
  uint32_t next = 0;

  Extractor(const ConstraintGraph &graph, const std::string &f) : g(graph), file(f) {}

  SigTypePtr walk_type(const TypePtr &t) {
    if (!t) return sig_lit(SigLit{});
    if (const auto *v = t->as_var()) return walk_var(*v);
    if (const auto *j = t->as_join())
      return sig_join(walk_type(j->left), walk_type(j->right));
    return sig_lit(walk_lit(*t->as_lit()));
  }

  SigTypePtr walk_var(TypeVar v) {
    uint32_t rep = g.find(v.id);
    auto it = canon.find(rep);
    if (it != canon.end()) return sig_var(it->second);
    uint32_t idx = next++;
    canon.emplace(rep, idx);
    // Upper bounds are discarded; only literal lower bounds survive.
    auto lowers = g.lowers_of(v);
    std::stable_sort(lowers.begin(), lowers.end(),
                     [](const TypeLowerBound &a, const TypeLowerBound &b) {
                       return sort_key_lit(a.lit, 3) < sort_key_lit(b.lit, 3);
                     });
    for (const auto &lb : lowers)
      out.constraints.emplace_back(idx, walk_lit(lb.lit));
    return sig_var(idx);
  }

  SigLit walk_lit(const TypeLit &l) {
    SigLit s;
    if (const auto *b = l.as_base()) {
      s.tag = SigLit::Tag::Base;
      s.base_kind = b->kind;
      s.base_value = b->value;
      s.base_singleton = b->singleton;
      return s;
    }
    if (const auto *a = l.as_arrow()) {
      s.tag = SigLit::Tag::Arrow;
      for (TypeVar p : a->params) {
        AnnotPtr annot = g.param_annotation(p);
        if (!annot) {
          Span sp = g.var_span(p.id);
          out.required_annotations.push_back(Loc{file, sp});
        }
        s.arrow_params.push_back(annot);
      }
      s.arrow_ret = walk_type(a->ret);
      return s;
    }
    s.tag = SigLit::Tag::Record;
    for (const auto &[f, v] : l.as_record()->fields)
      s.record_fields.emplace(f, walk_type(v));
    return s;
  }
};

const char *base_kind_name(BaseKind k) {
  switch (k) {
  case BaseKind::Num: return "num";
  case BaseKind::Str: return "str";
  case BaseKind::Bool: return "bool";
  case BaseKind::Void: return "void";
  case BaseKind::Null: return "null";
  }
  return "?";
}

void render_sig_type(const SigTypePtr &t, std::ostream &os);

void render_sig_lit(const SigLit &l, std::ostream &os) {
  switch (l.tag) {
  case SigLit::Tag::Base:
    if (l.base_singleton) {
      if (l.base_kind == BaseKind::Str) {
        os << '"' << l.base_value << '"';
      } else {
        os << base_kind_name(l.base_kind) << ':' << l.base_value;
      }
    } else {
      os << base_kind_name(l.base_kind);
    }
    return;
  case SigLit::Tag::Arrow: {
    os << "fn(";
    for (size_t i = 0; i < l.arrow_params.size(); i++) {
      if (i) os << ", ";
      os << (l.arrow_params[i] ? annot_str(l.arrow_params[i]) : "?");
    }
    os << ") -> ";
    render_sig_type(l.arrow_ret, os);
    return;
  }
  case SigLit::Tag::Record: {
    os << "{";
    bool first = true;
    for (const auto &[f, v] : l.record_fields) {
      if (!first) os << ", ";
      first = false;
      os << f << ": ";
      render_sig_type(v, os);
    }
    os << "}";
    return;
  }
  }
}

void render_sig_type(const SigTypePtr &t, std::ostream &os) {
  if (!t) {
    os << "?";
    return;
  }
  switch (t->tag) {
  case SigType::Tag::Var:
    os << "V" << t->var;
    return;
  case SigType::Tag::Lit:
    render_sig_lit(*t->lit, os);
    return;
  case SigType::Tag::Join:
    os << "(";
    render_sig_type(t->left, os);
    os << " | ";
    render_sig_type(t->right, os);
    os << ")";
    return;
  }
}

} // namespace

std::string serialize_signature(const ModuleSignature &sig) {
  std::ostringstream os;
  os << "sig v1\n";
  os << "export ";
  render_sig_type(sig.export_type, os);
  os << "\n";
  for (const auto &[var, lit] : sig.constraints) {
    os << "V" << var << " <- ";
    render_sig_lit(lit, os);
    os << "\n";
  }
  if (!sig.required_annotations.empty()) {
    os << "needs-annotations";
    for (const auto &loc : sig.required_annotations)
      os << " " << loc.span.line << ":" << loc.span.col;
    os << "\n";
  }
  return os.str();
}

ModuleSignature extract_signature(const ConstraintGraph &g, const TypePtr &export_type,
                                  const std::string &file, Span export_span) {
  (void)export_span;
  Extractor ex(g, file);
  SigTypePtr root = ex.walk_type(export_type);
  ModuleSignature sig = std::move(ex.out);
  sig.export_type = std::move(root);
  sig.valid = true;
  sig.serialized = serialize_signature(sig);
  sig.hash = fnv1a64(sig.serialized);
  return sig;
}

ModuleSignature void_signature() {
  ModuleSignature sig;
  SigLit v;
  v.tag = SigLit::Tag::Base;
  v.base_kind = BaseKind::Void;
  sig.export_type = sig_lit(std::move(v));
  sig.valid = true;
  sig.serialized = serialize_signature(sig);
  sig.hash = fnv1a64(sig.serialized);
  return sig;
}

TypePtr load_signature(ConstraintGraph &g, const ModuleSignature &sig, Span import_span) {
  if (!sig.export_type) return t_void();
  std::map<uint32_t, TypeVar> vars;
  auto var_for = [&](uint32_t idx) {
    auto it = vars.find(idx);
    if (it != vars.end()) return it->second;
    TypeVar v = g.fresh_type_var(import_span);
    vars.emplace(idx, v);
    return v;
  };

  std::function<TypePtr(const SigTypePtr &)> load_type;
  std::function<TypePtr(const SigLit &)> load_lit;

  load_lit = [&](const SigLit &l) -> TypePtr {
    switch (l.tag) {
    case SigLit::Tag::Base:
      return t_lit(TypeLit{BaseLit{l.base_kind, l.base_value, l.base_singleton}});
    case SigLit::Tag::Arrow: {
      std::vector<TypeVar> params;
      for (const auto &pa : l.arrow_params) {
        TypeVar pv = g.fresh_type_var(import_span);
        if (pa) {
          g.note_param_annotation(pv, pa);
          g.add(TypeConstraint{g.materialize_annot(pa, import_span), UseToVar{pv},
                               import_span, import_span});
          g.add(TypeConstraint{t_var(pv), UseAnnot{pa}, import_span, import_span});
        }
        params.push_back(pv);
      }
      return t_arrow(std::move(params), e_var(g.escape_var()), load_type(l.arrow_ret));
    }
    case SigLit::Tag::Record: {
      std::map<std::string, TypePtr> fields;
      for (const auto &[f, v] : l.record_fields) fields.emplace(f, load_type(v));
      return t_record(std::move(fields));
    }
    }
    return t_void();
  };

  load_type = [&](const SigTypePtr &t) -> TypePtr {
    if (!t) return t_void();
    switch (t->tag) {
    case SigType::Tag::Var:
      return t_var(var_for(t->var));
    case SigType::Tag::Lit:
      return load_lit(*t->lit);
    case SigType::Tag::Join:
      return t_join(load_type(t->left), load_type(t->right));
    }
    return t_void();
  };

  // Constraints first so the export type lands on populated classes.
  for (const auto &[var, lit] : sig.constraints) {
    TypePtr lower = load_lit(lit);
    g.add(TypeConstraint{lower, UseToVar{var_for(var)}, import_span, import_span});
  }
  return load_type(sig.export_type);
}

} // namespace flowlet
