#include "flowlet/annot.hpp"

namespace flowlet {

static AnnotPtr mk(Annot a) { return std::make_shared<Annot>(std::move(a)); }

AnnotPtr annot_base(BaseKind k, Span sp) {
  Annot a;
  a.tag = Annot::Tag::Base;
  a.base.kind = k;
  a.span = sp;
  return mk(std::move(a));
}

AnnotPtr annot_singleton(BaseKind k, std::string value, Span sp) {
  Annot a;
  a.tag = Annot::Tag::Base;
  a.base.kind = k;
  a.base.value = std::move(value);
  a.base.has_value = true;
  a.span = sp;
  return mk(std::move(a));
}

AnnotPtr annot_arrow(std::vector<AnnotPtr> params, AnnotPtr ret, Span sp) {
  Annot a;
  a.tag = Annot::Tag::Arrow;
  a.arrow.params = std::move(params);
  a.arrow.ret = std::move(ret);
  a.span = sp;
  return mk(std::move(a));
}

AnnotPtr annot_record(std::map<std::string, AnnotPtr> fields, Span sp) {
  Annot a;
  a.tag = Annot::Tag::Record;
  a.record.fields = std::move(fields);
  a.span = sp;
  return mk(std::move(a));
}

AnnotPtr annot_union(AnnotPtr l, AnnotPtr r, Span sp) {
  Annot a;
  a.tag = Annot::Tag::Union;
  a.uni.left = std::move(l);
  a.uni.right = std::move(r);
  a.span = sp;
  return mk(std::move(a));
}

AnnotPtr annot_maybe(AnnotPtr inner, Span sp) {
  return annot_union(annot_base(BaseKind::Null, sp),
                     annot_union(annot_base(BaseKind::Void, sp), std::move(inner), sp),
                     sp);
}

static const char *base_kind_str(BaseKind k) {
  switch (k) {
  case BaseKind::Num: return "number";
  case BaseKind::Str: return "string";
  case BaseKind::Bool: return "boolean";
  case BaseKind::Void: return "void";
  case BaseKind::Null: return "null";
  }
  return "?";
}

std::string annot_str(const AnnotPtr &a) {
  if (!a) return "<missing>";
  switch (a->tag) {
  case Annot::Tag::Base:
    if (!a->base.has_value) return base_kind_str(a->base.kind);
    if (a->base.kind == BaseKind::Str) return "\"" + a->base.value + "\"";
    return a->base.value;
  case Annot::Tag::Arrow: {
    std::string s = "(";
    for (size_t i = 0; i < a->arrow.params.size(); i++) {
      if (i) s += ", ";
      s += annot_str(a->arrow.params[i]);
    }
    return s + ") => " + annot_str(a->arrow.ret);
  }
  case Annot::Tag::Record: {
    std::string s = "{";
    bool first = true;
    for (const auto &[f, t] : a->record.fields) {
      if (!first) s += ", ";
      first = false;
      s += f + ": " + annot_str(t);
    }
    return s + "}";
  }
  case Annot::Tag::Union: {
    auto part = [](const AnnotPtr &p) {
      std::string s = annot_str(p);
      return p && p->tag == Annot::Tag::Arrow ? "(" + s + ")" : s;
    };
    return part(a->uni.left) + " | " + part(a->uni.right);
  }
  }
  return "?";
}

bool annot_equal(const AnnotPtr &a, const AnnotPtr &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return annot_str(a) == annot_str(b);
}

} // namespace flowlet
