#include "flowlet/predmap.hpp"

namespace flowlet {

static PredMapPtr mk(PredMap p) { return std::make_shared<PredMap>(std::move(p)); }

PredMapPtr pm_empty() {
  static PredMapPtr empty = mk(PredMap{PredMap::Tag::Empty, {}, {}, {}, {}, {}});
  return empty;
}

PredMapPtr pm_single(Ident id, Predicate p) {
  return mk(PredMap{PredMap::Tag::Single, std::move(id), p, {}, {}, {}});
}

PredMapPtr pm_and(PredMapPtr l, PredMapPtr r) {
  if (l->tag == PredMap::Tag::Empty) return r;
  if (r->tag == PredMap::Tag::Empty) return l;
  return mk(PredMap{PredMap::Tag::And, {}, {}, std::move(l), std::move(r), {}});
}

PredMapPtr pm_or(PredMapPtr l, PredMapPtr r) {
  return mk(PredMap{PredMap::Tag::Or, {}, {}, std::move(l), std::move(r), {}});
}

PredMapPtr pm_not(PredMapPtr p) {
  return mk(PredMap{PredMap::Tag::Not, {}, {}, std::move(p), {}, {}});
}

PredMapPtr pm_exclude(PredMapPtr p, EffectPtr eff) {
  if (eff->is_empty()) return p;
  if (p->tag == PredMap::Tag::Empty) return p;
  return mk(PredMap{PredMap::Tag::ExcludeEffect, {}, {}, std::move(p), {}, std::move(eff)});
}

static PredMapPtr negate_inner(const PredMapPtr &p, bool negate) {
  switch (p->tag) {
  case PredMap::Tag::Empty:
    return p;
  case PredMap::Tag::Single:
    return negate ? pm_single(p->id, p->pred.negate()) : p;
  case PredMap::Tag::And: {
    auto l = negate_inner(p->left, negate);
    auto r = negate_inner(p->right, negate);
    return negate ? pm_or(l, r) : pm_and(l, r);
  }
  case PredMap::Tag::Or: {
    auto l = negate_inner(p->left, negate);
    auto r = negate_inner(p->right, negate);
    return negate ? pm_and(l, r) : pm_or(l, r);
  }
  case PredMap::Tag::Not:
    return negate_inner(p->left, !negate);
  case PredMap::Tag::ExcludeEffect:
    return pm_exclude(negate_inner(p->left, negate), p->effect);
  }
  return p;
}

PredMapPtr negate_predmap(const PredMapPtr &p) { return negate_inner(p, true); }

bool predmap_has_not(const PredMapPtr &p) {
  if (!p) return false;
  switch (p->tag) {
  case PredMap::Tag::Not:
    return true;
  case PredMap::Tag::And:
  case PredMap::Tag::Or:
    return predmap_has_not(p->left) || predmap_has_not(p->right);
  case PredMap::Tag::ExcludeEffect:
    return predmap_has_not(p->left);
  default:
    return false;
  }
}

std::string predmap_str(const PredMapPtr &p) {
  if (!p) return "?";
  switch (p->tag) {
  case PredMap::Tag::Empty:
    return "{}";
  case PredMap::Tag::Single:
    return "{" + p->id.text + "#" + std::to_string(p->id.uid) + " -> " +
           pred_str(p->pred) + "}";
  case PredMap::Tag::And:
    return "(" + predmap_str(p->left) + " & " + predmap_str(p->right) + ")";
  case PredMap::Tag::Or:
    return "(" + predmap_str(p->left) + " | " + predmap_str(p->right) + ")";
  case PredMap::Tag::Not:
    return "!" + predmap_str(p->left);
  case PredMap::Tag::ExcludeEffect:
    return "(" + predmap_str(p->left) + " \\ " + effect_str(p->effect) + ")";
  }
  return "?";
}

bool predmap_equal(const PredMapPtr &a, const PredMapPtr &b) {
  return predmap_str(a) == predmap_str(b);
}

} // namespace flowlet
