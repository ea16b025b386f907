#include "flowlet/env.hpp"

namespace flowlet {

const EnvEntry *Env::lookup(const Ident &id) const {
  auto it = entries_.find(id.uid);
  return it == entries_.end() ? nullptr : &it->second;
}

void Env::extend(Ident id, TypePtr specific, TypeVar general) {
  auto [it, inserted] =
      entries_.emplace(id.uid, EnvEntry{std::move(id), std::move(specific), general});
  if (!inserted)
    throw std::logic_error("environment extension over a bound name: " + it->second.id.text);
}

void Env::update(const Ident &id, TypePtr specific) {
  auto it = entries_.find(id.uid);
  if (it == entries_.end())
    throw std::logic_error("environment update of an unbound name: " + id.text);
  it->second.specific = std::move(specific);
}

bool operator==(const Env &a, const Env &b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  auto ia = a.entries_.begin();
  auto ib = b.entries_.begin();
  for (; ia != a.entries_.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (ia->second.general != ib->second.general) return false;
    if (!type_equal(ia->second.specific, ib->second.specific)) return false;
  }
  return true;
}

Env join_env(const Env &a, const Env &b) {
  if (a.size() != b.size()) throw JoinError(JoinError::Kind::DomainMismatch);
  Env out;
  auto ib = b.begin();
  for (auto ia = a.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) throw JoinError(JoinError::Kind::DomainMismatch);
    const EnvEntry &ea = ia->second;
    const EnvEntry &eb = ib->second;
    if (ea.general != eb.general) throw JoinError(JoinError::Kind::GeneralVarMismatch);
    TypePtr joined = type_equal(ea.specific, eb.specific)
                         ? ea.specific
                         : t_join(ea.specific, eb.specific);
    out.extend(ea.id, std::move(joined), ea.general);
  }
  return out;
}

} // namespace flowlet
