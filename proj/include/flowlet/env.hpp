#pragma once

#include <map>
#include <stdexcept>

#include "flowlet/types.hpp"

namespace flowlet {

// Flow-sensitive typing environment. `specific` tracks the most recent
// assignment; `general` is the one variable summarizing every assignment the
// binding will ever see, and never changes across updates.
struct EnvEntry {
  Ident id;
  TypePtr specific;
  TypeVar general;
};

struct JoinError : std::runtime_error {
  enum class Kind { DomainMismatch, GeneralVarMismatch } kind;
  explicit JoinError(Kind k)
      : std::runtime_error(k == Kind::DomainMismatch ? "environment domains differ"
                                                     : "general variables differ"),
        kind(k) {}
};

class Env {
public:
  const EnvEntry *lookup(const Ident &id) const;

  // Extension requires the id absent; update requires it present.
  void extend(Ident id, TypePtr specific, TypeVar general);
  void update(const Ident &id, TypePtr specific);

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const Env &a, const Env &b);

private:
  // Keyed by uid; iteration order is deterministic.
  std::map<uint32_t, EnvEntry> entries_;
};

// Entry-wise least upper bound. Both environments must have the same domain
// and agree on general variables; equal specific types are not joined twice.
Env join_env(const Env &a, const Env &b);

} // namespace flowlet
