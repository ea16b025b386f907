#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "flowlet/diag.hpp"
#include "flowlet/types.hpp"

namespace flowlet {

enum class InconsistencyReason {
  NotAFunction,
  MissingField,
  NotARecord,
  ArityMismatch,
  ArithMismatch,
  IncompatibleWrite,
  AnnotationMismatch,
};

const char *reason_str(InconsistencyReason r);
ErrorCode reason_code(InconsistencyReason r);

struct Inconsistency {
  TypeLit lhs;
  TypeUse use;
  InconsistencyReason reason;
  std::string field;  // MissingField
  Span lhs_origin;    // where the offending lower bound was born
  Span lhs_hop;       // last flow step it took
  Span use_span;      // where the use lives
};

// Key for order-independent multiset comparison; type variable identities are
// erased so two closures of the same program can be compared after renaming.
std::string inconsistency_key(const Inconsistency &inc);

struct AmbiguityError {
  AnnotPtr annot;
  Span span;       // where the ambiguous value arrived
  Span origin;     // where it was defined
  std::vector<Span> implicated; // declarations needing annotations
};

struct TypeLowerBound {
  TypeLit lit;
  Span origin;
  Span hop;
};

struct TypeUpperBound {
  TypeUse use;
  Span span;
};

struct EffectLowerBound {
  Ident id;
  Span origin;
};

struct EffectUpperBound {
  EffectUse use;
  Span span;
};

// Union-find constraint graph kept closed under propagation at all times.
// Inconsistent flows are logged, never fatal. A graph is confined to one
// checking task; distinct graphs may run on distinct threads freely.
class ConstraintGraph {
public:
  ConstraintGraph() = default;

  // Turning refinements off makes every predicate use a pass-through.
  void set_refinements(bool on) { refinements_ = on; }
  bool refinements() const { return refinements_; }

  TypeVar fresh_type_var(Span provenance = {});
  EffectVar fresh_effect_var(Span provenance = {});

  // Grows the id space so constraints minted elsewhere can be replayed.
  void reserve_vars(uint32_t count);

  // The one effect variable absorbing effects of functions that escape
  // through annotations or module signatures.
  EffectVar escape_var();

  Span var_span(uint32_t id) const;
  void note_param_annotation(TypeVar v, AnnotPtr a);
  AnnotPtr param_annotation(TypeVar v) const; // by class representative

  void add(const TypeConstraint &c);
  void add(const EffectConstraint &c);
  void add(const Constraint &c);

  void unify(uint32_t a, uint32_t b);
  uint32_t find(uint32_t id) const;

  std::vector<TypeLowerBound> lowers_of(TypeVar v) const;
  std::vector<TypeUpperBound> uppers_of(TypeVar v) const;
  std::vector<EffectLowerBound> effect_lowers_of(EffectVar v) const;

  const std::vector<Inconsistency> &inconsistencies() const { return incons_; }
  const std::vector<AmbiguityError> &ambiguities() const { return ambiguities_; }

  // Sorted by provenance span, then reason.
  std::vector<Inconsistency> consistency_errors() const;

  uint32_t var_count() const { return next_id_; }

  std::string dump_dot() const;

  // Inserts lb <= (a as a use).
  void check_annotation(const TypePtr &lb, const AnnotPtr &a, Span lb_span,
                        Span use_span);

  // A value type for a source annotation: fresh variables are allocated for
  // record fields and arrow parameters with the annotation enforced on them.
  TypePtr materialize_annot(const AnnotPtr &a, Span span);

  struct Speculation {
    bool ambiguous = false;
    int branch = -1;                    // 0 = left annotation, 1 = right
    std::vector<std::string> constraints; // canonical, chosen branch
    std::vector<TypeVar> condition_vars;  // implicated on ambiguity
  };

  // Restricted-propagation trial of lb against both sides of a union
  // annotation. Never mutates the graph.
  Speculation speculate_union(const TypeLit &lb, Span lb_origin, Span lb_hop,
                              const AnnotPtr &left, const AnnotPtr &right) const;

private:
  struct Class {
    std::vector<TypeLowerBound> tlowers;
    std::vector<TypeUpperBound> tuppers;
    std::vector<EffectLowerBound> elowers;
    std::vector<EffectUpperBound> euppers;
    struct Watcher {
      TypeLit pattern;
      std::vector<std::string> path; // record fields / "->ret" / "|l" / "|r"
      UsePred use;
      Span origin, hop, use_span;
    };
    std::vector<Watcher> watchers;
  };

  struct PendingPair {
    TypeLit lit;
    Span origin, hop;
    TypeUse use;
    Span use_span;
  };
  struct PendingEffPair {
    Ident id;
    Span origin;
    EffectUse use;
    Span use_span;
  };
  using WorkItem =
      std::variant<TypeConstraint, EffectConstraint, PendingPair, PendingEffPair>;

  uint32_t alloc(Span sp);
  Class &cls(uint32_t rep);
  const Class *cls_if(uint32_t rep) const;

  void enqueue(WorkItem w);
  void drain();
  void process(const TypeConstraint &c);
  void process(const EffectConstraint &c);
  void pair_lit_use(const TypeLit &lit, Span origin, Span hop,
                    const TypeUse &use, Span use_span);
  void pair_eff_use(const Ident &id, Span origin, const EffectUse &use,
                    Span use_span);
  void insert_lower(uint32_t rep, const TypeLit &lit, Span origin, Span hop);
  void insert_upper(uint32_t rep, const TypeUse &use, Span span);
  void insert_eff_lower(uint32_t rep, const Ident &id, Span origin);
  void insert_eff_upper(uint32_t rep, const EffectUse &use, Span span);
  void register_watchers(const TypeLit &lit, Span origin, Span hop,
                         const UsePred &use, Span use_span);
  void fire_watcher(const Class::Watcher &w, const TypeLit &arrived,
                    Span arrived_origin);
  void requeue_class(uint32_t rep);
  void report(InconsistencyReason r, const TypeLit &lhs, const TypeUse &use,
              std::string field, Span lhs_origin, Span lhs_hop, Span use_span);

  void handle_annot_use(const TypeLit &lit, Span origin, Span hop,
                        const AnnotPtr &a, Span use_span);
  static std::string span_key_for(const Span &s);

  bool refinements_ = true;
  uint32_t next_id_ = 0;
  std::optional<EffectVar> escape_;
  mutable std::vector<uint32_t> parent_;
  std::vector<Span> spans_;
  std::map<uint32_t, Class> classes_;
  std::map<uint32_t, AnnotPtr> param_annots_;
  std::deque<WorkItem> queue_;
  bool draining_ = false;
  std::unordered_set<std::string> seen_;
  std::vector<Inconsistency> incons_;
  std::vector<AmbiguityError> ambiguities_;
  int speculation_depth_ = 0;
};

// Whether a literal passes a predicate by inspecting its top-level
// constructor (or a field, for field-equality tests). Conservative where the
// literal leaves room: a plain `num` passes both truthy and falsy.
bool check_pred(const TypeLit &l, const Predicate &q);

// Whether a value of literal type `incoming` fits a pinned literal
// (singletons subsume into their base kind).
bool lit_subsumes(const TypeLit &pinned, const TypeLit &incoming);

} // namespace flowlet
