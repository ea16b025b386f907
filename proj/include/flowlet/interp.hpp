#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "flowlet/ast.hpp"

namespace flowlet::interp {

struct NullV {};
struct UndefV {};
struct Loc {
  uint32_t idx = 0;
};

using Value = std::variant<double, std::string, bool, NullV, UndefV, Loc>;

struct Closure {
  std::map<uint32_t, Loc> store; // capture by reference
  std::vector<Ident> params;
  const ast::Stmt *body = nullptr;
  const ast::Expr *ret = nullptr;
};

struct RecordV {
  std::map<std::string, Value> fields;
};

using HeapValue = std::variant<Value, Closure, RecordV>;

enum class StuckKind { NotAFunction, NoSuchField, BadOperand, Arity };

struct Outcome {
  enum class Tag { Value, Stuck, OutOfFuel } tag = Tag::Value;
  Value value = UndefV{};
  StuckKind stuck_kind = StuckKind::NotAFunction;
  Span stuck_span;
  std::string stuck_message;
};

// Runtime truth of a base predicate on a heap value. Field-equality tests are
// total: on non-records they are simply false.
bool eval_base_pred(const HeapValue &hv, const BasePred &p);
bool truthy(const Value &v);

struct Machine;
using MachinePtr = std::unique_ptr<Machine>;

// Small-step execution. The program must be alpha-renamed. At most one rule
// applies to any configuration.
MachinePtr load(const ast::Program &p);
// One reduction; returns false once the machine halted (value or stuck).
bool step(Machine &m);
bool halted(const Machine &m);
Outcome outcome(const Machine &m);

// Machine internals are visible so tests can stage configurations.
struct Frame;
struct Machine {
  const ast::Program *program = nullptr;
  std::vector<HeapValue> heap;
  std::vector<Frame> frames;
  Value last_value = UndefV{};
  bool done = false;
  bool stuck = false;
  StuckKind stuck_kind = StuckKind::NotAFunction;
  Span stuck_span;
  std::string stuck_message;

  Loc alloc(HeapValue hv);
  ~Machine();
  Machine();
  Machine(Machine &&) noexcept;
};

Outcome run_program(const ast::Program &p, uint64_t fuel = 10000);

std::string value_str(const Machine &m, const Value &v);
std::string outcome_str(const Machine &m, const Outcome &o);

} // namespace flowlet::interp
