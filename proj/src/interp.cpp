#include "flowlet/interp.hpp"

#include <cmath>
#include <sstream>

#include "flowlet/rename.hpp"

namespace flowlet::interp {

using ast::Expr;
using ast::ExprKind;
using ast::Stmt;
using ast::StmtKind;

// ---- Predicates at runtime ---------------------------------------------------------

bool truthy(const Value &v) {
  struct V {
    bool operator()(double d) { return d != 0 && !std::isnan(d); }
    bool operator()(const std::string &s) { return !s.empty(); }
    bool operator()(bool b) { return b; }
    bool operator()(NullV) { return false; }
    bool operator()(UndefV) { return false; }
    bool operator()(Loc) { return true; }
  };
  return std::visit(V{}, v);
}

static TypeofKind value_typeof(const HeapValue &hv) {
  if (std::holds_alternative<Closure>(hv)) return TypeofKind::Function;
  if (std::holds_alternative<RecordV>(hv)) return TypeofKind::Object;
  const Value &v = std::get<Value>(hv);
  if (std::holds_alternative<double>(v)) return TypeofKind::Number;
  if (std::holds_alternative<std::string>(v)) return TypeofKind::String;
  if (std::holds_alternative<bool>(v)) return TypeofKind::Boolean;
  if (std::holds_alternative<NullV>(v)) return TypeofKind::Object;
  return TypeofKind::Undefined;
}

bool eval_base_pred(const HeapValue &hv, const BasePred &p) {
  switch (p.tag) {
  case BasePred::Tag::Truthy:
    if (std::holds_alternative<Closure>(hv) || std::holds_alternative<RecordV>(hv))
      return true;
    return truthy(std::get<Value>(hv));
  case BasePred::Tag::Falsy:
    return !eval_base_pred(hv, BasePred::truthy());
  case BasePred::Tag::Nullish: {
    const Value *v = std::get_if<Value>(&hv);
    return v && (std::holds_alternative<NullV>(*v) || std::holds_alternative<UndefV>(*v));
  }
  case BasePred::Tag::TypeofIs:
    return value_typeof(hv) == p.typeof_kind;
  case BasePred::Tag::FieldEq: {
    const RecordV *r = std::get_if<RecordV>(&hv);
    if (!r) return false;
    auto it = r->fields.find(p.field);
    if (it == r->fields.end()) return false;
    const std::string *s = std::get_if<std::string>(&it->second);
    return s && *s == p.value;
  }
  }
  return false;
}

// ---- Machine -----------------------------------------------------------------------

namespace {

struct StmtDone {};
using Control = std::variant<const Expr *, const Stmt *, Value, StmtDone>;

struct KSeq { const Stmt *next; };
struct KAssign { Ident target; Span span; bool is_decl; };
struct KCallee { const Expr *call; };
struct KArgs { Value fn; std::vector<Value> done; const Expr *call; };
struct KIf { const Stmt *then_s; const Stmt *else_s; };
struct KAnd { const Expr *rhs; };
struct KOr { const Expr *rhs; };
struct KNot {};
struct KRecord { const Expr *record; std::vector<Value> done; };
struct KGet { std::string field; Span span; };
struct KSetObj { const Expr *rhs; std::string field; Span span; };
struct KSetVal { Value obj; std::string field; Span span; };
struct KBinL { const Expr *rhs; Span span; };
struct KBinR { Value lhs; Span span; };
struct KExprStmt {};
struct KBodyRet { const Expr *ret; };
struct KReturn {};
struct KProgram { size_t next; };

using Kont = std::variant<KSeq, KAssign, KCallee, KArgs, KIf, KAnd, KOr, KNot,
                          KRecord, KGet, KSetObj, KSetVal, KBinL, KBinR,
                          KExprStmt, KBodyRet, KReturn, KProgram>;

} // namespace

struct Frame {
  std::map<uint32_t, Loc> store;
  std::vector<Kont> konts;
  Control control = StmtDone{};
};

Machine::Machine() = default;
Machine::~Machine() = default;
Machine::Machine(Machine &&) noexcept = default;

Loc Machine::alloc(HeapValue hv) {
  heap.push_back(std::move(hv));
  return Loc{static_cast<uint32_t>(heap.size() - 1)};
}

MachinePtr load(const ast::Program &p) {
  auto m = std::make_unique<Machine>();
  m->program = &p;
  Frame top;
  for (const Ident &id : locals(p.statements)) {
    Loc l = m->alloc(Value{UndefV{}});
    top.store[id.uid] = l;
  }
  top.konts.push_back(KProgram{0});
  top.control = StmtDone{};
  m->frames.push_back(std::move(top));
  return m;
}

bool halted(const Machine &m) { return m.done || m.stuck; }

namespace {

void go_stuck(Machine &m, StuckKind k, Span sp, std::string msg) {
  m.stuck = true;
  m.stuck_kind = k;
  m.stuck_span = sp;
  m.stuck_message = std::move(msg);
}

const HeapValue &deref(const Machine &m, Loc l) { return m.heap[l.idx]; }

// Variable cell: one indirection through the store, then the heap.
bool var_cell(Frame &f, const Ident &id, Loc &out) {
  auto it = f.store.find(id.uid);
  if (it == f.store.end()) return false;
  out = it->second;
  return true;
}

void finish_value(Machine &m, Value v);

// Applies the top continuation to a value.
void apply_kont(Machine &m, Value v) {
  Frame &f = m.frames.back();
  Kont k = std::move(f.konts.back());
  f.konts.pop_back();

  if (auto *ks = std::get_if<KExprStmt>(&k)) {
    (void)ks;
    m.last_value = v;
    f.control = StmtDone{};
    return;
  }
  if (auto *ka = std::get_if<KAssign>(&k)) {
    Loc cell;
    if (!var_cell(f, ka->target, cell)) {
      go_stuck(m, StuckKind::BadOperand, ka->span, "unbound variable " + ka->target.text);
      return;
    }
    m.heap[cell.idx] = Value{v};
    if (ka->is_decl) {
      f.control = StmtDone{};
    } else {
      f.control = Value{v};
    }
    return;
  }
  if (auto *kc = std::get_if<KCallee>(&k)) {
    const Expr *call = kc->call;
    if (call->args.empty()) {
      f.control = Value{v}; // placeholder; replaced by apply below
      f.konts.push_back(KArgs{v, {}, call});
      apply_kont(m, Value{UndefV{}}); // no args: applied immediately
      return;
    }
    f.konts.push_back(KArgs{v, {}, call});
    f.control = call->args[0].get();
    return;
  }
  if (auto *kg = std::get_if<KArgs>(&k)) {
    const Expr *call = kg->call;
    std::vector<Value> done = std::move(kg->done);
    if (!call->args.empty()) done.push_back(v);
    if (done.size() < call->args.size()) {
      const Expr *next = call->args[done.size()].get();
      f.konts.push_back(KArgs{kg->fn, std::move(done), call});
      f.control = next;
      return;
    }
    // Apply. Allocation below may grow the heap, so take the closure by value.
    const Loc *fl = std::get_if<Loc>(&kg->fn);
    const Closure *clo_ref = fl ? std::get_if<Closure>(&deref(m, *fl)) : nullptr;
    if (!clo_ref) {
      go_stuck(m, StuckKind::NotAFunction, call->span, "callee is not a function");
      return;
    }
    Closure clo = *clo_ref;
    if (clo.params.size() != done.size()) {
      go_stuck(m, StuckKind::Arity, call->span, "wrong number of arguments");
      return;
    }
    Frame callee;
    callee.store = clo.store;
    for (size_t i = 0; i < clo.params.size(); i++) {
      Loc cell = m.alloc(Value{done[i]});
      callee.store[clo.params[i].uid] = cell;
    }
    for (const Ident &id : locals(*clo.body)) {
      Loc cell = m.alloc(Value{UndefV{}});
      callee.store[id.uid] = cell;
    }
    callee.konts.push_back(KBodyRet{clo.ret});
    callee.control = clo.body;
    m.frames.push_back(std::move(callee));
    return;
  }
  if (auto *ki = std::get_if<KIf>(&k)) {
    f.control = truthy(v) ? ki->then_s : ki->else_s;
    return;
  }
  if (auto *kn = std::get_if<KAnd>(&k)) {
    if (truthy(v)) {
      f.control = kn->rhs;
    } else {
      f.control = Value{v};
    }
    return;
  }
  if (auto *ko = std::get_if<KOr>(&k)) {
    if (truthy(v)) {
      f.control = Value{v};
    } else {
      f.control = ko->rhs;
    }
    return;
  }
  if (std::get_if<KNot>(&k)) {
    f.control = Value{!truthy(v)};
    return;
  }
  if (auto *kr = std::get_if<KRecord>(&k)) {
    const Expr *rec = kr->record;
    std::vector<Value> done = std::move(kr->done);
    done.push_back(v);
    if (done.size() < rec->fields.size()) {
      const Expr *next = rec->fields[done.size()].init.get();
      f.konts.push_back(KRecord{rec, std::move(done)});
      f.control = next;
      return;
    }
    RecordV r;
    for (size_t i = 0; i < done.size(); i++) r.fields[rec->fields[i].name] = done[i];
    f.control = Value{m.alloc(std::move(r))};
    return;
  }
  if (auto *kget = std::get_if<KGet>(&k)) {
    const Loc *l = std::get_if<Loc>(&v);
    const RecordV *r = l ? std::get_if<RecordV>(&deref(m, *l)) : nullptr;
    if (!r) {
      go_stuck(m, StuckKind::NoSuchField, kget->span,
               "field '" + kget->field + "' read on a non-record");
      return;
    }
    auto it = r->fields.find(kget->field);
    if (it == r->fields.end()) {
      go_stuck(m, StuckKind::NoSuchField, kget->span,
               "record has no field '" + kget->field + "'");
      return;
    }
    f.control = Value{it->second};
    return;
  }
  if (auto *kso = std::get_if<KSetObj>(&k)) {
    f.konts.push_back(KSetVal{v, kso->field, kso->span});
    f.control = kso->rhs;
    return;
  }
  if (auto *ksv = std::get_if<KSetVal>(&k)) {
    const Loc *l = std::get_if<Loc>(&ksv->obj);
    RecordV *r = l ? std::get_if<RecordV>(&m.heap[l->idx]) : nullptr;
    if (!r) {
      go_stuck(m, StuckKind::NoSuchField, ksv->span,
               "field '" + ksv->field + "' written on a non-record");
      return;
    }
    auto it = r->fields.find(ksv->field);
    if (it == r->fields.end()) {
      go_stuck(m, StuckKind::NoSuchField, ksv->span,
               "record has no field '" + ksv->field + "'");
      return;
    }
    it->second = v;
    f.control = Value{v};
    return;
  }
  if (auto *kbl = std::get_if<KBinL>(&k)) {
    f.konts.push_back(KBinR{v, kbl->span});
    f.control = kbl->rhs;
    return;
  }
  if (auto *kbr = std::get_if<KBinR>(&k)) {
    const double *ln = std::get_if<double>(&kbr->lhs);
    const double *rn = std::get_if<double>(&v);
    if (ln && rn) {
      f.control = Value{*ln + *rn};
      return;
    }
    const std::string *ls = std::get_if<std::string>(&kbr->lhs);
    const std::string *rs = std::get_if<std::string>(&v);
    if (ls && rs) {
      f.control = Value{*ls + *rs};
      return;
    }
    go_stuck(m, StuckKind::BadOperand, kbr->span, "'+' needs two numbers or two strings");
    return;
  }
  if (std::get_if<KBodyRet>(&k)) {
    // Only reachable when a body's value sneaks out; the StmtDone path
    // handles the normal case.
    finish_value(m, v);
    return;
  }
  if (std::get_if<KReturn>(&k)) {
    m.frames.pop_back();
    if (m.frames.empty()) {
      m.done = true;
      m.last_value = v;
      return;
    }
    m.frames.back().control = Value{v};
    return;
  }
  if (std::get_if<KProgram>(&k)) {
    // Values do not reach the program walker.
    f.konts.push_back(k);
    f.control = StmtDone{};
    return;
  }
}

void finish_value(Machine &m, Value v) {
  Frame &f = m.frames.back();
  if (f.konts.empty()) {
    m.done = true;
    m.last_value = v;
    return;
  }
  apply_kont(m, v);
}

void step_stmt_done(Machine &m) {
  Frame &f = m.frames.back();
  if (f.konts.empty()) {
    m.done = true;
    return;
  }
  Kont k = std::move(f.konts.back());
  f.konts.pop_back();
  if (auto *ks = std::get_if<KSeq>(&k)) {
    f.control = ks->next;
    return;
  }
  if (auto *kp = std::get_if<KProgram>(&k)) {
    const auto &stmts = m.program->statements;
    if (kp->next >= stmts.size()) {
      m.done = true;
      return;
    }
    f.konts.push_back(KProgram{kp->next + 1});
    f.control = stmts[kp->next].get();
    return;
  }
  if (auto *kb = std::get_if<KBodyRet>(&k)) {
    f.konts.push_back(KReturn{});
    f.control = kb->ret;
    return;
  }
  // Other continuations never receive a bare statement completion.
  step_stmt_done(m);
}

void step_expr(Machine &m, const Expr *e) {
  Frame &f = m.frames.back();
  switch (e->kind) {
  case ExprKind::Const:
    switch (e->const_kind) {
    case ast::ConstKind::Num: f.control = Value{e->num_value}; break;
    case ast::ConstKind::Str: f.control = Value{e->lexeme}; break;
    case ast::ConstKind::Bool: f.control = Value{e->lexeme == "true"}; break;
    case ast::ConstKind::Null: f.control = Value{NullV{}}; break;
    case ast::ConstKind::Undefined: f.control = Value{UndefV{}}; break;
    }
    return;
  case ExprKind::Var: {
    Loc cell;
    if (!var_cell(f, e->ident, cell)) {
      go_stuck(m, StuckKind::BadOperand, e->span, "unbound variable " + e->ident.text);
      return;
    }
    f.control = Value{std::get<Value>(deref(m, cell))};
    return;
  }
  case ExprKind::Assign:
    f.konts.push_back(KAssign{e->ident, e->span, false});
    f.control = e->lhs.get();
    return;
  case ExprKind::Arrow: {
    Closure clo;
    clo.store = f.store;
    for (const auto &p : e->params) clo.params.push_back(p.name);
    clo.body = e->body.get();
    clo.ret = e->ret.get();
    f.control = Value{m.alloc(std::move(clo))};
    return;
  }
  case ExprKind::Call:
    f.konts.push_back(KCallee{e});
    f.control = e->lhs.get();
    return;
  case ExprKind::Record:
    if (e->fields.empty()) {
      f.control = Value{m.alloc(RecordV{})};
      return;
    }
    f.konts.push_back(KRecord{e, {}});
    f.control = e->fields[0].init.get();
    return;
  case ExprKind::FieldRead:
    f.konts.push_back(KGet{e->field, e->span});
    f.control = e->lhs.get();
    return;
  case ExprKind::FieldWrite:
    f.konts.push_back(KSetObj{e->rhs.get(), e->field, e->span});
    f.control = e->lhs.get();
    return;
  case ExprKind::PredTest: {
    Loc cell;
    if (!var_cell(f, e->ident, cell)) {
      go_stuck(m, StuckKind::BadOperand, e->span, "unbound variable " + e->ident.text);
      return;
    }
    Value v = std::get<Value>(deref(m, cell));
    const HeapValue *hv;
    HeapValue boxed = Value{v};
    if (const Loc *l = std::get_if<Loc>(&v)) hv = &deref(m, *l);
    else hv = &boxed;
    f.control = Value{eval_base_pred(*hv, e->pred)};
    return;
  }
  case ExprKind::And:
    f.konts.push_back(KAnd{e->rhs.get()});
    f.control = e->lhs.get();
    return;
  case ExprKind::Or:
    f.konts.push_back(KOr{e->rhs.get()});
    f.control = e->lhs.get();
    return;
  case ExprKind::Not:
    f.konts.push_back(KNot{});
    f.control = e->lhs.get();
    return;
  case ExprKind::BinOp:
    f.konts.push_back(KBinL{e->rhs.get(), e->span});
    f.control = e->lhs.get();
    return;
  case ExprKind::Require:
    // Programs under the oracle are single files; an import evaluates to
    // undefined rather than halting the run.
    f.control = Value{UndefV{}};
    return;
  }
}

void step_stmt(Machine &m, const Stmt *s) {
  Frame &f = m.frames.back();
  switch (s->kind) {
  case StmtKind::Expr:
  case StmtKind::Export:
    f.konts.push_back(KExprStmt{});
    f.control = s->expr.get();
    return;
  case StmtKind::VarDecl:
    f.konts.push_back(KAssign{s->ident, s->span, true});
    f.control = s->expr.get();
    return;
  case StmtKind::If:
    f.konts.push_back(KIf{s->a.get(), s->b.get()});
    f.control = s->expr.get();
    return;
  case StmtKind::Seq:
    f.konts.push_back(KSeq{s->b.get()});
    f.control = s->a.get();
    return;
  case StmtKind::Skip:
    f.control = StmtDone{};
    return;
  case StmtKind::Return:
    go_stuck(m, StuckKind::BadOperand, s->span, "return outside of a function body");
    return;
  }
}

} // namespace

bool step(Machine &m) {
  if (halted(m)) return false;
  if (m.frames.empty()) {
    m.done = true;
    return false;
  }
  Frame &f = m.frames.back();
  Control c = f.control;
  if (const Expr *const *e = std::get_if<const Expr *>(&c)) {
    step_expr(m, *e);
  } else if (const Stmt *const *s = std::get_if<const Stmt *>(&c)) {
    step_stmt(m, *s);
  } else if (Value *v = std::get_if<Value>(&c)) {
    finish_value(m, *v);
  } else {
    step_stmt_done(m);
  }
  return !halted(m);
}

Outcome outcome(const Machine &m) {
  Outcome o;
  if (m.stuck) {
    o.tag = Outcome::Tag::Stuck;
    o.stuck_kind = m.stuck_kind;
    o.stuck_span = m.stuck_span;
    o.stuck_message = m.stuck_message;
    return o;
  }
  o.tag = m.done ? Outcome::Tag::Value : Outcome::Tag::OutOfFuel;
  o.value = m.last_value;
  return o;
}

Outcome run_program(const ast::Program &p, uint64_t fuel) {
  MachinePtr m = load(p);
  for (uint64_t i = 0; i < fuel && !halted(*m); i++) step(*m);
  if (!halted(*m)) {
    Outcome o;
    o.tag = Outcome::Tag::OutOfFuel;
    return o;
  }
  return outcome(*m);
}

// ---- Rendering ------------------------------------------------------------------------

std::string value_str(const Machine &m, const Value &v) {
  struct V {
    const Machine &m;
    std::string operator()(double d) {
      std::ostringstream os;
      os << d;
      return os.str();
    }
    std::string operator()(const std::string &s) { return "\"" + s + "\""; }
    std::string operator()(bool b) { return b ? "true" : "false"; }
    std::string operator()(NullV) { return "null"; }
    std::string operator()(UndefV) { return "undefined"; }
    std::string operator()(Loc l) {
      const HeapValue &hv = m.heap[l.idx];
      if (std::holds_alternative<Closure>(hv)) return "<function>";
      if (const RecordV *r = std::get_if<RecordV>(&hv)) {
        std::string s = "{";
        bool first = true;
        for (const auto &[f, fv] : r->fields) {
          if (!first) s += ", ";
          first = false;
          s += f + ": " + value_str(m, fv);
        }
        return s + "}";
      }
      return value_str(m, std::get<Value>(hv));
    }
  };
  return std::visit(V{m}, v);
}

std::string outcome_str(const Machine &m, const Outcome &o) {
  switch (o.tag) {
  case Outcome::Tag::Value: return "value: " + value_str(m, o.value);
  case Outcome::Tag::OutOfFuel: return "out-of-fuel";
  case Outcome::Tag::Stuck:
    return "stuck: " + o.stuck_message + " at " + span_str(o.stuck_span);
  }
  return "?";
}

} // namespace flowlet::interp
