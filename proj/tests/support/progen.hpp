#pragma once

// Random FlowCore program generator for the solver-equivalence and empirical
// type-safety corpora. Deterministic for a given seed; only % is used on the
// raw engine so streams do not depend on library distribution details.

#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace flowlet::test {

class Progen {
public:
  explicit Progen(uint32_t seed, int budget = 60) : rng_(seed), budget_(budget) {}

  std::string program() {
    std::ostringstream out;
    scopes_.push_back({});
    int stmts = 2 + pick(4);
    for (int i = 0; i < stmts && budget_ > 0; i++) stmt(out, 0);
    scopes_.pop_back();
    return out.str();
  }

private:
  std::mt19937 rng_;
  int budget_;
  int counter_ = 0;
  std::vector<std::vector<std::string>> scopes_;

  int pick(int n) { return static_cast<int>(rng_() % static_cast<uint32_t>(n)); }
  bool chance(int pct) { return pick(100) < pct; }
  std::string fresh() { return "v" + std::to_string(counter_++); }

  bool have_vars() const {
    for (const auto &s : scopes_)
      if (!s.empty()) return true;
    return false;
  }

  std::string any_var() {
    std::vector<const std::string *> all;
    for (const auto &s : scopes_)
      for (const auto &v : s) all.push_back(&v);
    return *all[pick(static_cast<int>(all.size()))];
  }

  std::string field_name() {
    static const char *pool[] = {"kind", "val", "next"};
    return pool[pick(3)];
  }

  std::string tag_value() {
    static const char *pool[] = {"a", "b", "nil"};
    return pool[pick(3)];
  }

  std::string const_expr() {
    budget_--;
    switch (pick(7)) {
    case 0: return std::to_string(pick(10));
    case 1: return "\"" + tag_value() + "\"";
    case 2: return "true";
    case 3: return "false";
    case 4: return "null";
    case 5: return "undefined";
    default: return std::to_string(pick(100));
    }
  }

  std::string record_expr(int depth) {
    budget_ -= 2;
    std::string out = "{kind: \"" + tag_value() + "\"";
    if (depth < 2 && chance(60)) out += ", val: " + expr(depth + 1);
    return out + "}";
  }

  std::string arrow_expr(int depth) {
    budget_ -= 3;
    std::string p = fresh();
    scopes_.push_back({p});
    std::string body = expr(depth + 1);
    scopes_.pop_back();
    // a record body would read as a block; parenthesize like JS requires
    if (!body.empty() && body[0] == '{') body = "(" + body + ")";
    return "(" + p + ") => " + body;
  }

  std::string pred_expr() {
    budget_ -= 2;
    if (!have_vars()) return "true";
    std::string x = any_var();
    switch (pick(6)) {
    case 0: return "typeof " + x + " === \"number\"";
    case 1: return "typeof " + x + " === \"string\"";
    case 2: return "typeof " + x + " === \"function\"";
    case 3: return x + (chance(50) ? " == null" : " != null");
    case 4: return x + "." + field_name() + " === \"" + tag_value() + "\"";
    default: return x;
    }
  }

  std::string expr(int depth) {
    if (budget_ <= 0) return const_expr();
    if (depth > 3) return chance(60) && have_vars() ? (budget_--, any_var()) : const_expr();
    switch (pick(20)) {
    case 0:
    case 1:
    case 2:
    case 3:
    case 4:
      return const_expr();
    case 5:
    case 6:
    case 7:
      if (!have_vars()) return const_expr();
      budget_--;
      return any_var();
    case 8:
    case 9:
      return record_expr(depth);
    case 10:
      return arrow_expr(depth);
    case 11: {
      if (!have_vars()) return const_expr();
      budget_ -= 2;
      return "(" + any_var() + " = " + expr(depth + 1) + ")";
    }
    case 12: {
      budget_ -= 2;
      return "(" + expr(depth + 1) + " || " + expr(depth + 1) + ")";
    }
    case 13: {
      budget_ -= 2;
      return "(" + expr(depth + 1) + " && " + expr(depth + 1) + ")";
    }
    case 14:
      budget_ -= 2;
      return "!(" + pred_expr() + ")";
    case 15:
      return "(" + pred_expr() + ")";
    case 16: {
      if (!have_vars()) return const_expr();
      budget_ -= 2;
      return any_var() + "." + field_name();
    }
    case 17: {
      if (!have_vars()) return const_expr();
      budget_ -= 2;
      return any_var() + "(" + expr(depth + 1) + ")";
    }
    case 18: {
      budget_ -= 2;
      return "(" + expr(depth + 1) + " + " + expr(depth + 1) + ")";
    }
    default: {
      budget_ -= 2;
      return "(" + pick_default(depth) + ")";
    }
    }
  }

  std::string pick_default(int depth) {
    // A guarded field read: the shape refinements exist for.
    if (!have_vars()) return const_expr();
    std::string x = any_var();
    return x + "." + field_name() + " === \"" + tag_value() + "\" && " + x + "." +
           field_name();
  }

  void stmt(std::ostringstream &out, int depth) {
    if (budget_ <= 0) return;
    switch (pick(10)) {
    case 0:
    case 1:
    case 2:
    case 3: {
      std::string name = fresh();
      std::string init = expr(depth);
      scopes_.back().push_back(name);
      budget_ -= 2;
      out << "var " << name << " = " << init << ";\n";
      return;
    }
    case 4:
    case 5: {
      budget_ -= 2;
      out << "if (" << pred_expr() << ") {\n";
      int n = 1 + pick(2);
      for (int i = 0; i < n; i++) stmt(out, depth + 1);
      if (chance(50)) {
        out << "} else {\n";
        stmt(out, depth + 1);
      }
      out << "}\n";
      return;
    }
    case 6: {
      if (!have_vars()) {
        out << expr(depth) << ";\n";
        return;
      }
      budget_ -= 2;
      out << any_var() << " = " << expr(depth) << ";\n";
      return;
    }
    case 7: {
      if (!have_vars()) return;
      budget_ -= 2;
      out << any_var() << "." << field_name() << " = " << expr(depth) << ";\n";
      return;
    }
    default:
      out << expr(depth) << ";\n";
      return;
    }
  }
};

} // namespace flowlet::test
