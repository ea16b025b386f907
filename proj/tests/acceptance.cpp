// Acceptance suite: one pass/fail line per criterion. Soft targets are
// reported but do not fail the run; everything else does.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <set>
#include <thread>

#include "support/helpers.hpp"
#include "support/progen.hpp"

#include "flowlet/check.hpp"
#include "flowlet/interp.hpp"
#include "flowlet/naive.hpp"
#include "flowlet/server.hpp"

using namespace flowlet;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(const std::string &name, bool pass, const std::string &detail,
             bool soft = false) {
  std::string tag = pass ? "PASS" : (soft ? "FAIL (soft)" : "FAIL");
  std::printf("criterion %-3s %-11s %s\n", name.c_str(), tag.c_str(), detail.c_str());
  if (!pass && !soft) failures++;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const std::string kClassics = std::string(FLOWLET_TESTS_DIR) + "/corpus/classics";

std::vector<ErrorReport> errors_in(const BatchResult &r, const std::string &suffix) {
  std::vector<ErrorReport> out;
  for (const auto &e : r.errors)
    if (e.file.size() >= suffix.size() &&
        e.file.compare(e.file.size() - suffix.size(), suffix.size(), suffix) == 0)
      out.push_back(e);
  return out;
}

// ---- 1: regression corpus -----------------------------------------------------

void criterion1() {
  auto start = Clock::now();
  RealFileSystem fs;
  CheckOptions opts;
  opts.workers = 1;
  BatchResult r = check_root(fs, kClassics, opts);
  double elapsed = seconds_since(start);

  bool ok = r.file_count == 6;
  ok = ok && errors_in(r, "pipe_ok.fc").empty();
  ok = ok && errors_in(r, "pipe_guarded.fc").empty();
  ok = ok && errors_in(r, "sum.fc").empty();
  ok = ok && errors_in(r, "merge.fc").empty();
  auto pipe_bad = errors_in(r, "pipe_bad.fc");
  auto havoc = errors_in(r, "havoc.fc");
  ok = ok && pipe_bad.size() == 1 && pipe_bad[0].code == ErrorCode::NotAFunction;
  ok = ok && havoc.size() == 1 && havoc[0].code == ErrorCode::NotARecord;
  // the havoc error anchors at the x.kind read
  ok = ok && havoc.size() == 1 && havoc[0].span.line == 6;
  ok = ok && r.errors.size() == 2;
  bool fast = elapsed < 1.0;
  char buf[128];
  std::snprintf(buf, sizeof buf, "6 checks, %zu errors, %.2fs", r.errors.size(), elapsed);
  verdict("1", ok && fast, buf);
}

// ---- 2: worked-example closure ----------------------------------------------------

void criterion2() {
  auto slurp = [](const std::string &path) {
    RealFileSystem fs;
    return *fs.read(path);
  };
  UnitCheck havoc = check_source(slurp(kClassics + "/havoc.fc"), "havoc.fc");
  NaiveResult closure = naive_close(havoc.gen_log);
  bool found_null_get = false;
  for (const auto &c : closure.closure) {
    const auto *tc = std::get_if<TypeConstraint>(&c);
    if (!tc) continue;
    const auto *get = std::get_if<UseGet>(&tc->use);
    if (!get || get->field != "kind") continue;
    const TypeLit *lit = tc->lhs->as_lit();
    if (lit && lit->as_base() && lit->as_base()->kind == BaseKind::Null)
      found_null_get = true;
  }
  UnitCheck merge = check_source(slurp(kClassics + "/merge.fc"), "merge.fc");
  bool merge_clean = merge.graph->consistency_errors().empty() &&
                     naive_close(merge.gen_log).inconsistencies.empty();
  verdict("2", found_null_get && merge_clean,
          std::string("havoc closure has null <= get(kind, _): ") +
              (found_null_get ? "yes" : "no") +
              "; merge closed consistent: " + (merge_clean ? "yes" : "no"));
}

// ---- 3: refinement ablation ----------------------------------------------------------

void criterion3() {
  RealFileSystem fs;
  CheckOptions on;
  on.workers = 1;
  CheckOptions off = on;
  off.refinements = false;
  BatchResult with_ref = check_root(fs, kClassics, on);
  BatchResult without = check_root(fs, kClassics, off);
  size_t sum_off = errors_in(without, "sum.fc").size();
  size_t merge_off = errors_in(without, "merge.fc").size();
  bool ok = sum_off >= 1 && merge_off >= 1 && errors_in(with_ref, "sum.fc").empty() &&
            errors_in(with_ref, "merge.fc").empty();
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "spurious errors without refinements: sum %zu, merge %zu (on: 0, 0)",
                sum_off, merge_off);
  verdict("3", ok, buf);
}

// ---- 4: union disambiguation -----------------------------------------------------------

void criterion4() {
  const char *left = "type IDString = (string) => string;\n"
                     "type IDNullableString = (?string) => ?string;\n"
                     "type Ambiguous = IDString | IDNullableString;\n"
                     "function onString(f: Ambiguous) { f(\"\"); }\n"
                     "var id = (x) => x;\n"
                     "onString(id);\n"
                     "id(null);\n";
  const char *right = "type Correlated = { type: \"string\", val: string }\n"
                      "  | { type: \"number\", val: number };\n"
                      "function stringIsString(x: Correlated) {\n"
                      "  if (x.type === \"string\") {\n"
                      "    x.val;\n"
                      "  }\n"
                      "}\n"
                      "stringIsString({ type: \"string\", val: 0 });\n";
  UnitCheck l = check_source(left, "left.fc");
  bool amb_at_call = false;
  for (const auto &e : l.errors)
    if (e.code == ErrorCode::AmbiguousUnion && e.span.line == 6) amb_at_call = true;
  UnitCheck r = check_source(right, "right.fc");
  bool err_at_call = false;
  for (const auto &e : r.errors)
    if (e.code == ErrorCode::AnnotationMismatch && e.span.line == 8) err_at_call = true;
  verdict("4", amb_at_call && err_at_call,
          std::string("ambiguity at onString(id): ") + (amb_at_call ? "yes" : "no") +
              "; correlated union rejected at the call: " + (err_at_call ? "yes" : "no"));
}

// ---- 5: solver equivalence ---------------------------------------------------------------

void criterion5() {
  auto start = Clock::now();
  int compared = 0, inconsistent = 0, mismatches = 0;
  uint32_t seed = 30000;
  while (compared < 200 && seed < 40000) {
    flowlet::test::Progen gen(seed++, 18);
    std::string src = gen.program();
    ParseResult pr = parse(src, "g");
    if (!pr.ok()) continue;
    if (flowlet::test::count_nodes(*pr.program) > 30) continue;
    UnitCheck u = check_source(src, "g");
    if (!u.parse_ok) continue;
    NaiveResult naive = naive_close(u.gen_log);
    if (naive.diverged) continue;
    compared++;
    std::multiset<std::string> fast, slow;
    for (const auto &i : u.graph->inconsistencies()) fast.insert(inconsistency_key(i));
    for (const auto &i : naive.inconsistencies) slow.insert(inconsistency_key(i));
    if (fast != slow) mismatches++;
    if (!fast.empty()) inconsistent++;
  }
  double elapsed = seconds_since(start);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%d programs (%d with errors), %d verdict/multiset mismatches, %.1fs",
                compared, inconsistent, mismatches, elapsed);
  verdict("5", compared == 200 && mismatches == 0 && elapsed < 60.0, buf);
}

// ---- 6: empirical type safety --------------------------------------------------------------

void criterion6() {
  int consistent = 0, stuck = 0, attempts = 0;
  uint32_t seed = 50000;
  std::string first_stuck;
  while (consistent < 500 && attempts < 8000) {
    attempts++;
    flowlet::test::Progen gen(seed++, 50);
    std::string src = gen.program();
    UnitCheck u = check_source(src, "g");
    if (!u.parse_ok || !u.errors.empty()) continue;
    consistent++;
    interp::Outcome o = interp::run_program(*u.program, 10000);
    if (o.tag == interp::Outcome::Tag::Stuck) {
      stuck++;
      if (first_stuck.empty()) first_stuck = o.stuck_message + "\n" + src;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%d consistent programs of %d generated, %d stuck (release-blocking)",
                consistent, attempts, stuck);
  verdict("6", consistent >= 500 && stuck == 0, buf);
  if (stuck) std::cout << "  first stuck case:\n" << first_stuck << "\n";
}

// ---- 7: incrementality -----------------------------------------------------------------------

void criterion7() {
  MemFileSystem fs;
  fs.put("a.fc", "var local = 1 + 1;\nmodule.exports = {tag: \"a\", val: local};\n");
  fs.put("b.fc", "var a = require(\"./a\");\nmodule.exports = {tag: \"b\", inner: a};\n");
  fs.put("c.fc", "var b = require(\"./b\");\nb.inner;\nmodule.exports = {tag: \"c\"};\n");
  CheckOptions opts;
  Server s(fs, ".", opts);
  s.init();
  fs.put("a.fc", "var local = 2 + 5;\nmodule.exports = {tag: \"a\", val: local};\n");
  ChangeSet body;
  body.modified = {"a.fc"};
  bool body_only = s.apply_changes(body).rechecked == std::vector<std::string>{"a.fc"};

  fs.put("a.fc", "module.exports = {tag: \"a\", val: \"str-now\"};\n");
  ChangeSet sig_edit;
  sig_edit.modified = {"a.fc"};
  bool cone = s.apply_changes(sig_edit).rechecked ==
              std::vector<std::string>{"a.fc", "b.fc", "c.fc"};

  // randomized sequences over a 20-file dag
  std::mt19937 rng(99);
  MemFileSystem rfs;
  const int n = 20;
  auto body_of = [&](int i, int salt) {
    std::string body;
    if (i > 0) {
      body += "var dep = require(\"./f" + std::to_string(salt % i) + "\");\ndep.tag;\n";
    }
    body += "var pad = " + std::to_string(salt) + " + 1;\n";
    body += "module.exports = {tag: \"f" + std::to_string(i) +
            (salt % 3 == 0 ? "x" : "") + "\", v: pad};\n";
    return body;
  };
  for (int i = 0; i < n; i++) rfs.put("f" + std::to_string(i) + ".fc", body_of(i, i));
  Server inc(rfs, ".", opts);
  inc.init();
  for (int event = 0; event < 50; event++) {
    int i = static_cast<int>(rng() % n);
    std::string file = "f" + std::to_string(i) + ".fc";
    ChangeSet ch;
    if (rfs.exists(file) && rng() % 5 == 0) {
      rfs.remove(file);
      ch.deleted = {file};
    } else if (rfs.exists(file)) {
      rfs.put(file, body_of(i, static_cast<int>(rng() % 97)));
      ch.modified = {file};
    } else {
      rfs.put(file, body_of(i, static_cast<int>(rng() % 97)));
      ch.added = {file};
    }
    inc.apply_changes(ch);
  }
  Server cold(rfs, ".", opts);
  cold.init();
  auto fingerprint = [](const Server &srv) {
    std::string out = reports_to_json(srv.all_errors(), srv.file_count());
    for (const auto &[f, h] : srv.signature_hashes())
      out += "\n" + f + " " + std::to_string(h);
    return out;
  };
  bool replay = fingerprint(inc) == fingerprint(cold);
  verdict("7", body_only && cone && replay,
          std::string("body edit -> {a}: ") + (body_only ? "yes" : "no") +
              "; signature edit -> {a,b,c}: " + (cone ? "yes" : "no") +
              "; 50-event replay byte-identical: " + (replay ? "yes" : "no"));
}

// ---- 8: diamond determinism ---------------------------------------------------------------------

void criterion8() {
  std::mt19937 rng(4242);
  int agree = 0;
  const int trials = 100;
  for (int t = 0; t < trials; t++) {
    int salt = static_cast<int>(rng() % 1000);
    MemFileSystem fs;
    std::string payload = (salt % 2) ? "\"s" + std::to_string(salt % 7) + "\""
                                     : std::to_string(salt % 9);
    fs.put("d.fc", "module.exports = {tag: \"d\", val: " + payload + "};\n");
    fs.put("b.fc", "var d = require(\"./d\");\nmodule.exports = {w: d, m: \"b\"};\n");
    fs.put("c.fc", "var d = require(\"./d\");\nmodule.exports = {w: d, m: \"c\"};\n");
    CheckOptions opts;
    FileAnalysis d = analyze_file(fs, "d.fc");
    ModuleSignature d_sig = compile_and_link_group({&d}, {}, opts)[0].signature;
    std::map<std::string, const ModuleSignature *> donly{{"d.fc", &d_sig}};
    FileAnalysis b = analyze_file(fs, "b.fc");
    FileAnalysis c = analyze_file(fs, "c.fc");
    ModuleSignature b_sig = compile_and_link_group({&b}, donly, opts)[0].signature;
    ModuleSignature c_sig = compile_and_link_group({&c}, donly, opts)[0].signature;

    // link A's exports against both signatures, in both orders
    auto apex_hash = [&](bool b_first) {
      ConstraintGraph g;
      TypePtr tb, tc;
      if (b_first) {
        tb = load_signature(g, b_sig, {});
        tc = load_signature(g, c_sig, {});
      } else {
        tc = load_signature(g, c_sig, {});
        tb = load_signature(g, b_sig, {});
      }
      TypePtr apex = t_record({{"l", tb}, {"r", tc}, {"p", t_join(tb, tc)}});
      return extract_signature(g, apex, "a.fc", {}).hash;
    };
    if (apex_hash(true) == apex_hash(false)) agree++;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d/%d random diamonds hash identically", agree, trials);
  verdict("8", agree == trials, buf);
}

// ---- 9: parallel determinism ------------------------------------------------------------------------

void criterion9() {
  std::mt19937 rng(777);
  MemFileSystem fs;
  const int n = 200;
  for (int i = 0; i < n; i++) {
    std::string body;
    int ndeps = i == 0 ? 0 : static_cast<int>(rng() % 3);
    for (int d = 0; d < ndeps; d++) {
      int target = static_cast<int>(rng() % i);
      body += "var d" + std::to_string(d) + " = require(\"./f" + std::to_string(target) +
              "\");\nd" + std::to_string(d) + ".tag;\n";
    }
    body += "var mk = (x: number) => ({kind: \"box\", val: x});\n";
    body += "var r = mk(" + std::to_string(i % 17) + ");\n";
    body += "var total = r.val + " + std::to_string(i % 5) + ";\n";
    body += "if (r.kind === \"box\") { r.val; }\n";
    body += "module.exports = {tag: \"f" + std::to_string(i) +
            "\", make: mk, num: total};\n";
    fs.put("f" + std::to_string(i) + ".fc", body);
  }

  std::map<int, std::string> outputs;
  std::map<int, double> times;
  bool order_ok = true;
  for (int workers : {1, 2, 4, 8}) {
    CheckOptions opts;
    opts.workers = workers;
    auto start = Clock::now();
    Server s(fs, ".", opts);
    s.init();
    times[workers] = seconds_since(start);
    outputs[workers] = reports_to_json(s.all_errors(), s.file_count());
    order_ok = order_ok && !s.dependency_order_violated();
  }
  bool identical = outputs[1] == outputs[2] && outputs[1] == outputs[4] &&
                   outputs[1] == outputs[8];
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "byte-identical across workers {1,2,4,8}: %s; dependency order held: %s",
                identical ? "yes" : "no", order_ok ? "yes" : "no");
  verdict("9", identical && order_ok, buf);

  double ratio = times[4] / times[1];
  unsigned hw = std::thread::hardware_concurrency();
  std::snprintf(buf, sizeof buf,
                "4-worker wall clock %.2fs vs 1-worker %.2fs, ratio %.2f (target <= 0.8, "
                "%u hardware threads)",
                times[4], times[1], ratio, hw);
  verdict("9s", ratio <= 0.8, buf, /*soft=*/true);
}

// ---- 10: shared-table contract -------------------------------------------------------------------------

void criterion10() {
  bool disjoint_ok = true, cross_writer = false, role = false, roundtrip = false;
  SharedTable t;
  {
    std::vector<std::thread> threads;
    for (int w = 0; w < 8; w++)
      threads.emplace_back([&t, w] {
        for (int i = 0; i < 100; i++)
          t.put("w" + std::to_string(w) + "/" + std::to_string(i),
                std::string(1, static_cast<char>(w)) + std::to_string(i), w);
      });
    for (auto &th : threads) th.join();
    disjoint_ok = t.size() == 800;
  }
  std::string bytes("\x00\x01\x02zz", 5);
  t.put("rt", bytes, 0);
  roundtrip = t.get("rt") == bytes;
  try {
    t.put("w0/0", "clobber", 3);
  } catch (const TableError &e) {
    cross_writer = e.kind == TableError::Kind::DisjointKeyViolation;
  }
  try {
    t.remove("w0/0", 3);
  } catch (const TableError &e) {
    role = e.kind == TableError::Kind::RoleViolation;
  }
  verdict("10", disjoint_ok && cross_writer && role && roundtrip,
          std::string("disjoint concurrent puts: ") + (disjoint_ok ? "ok" : "bad") +
              "; cross-writer put rejected: " + (cross_writer ? "yes" : "no") +
              "; worker remove rejected: " + (role ? "yes" : "no") +
              "; byte round-trip: " + (roundtrip ? "yes" : "no"));
}

} // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  if (failures) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all hard criteria passed\n");
  return 0;
}
