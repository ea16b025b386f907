#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "support/helpers.hpp"

#include "flowlet/gen.hpp"
#include "flowlet/modules.hpp"

using namespace flowlet;
using flowlet::test::has_code;

namespace {

MemFileSystem demo_fs() {
  MemFileSystem fs;
  fs.put("a/util.fc", "module.exports = {kind: \"nil\"};\n");
  fs.put("a/main.fc", "var u = require(\"./util\");\nu.kind;\n");
  fs.put("a/d.fc", "module.exports = 1;\n");
  fs.put("a/b/c.fc", "module.exports = require(\"../d\");\n");
  return fs;
}

std::vector<LinkedFile> link_one(const FileSystemView &fs, const std::string &file,
                                 const std::map<std::string, const ModuleSignature *> &deps = {}) {
  FileAnalysis fa = analyze_file(fs, file);
  return compile_and_link_group({&fa}, deps, CheckOptions{});
}

} // namespace

TEST_CASE("resolution probes the bare path then the extension") {
  MemFileSystem fs = demo_fs();
  ResolveOutcome r = resolve_module(fs, "a/main.fc", "./util");
  REQUIRE(r.resolved.has_value());
  CHECK(*r.resolved == "a/util.fc");
  CHECK(r.probes == std::vector<std::string>{"a/util", "a/util.fc"});

  ResolveOutcome missing = resolve_module(fs, "a/main.fc", "./missing");
  CHECK(!missing.resolved.has_value());
  CHECK(missing.probes == std::vector<std::string>{"a/missing", "a/missing.fc"});

  ResolveOutcome up = resolve_module(fs, "a/b/c.fc", "../d");
  REQUIRE(up.resolved.has_value());
  CHECK(*up.resolved == "a/d.fc");
}

TEST_CASE("compiling a record export produces the literal-to-variable shape") {
  MemFileSystem fs = demo_fs();
  std::vector<LinkedFile> linked = link_one(fs, "a/util.fc");
  REQUIRE(linked.size() == 1);
  const ModuleSignature &sig = linked[0].signature;
  CHECK(sig.serialized.find("export {kind: V0}") != std::string::npos);
  REQUIRE(sig.constraints.size() == 1);
  CHECK(sig.constraints[0].first == 0);
  CHECK(sig.constraints[0].second.base_singleton);
  CHECK(sig.constraints[0].second.base_value == "nil");
}

TEST_CASE("a file without an export statement exports void") {
  MemFileSystem fs;
  fs.put("x.fc", "var a = 1;\n");
  std::vector<LinkedFile> linked = link_one(fs, "x.fc");
  CHECK(linked[0].signature.serialized.find("export void") != std::string::npos);
}

TEST_CASE("each distinct reference binds one import variable") {
  MemFileSystem fs;
  fs.put("m.fc", "module.exports = 1;\n");
  fs.put("n.fc", "module.exports = 2;\n");
  fs.put("main.fc", "var a = require(\"./m\");\n"
                    "var b = require(\"./m\");\n"
                    "var c = require(\"./n\");\n");
  FileAnalysis fa = analyze_file(fs, "main.fc");
  CHECK(fa.refs == std::vector<std::string>{"./m", "./n"});
}

TEST_CASE("exported functions demand parameter annotations") {
  MemFileSystem fs;
  fs.put("f.fc", "module.exports = (x) => x;\n");
  std::vector<LinkedFile> linked = link_one(fs, "f.fc");
  CHECK(has_code(linked[0].errors, ErrorCode::AnnotationRequired));
  CHECK(!linked[0].signature.required_annotations.empty());
}

TEST_CASE("an annotated export walks into a signature with the parameter annotation") {
  MemFileSystem fs;
  fs.put("f.fc", "module.exports = (x: string) => x;\n");
  std::vector<LinkedFile> linked = link_one(fs, "f.fc");
  CHECK(linked[0].errors.empty());
  const std::string &s = linked[0].signature.serialized;
  // the walk keeps the return variable with its annotation-fed lower bound
  CHECK(s.find("export fn(string) -> V0") != std::string::npos);
  CHECK(s.find("V0 <- str") != std::string::npos);
}

TEST_CASE("signature constraints are pruned to the positive walk") {
  MemFileSystem fs;
  fs.put("f.fc", "var unrelated = {kind: \"junk\", val: 42};\n"
                 "unrelated.val;\n"
                 "module.exports = (x: string) => x;\n");
  std::vector<LinkedFile> linked = link_one(fs, "f.fc");
  CHECK(linked[0].signature.serialized.find("junk") == std::string::npos);
  CHECK(linked[0].signature.serialized.find("42") == std::string::npos);
}

TEST_CASE("signature hashes are stable across relinks") {
  MemFileSystem fs = demo_fs();
  std::vector<LinkedFile> first = link_one(fs, "a/util.fc");
  std::vector<LinkedFile> second = link_one(fs, "a/util.fc");
  CHECK(first[0].signature.hash == second[0].signature.hash);
  CHECK(first[0].signature.serialized == second[0].signature.serialized);
}

TEST_CASE("signature hashes track the export type") {
  MemFileSystem fs;
  fs.put("a.fc", "module.exports = \"s\";\n");
  uint64_t h1 = link_one(fs, "a.fc")[0].signature.hash;
  fs.put("a.fc", "module.exports = 5;\n");
  uint64_t h2 = link_one(fs, "a.fc")[0].signature.hash;
  CHECK(h1 != h2);
}

TEST_CASE("record field order in source does not affect the hash") {
  MemFileSystem fs;
  fs.put("a.fc", "module.exports = {x: 1, y: \"s\"};\n");
  uint64_t h1 = link_one(fs, "a.fc")[0].signature.hash;
  fs.put("a.fc", "module.exports = {y: \"s\", x: 1};\n");
  uint64_t h2 = link_one(fs, "a.fc")[0].signature.hash;
  CHECK(h1 == h2);
}

TEST_CASE("signatures round-trip through their byte form") {
  MemFileSystem fs;
  fs.put("m.fc", "module.exports = {mk: (v: number) => ({kind: \"box\", val: v}),\n"
                 "                  tag: \"box\", def: null};\n");
  std::vector<LinkedFile> linked = link_one(fs, "m.fc");
  const ModuleSignature &sig = linked[0].signature;
  ModuleSignature back = parse_signature(sig.serialized);
  CHECK(serialize_signature(back) == sig.serialized);
  CHECK(back.hash == sig.hash);
}

TEST_CASE("loading a signature never touches the origin graph") {
  MemFileSystem fs = demo_fs();
  ModuleSignature sig = link_one(fs, "a/util.fc")[0].signature;
  std::string before = sig.serialized;

  ConstraintGraph dependent;
  TypePtr loaded = load_signature(dependent, sig, {});
  // hammer the loaded export with uses; the signature value is unchanged
  TypeVar out = dependent.fresh_type_var();
  dependent.add(TypeConstraint{loaded, UseGet{"kind", out}, {}, {}});
  dependent.add(TypeConstraint{loaded, UseGet{"ghost", dependent.fresh_type_var()}, {}, {}});
  CHECK(sig.serialized == before);
  auto lows = dependent.lowers_of(out);
  REQUIRE(lows.size() == 1);
  CHECK(type_lit_str(lows[0].lit) == "\"nil\"");
  CHECK(!dependent.inconsistencies().empty()); // the ghost read is the dependent's problem
}

TEST_CASE("a dependent checks against the signature, not the source") {
  MemFileSystem fs;
  fs.put("lib.fc", "module.exports = {val: 5};\n");
  fs.put("app.fc", "var lib = require(\"./lib\");\nlib.val(1);\n");
  FileAnalysis lib = analyze_file(fs, "lib.fc");
  auto lib_linked = compile_and_link_group({&lib}, {}, CheckOptions{});
  FileAnalysis app = analyze_file(fs, "app.fc");
  std::map<std::string, const ModuleSignature *> deps{
      {"lib.fc", &lib_linked[0].signature}};
  auto app_linked = compile_and_link_group({&app}, deps, CheckOptions{});
  CHECK(has_code(app_linked[0].errors, ErrorCode::NotAFunction));
}

TEST_CASE("diamond: the dependent's signature is link-order independent") {
  MemFileSystem fs;
  fs.put("d.fc", "module.exports = {tag: \"d\", val: 1};\n");
  fs.put("b.fc", "var d = require(\"./d\");\nmodule.exports = {from: \"b\", inner: d};\n");
  fs.put("c.fc", "var d = require(\"./d\");\nmodule.exports = {from: \"c\", inner: d};\n");
  fs.put("a.fc", "var b = require(\"./b\");\nvar c = require(\"./c\");\n"
                 "var pick = b || c;\n"
                 "module.exports = {l: b.inner, r: c.inner, p: pick};\n");
  FileAnalysis d = analyze_file(fs, "d.fc");
  auto d_sig = compile_and_link_group({&d}, {}, CheckOptions{})[0].signature;
  FileAnalysis b = analyze_file(fs, "b.fc");
  FileAnalysis c = analyze_file(fs, "c.fc");
  std::map<std::string, const ModuleSignature *> d_only{{"d.fc", &d_sig}};
  auto b_sig = compile_and_link_group({&b}, d_only, CheckOptions{})[0].signature;
  auto c_sig = compile_and_link_group({&c}, d_only, CheckOptions{})[0].signature;

  FileAnalysis a1 = analyze_file(fs, "a.fc");
  std::map<std::string, const ModuleSignature *> deps_bc{{"b.fc", &b_sig},
                                                         {"c.fc", &c_sig}};
  uint64_t h1 = compile_and_link_group({&a1}, deps_bc, CheckOptions{})[0].signature.hash;

  // reload the dependency signatures from bytes in the opposite order
  ModuleSignature c_back = parse_signature(c_sig.serialized);
  ModuleSignature b_back = parse_signature(b_sig.serialized);
  FileAnalysis a2 = analyze_file(fs, "a.fc");
  std::map<std::string, const ModuleSignature *> deps_cb{{"c.fc", &c_back},
                                                         {"b.fc", &b_back}};
  uint64_t h2 = compile_and_link_group({&a2}, deps_cb, CheckOptions{})[0].signature.hash;
  CHECK(h1 == h2);
}

TEST_CASE("cyclic files link as one component with per-file signatures") {
  MemFileSystem fs;
  fs.put("x.fc", "var y = require(\"./y\");\nmodule.exports = {tag: \"x\", other: y};\n");
  fs.put("y.fc", "var x = require(\"./x\");\nmodule.exports = {tag: \"y\"};\n");
  FileAnalysis x = analyze_file(fs, "x.fc");
  FileAnalysis y = analyze_file(fs, "y.fc");
  auto linked = compile_and_link_group({&x, &y}, {}, CheckOptions{});
  REQUIRE(linked.size() == 2);
  CHECK(linked[0].errors.empty());
  CHECK(linked[1].errors.empty());
  CHECK(linked[0].signature.serialized.find("\"x\"") != std::string::npos);
  CHECK(linked[1].signature.serialized.find("\"y\"") != std::string::npos);
}

TEST_CASE("condensation orders dependencies first") {
  DepGraph g;
  g.deps["c.fc"] = {"b.fc"};
  g.deps["b.fc"] = {"a.fc"};
  g.deps["a.fc"] = {};
  auto comps = condensation_order(g);
  REQUIRE(comps.size() == 3);
  CHECK(comps[0] == std::vector<std::string>{"a.fc"});
  CHECK(comps[1] == std::vector<std::string>{"b.fc"});
  CHECK(comps[2] == std::vector<std::string>{"c.fc"});

  DepGraph cyc;
  cyc.deps["x.fc"] = {"y.fc"};
  cyc.deps["y.fc"] = {"x.fc"};
  cyc.deps["z.fc"] = {"x.fc"};
  auto comps2 = condensation_order(cyc);
  REQUIRE(comps2.size() == 2);
  CHECK(comps2[0] == std::vector<std::string>{"x.fc", "y.fc"});
  CHECK(comps2[1] == std::vector<std::string>{"z.fc"});
}

TEST_CASE("path normalization") {
  CHECK(normalize_path("a/./b/../c") == "a/c");
  CHECK(normalize_path("./x") == "x");
  CHECK(join_path("a/b", "../d") == "a/d");
  CHECK(dirname("a/b/c.fc") == "a/b");
}
