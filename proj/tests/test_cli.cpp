#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "flowlet/cli.hpp"

using namespace flowlet;

namespace {

const std::string kCorpus = std::string(FLOWLET_TESTS_DIR) + "/corpus/classics";

struct CliRun {
  int status;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int status = run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

size_t count_errors(const std::string &json) {
  size_t n = 0, at = 0;
  while ((at = json.find("\"code\":", at)) != std::string::npos) {
    n++;
    at++;
  }
  return n;
}

} // namespace

TEST_CASE("checking the classics corpus finds exactly the two real errors") {
  CliRun r = cli({"check", kCorpus, "--workers", "1"});
  CHECK(r.status == 1);
  CHECK(count_errors(r.out) == 2);
  CHECK(r.out.find("pipe_bad.fc") != std::string::npos);
  CHECK(r.out.find("havoc.fc") != std::string::npos);
  CHECK(r.out.find("\"files\":6") != std::string::npos);
}

TEST_CASE("disabling refinements makes the corpus spuriously red") {
  CliRun r = cli({"check", kCorpus, "--workers", "1", "--no-refinements"});
  CHECK(r.status == 1);
  CHECK(count_errors(r.out) >= 4);
  CHECK(r.out.find("sum.fc") != std::string::npos);
  CHECK(r.out.find("merge.fc") != std::string::npos);
}

TEST_CASE("an empty directory checks clean") {
  std::string dir = (std::filesystem::temp_directory_path() / "flowlet_empty").string();
  std::filesystem::create_directories(dir);
  CliRun r = cli({"check", dir});
  CHECK(r.status == 0);
  CHECK(r.out.find("\"files\":0") != std::string::npos);
  CHECK(r.out.find("\"errors\":[]") != std::string::npos);
}

TEST_CASE("output is byte-identical across runs and worker counts") {
  CliRun a = cli({"check", kCorpus, "--workers", "1"});
  CliRun b = cli({"check", kCorpus, "--workers", "1"});
  CliRun c = cli({"check", kCorpus, "--workers", "4"});
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
}

TEST_CASE("eval prints outcomes") {
  CliRun ok = cli({"eval", kCorpus + "/sum.fc"});
  CHECK(ok.status == 0);
  CHECK(ok.out == "value: 13\n");
  CliRun stuck = cli({"eval", kCorpus + "/havoc.fc"});
  CHECK(stuck.status == 1);
  CHECK(stuck.out.find("stuck") == 0);
}

TEST_CASE("dump subcommands produce their formats") {
  CliRun ast = cli({"dump-ast", kCorpus + "/merge.fc"});
  CHECK(ast.status == 0);
  CHECK(ast.out.find("\"kind\":\"program\"") != std::string::npos);

  CliRun cons = cli({"dump-constraints", kCorpus + "/merge.fc"});
  CHECK(cons.status == 0);
  CHECK(cons.out.find("<=") != std::string::npos);
  CHECK(cons.out.find("pred(truthy") != std::string::npos);

  CliRun dot = cli({"dump-graph", kCorpus + "/merge.fc"});
  CHECK(dot.status == 0);
  CHECK(dot.out.find("digraph") == 0);

  CliRun sig = cli({"dump-signature", kCorpus + "/merge.fc"});
  CHECK(sig.status == 0);
  CHECK(sig.out.find("sig v1") == 0);
}

TEST_CASE("usage errors exit with 2") {
  CliRun r = cli({"frobnicate"});
  CHECK(r.status == 2);
}

TEST_CASE("server subcommand reports status and applies changesets") {
  std::string dir = (std::filesystem::temp_directory_path() / "flowlet_srv").string();
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir + "/a.fc");
    f << "module.exports = 1;\n";
  }
  {
    std::ofstream f(dir + "/b.fc");
    f << "var a = require(\"./a\");\nmodule.exports = a;\n";
  }
  CliRun status = cli({"server", dir, "--status"});
  CHECK(status.status == 0);
  CHECK(status.out.find("\"files\":2") != std::string::npos);

  std::string cs = dir + "/change.json";
  {
    std::ofstream f(cs);
    f << "{\"added\":[],\"modified\":[\"" << dir << "/a.fc\"],\"deleted\":[]}";
  }
  CliRun apply = cli({"server", dir, "--apply", cs});
  CHECK(apply.status == 0);
  CHECK(apply.out.find("\"rechecked\":[\"" + dir + "/a.fc\"]") != std::string::npos);
}
