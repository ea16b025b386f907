#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <set>
#include <thread>

#include "flowlet/scheduler.hpp"

using namespace flowlet;

namespace {

std::vector<std::string> files_named(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; i++) out.push_back("f" + std::to_string(i));
  return out;
}

// A static next over a fixed list, bucket by bucket.
struct StaticNext {
  std::vector<std::string> files;
  size_t at = 0;
  int bucket;
  std::vector<std::string> operator()() {
    std::vector<std::string> out;
    while (at < files.size() && static_cast<int>(out.size()) < bucket)
      out.push_back(files[at++]);
    return out;
  }
};

} // namespace

TEST_CASE("one worker behaves like a sequential fold") {
  auto files = files_named(23);
  TaskSpec<std::vector<std::string>, std::vector<std::string>> spec;
  spec.neutral = {};
  StaticNext next{files, 0, 4};
  spec.next = [&]() { return next(); };
  spec.job = [](const std::vector<std::string> &bucket, int) { return bucket; };
  spec.merge = [](std::vector<std::string> &acc, std::vector<std::string> batch) {
    for (auto &f : batch) acc.push_back(std::move(f));
  };
  auto result = run_parallel(spec, 1);
  CHECK(result == files); // single worker: dispatch order is completion order
}

TEST_CASE("worker count does not change the result set") {
  auto files = files_named(40);
  std::set<std::string> expected(files.begin(), files.end());
  for (int workers : {1, 2, 4, 8}) {
    StaticNext next{files, 0, 3};
    TaskSpec<std::vector<std::string>, std::set<std::string>> spec;
    spec.neutral = {};
    spec.next = [&]() { return next(); };
    spec.job = [](const std::vector<std::string> &bucket, int) {
      std::vector<std::string> out;
      for (const auto &f : bucket) out.push_back(f + ":parsed");
      return out;
    };
    spec.merge = [](std::set<std::string> &acc, std::vector<std::string> batch) {
      for (auto &f : batch) acc.insert(std::move(f));
    };
    auto result = run_parallel(spec, workers);
    CHECK(result.size() == expected.size());
    for (const auto &f : files) CHECK(result.count(f + ":parsed") == 1);
  }
}

TEST_CASE("dynamic dispatch follows a chain in order") {
  std::map<std::string, std::vector<std::string>> deps;
  deps["a"] = {};
  deps["b"] = {"a"};
  deps["c"] = {"b"};
  DependencyDispatcher d(deps, 1);
  std::vector<std::string> order;
  while (!d.all_done()) {
    auto bucket = d.next();
    REQUIRE(!bucket.empty());
    for (const auto &item : bucket) {
      order.push_back(item);
      d.complete(item);
    }
  }
  CHECK(order == std::vector<std::string>{"a", "b", "c"});
  CHECK(!d.dependency_order_violated());
}

TEST_CASE("a diamond's apex waits for both arms") {
  std::map<std::string, std::vector<std::string>> deps;
  deps["d"] = {};
  deps["b"] = {"d"};
  deps["c"] = {"d"};
  deps["a"] = {"b", "c"};
  DependencyDispatcher disp(deps, 8);
  auto first = disp.next();
  CHECK(first == std::vector<std::string>{"d"});
  disp.complete("d");
  auto arms = disp.next();
  std::set<std::string> arm_set(arms.begin(), arms.end());
  CHECK(arm_set == std::set<std::string>{"b", "c"});
  CHECK(disp.next().empty()); // apex not ready yet
  disp.complete("b");
  CHECK(disp.next().empty());
  disp.complete("c");
  auto apex = disp.next();
  CHECK(apex == std::vector<std::string>{"a"});
  disp.complete("a");
  CHECK(disp.all_done());
}

TEST_CASE("an uncondensed cycle is a scheduler deadlock") {
  std::map<std::string, std::vector<std::string>> deps;
  deps["x"] = {"y"};
  deps["y"] = {"x"};
  DependencyDispatcher d(deps, 4);
  CHECK(d.next().empty());
  CHECK(!d.all_done());
  CHECK_THROWS_AS(d.check_no_deadlock(), std::logic_error);
}

TEST_CASE("independent roots may run in either order with one result") {
  std::map<std::string, std::vector<std::string>> deps;
  deps["r1"] = {};
  deps["r2"] = {};
  deps["top"] = {"r1", "r2"};
  for (int workers : {1, 4}) {
    DependencyDispatcher disp(deps, 1);
    TaskSpec<std::vector<std::string>, std::set<std::string>> spec;
    spec.neutral = {};
    spec.next = [&]() { return disp.next(); };
    spec.job = [](const std::vector<std::string> &bucket, int) { return bucket; };
    spec.merge = [&](std::set<std::string> &acc, std::vector<std::string> batch) {
      for (auto &f : batch) {
        disp.complete(f);
        acc.insert(std::move(f));
      }
    };
    auto result = run_parallel(spec, workers);
    CHECK(result == std::set<std::string>{"r1", "r2", "top"});
    CHECK(!disp.dependency_order_violated());
  }
}

TEST_CASE("a failing job aborts with the file attributed") {
  StaticNext next{files_named(5), 0, 1};
  TaskSpec<int, int> spec;
  spec.neutral = 0;
  spec.next = [&]() { return next(); };
  spec.job = [](const std::vector<std::string> &bucket, int) -> int {
    if (bucket.front() == "f3") throw std::runtime_error("boom");
    return 1;
  };
  spec.merge = [](int &acc, int v) { acc += v; };
  try {
    run_parallel(spec, 2);
    CHECK(false);
  } catch (const JobFailure &f) {
    CHECK(f.file == "f3");
  }
}

TEST_CASE("table values round-trip bytes") {
  SharedTable t;
  std::string bytes = std::string("\x00\x01\xff raw", 8);
  t.put("k", bytes, 1);
  auto got = t.get("k");
  REQUIRE(got.has_value());
  CHECK(*got == bytes);
  CHECK(!t.get("missing").has_value());
}

TEST_CASE("workers writing disjoint keys both succeed") {
  SharedTable t;
  std::vector<std::thread> threads;
  for (int w = 0; w < 8; w++) {
    threads.emplace_back([&t, w] {
      for (int i = 0; i < 50; i++)
        t.put("w" + std::to_string(w) + ":" + std::to_string(i), "v", w);
    });
  }
  for (auto &th : threads) th.join();
  CHECK(t.size() == 400);
}

TEST_CASE("same-key writes from different workers are rejected") {
  SharedTable t;
  t.put("k", "v", 1);
  t.put("k", "v2", 1); // same-writer replay is fine
  CHECK(*t.get("k") == "v2");
  try {
    t.put("k", "v3", 2);
    CHECK(false);
  } catch (const TableError &e) {
    CHECK(e.kind == TableError::Kind::DisjointKeyViolation);
  }
}

TEST_CASE("only the master removes entries") {
  SharedTable t;
  t.put("k", "v", 1);
  try {
    t.remove("k", 1);
    CHECK(false);
  } catch (const TableError &e) {
    CHECK(e.kind == TableError::Kind::RoleViolation);
  }
  t.remove("k", SharedTable::kMaster);
  CHECK(!t.get("k").has_value());
  t.remove("k", SharedTable::kMaster); // removing an absent key is fine
}

TEST_CASE("every file is dispatched exactly once per stage") {
  std::map<std::string, std::vector<std::string>> deps;
  for (int i = 0; i < 30; i++) {
    std::vector<std::string> ds;
    if (i > 0 && i % 3 == 0) ds.push_back("f" + std::to_string(i / 2));
    deps["f" + std::to_string(i)] = ds;
  }
  DependencyDispatcher d(deps, 4);
  std::set<std::string> seen;
  while (!d.all_done()) {
    auto bucket = d.next();
    REQUIRE(!bucket.empty());
    for (const auto &f : bucket) {
      CHECK(seen.insert(f).second);
      d.complete(f);
    }
  }
  CHECK(seen.size() == deps.size());
  CHECK(d.dispatch_log().size() == deps.size());
}
