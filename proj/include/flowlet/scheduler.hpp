#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace flowlet {

// ---- Shared results table -----------------------------------------------------

struct TableError : std::runtime_error {
  enum class Kind { DisjointKeyViolation, RoleViolation } kind;
  TableError(Kind k, const std::string &what) : std::runtime_error(what), kind(k) {}
};

// In-process stand-in for a shared-memory hashtable. Values are opaque bytes.
// Concurrent reads and disjoint-key writes are safe; a writer may replay its
// own key idempotently; only the master removes entries.
class SharedTable {
public:
  static constexpr int kMaster = -1;

  void put(const std::string &key, std::string bytes, int writer);
  std::optional<std::string> get(const std::string &key) const;
  void remove(const std::string &key, int writer);
  void clear(int writer);
  size_t size() const;

private:
  struct Entry {
    std::string bytes;
    int writer;
  };
  mutable std::mutex mu_;
  std::map<std::string, Entry> entries_;
};

// ---- Master/worker map-reduce ---------------------------------------------------

template <class Inter, class Result> struct TaskSpec {
  std::function<Inter(const std::vector<std::string> &files, int worker)> job;
  std::function<void(Result &, Inter)> merge; // master only
  Result neutral;
  std::function<std::vector<std::string>()> next; // master only
};

struct JobFailure : std::runtime_error {
  std::string file;
  JobFailure(std::string f, const std::string &what)
      : std::runtime_error(what), file(std::move(f)) {}
};

// The master hands buckets from next() to free workers and folds their
// results with merge. Terminates when next() is empty and all workers are
// free. Worker failure aborts with the failing bucket's first file attributed.
template <class Inter, class Result>
Result run_parallel(const TaskSpec<Inter, Result> &spec, int workers) {
  if (workers < 1) workers = 1;

  struct Shared {
    std::mutex mu;
    std::condition_variable work_cv;
    std::condition_variable done_cv;
    std::deque<std::pair<int, std::vector<std::string>>> assigned; // worker slots
    std::deque<std::pair<std::vector<std::string>, Inter>> completed;
    std::optional<std::pair<std::string, std::string>> failure;
    bool shutdown = false;
    int busy = 0;
  } sh;

  auto worker_loop = [&](int id) {
    for (;;) {
      std::vector<std::string> bucket;
      {
        std::unique_lock<std::mutex> lk(sh.mu);
        sh.work_cv.wait(lk, [&] { return sh.shutdown || !sh.assigned.empty(); });
        if (sh.shutdown && sh.assigned.empty()) return;
        bucket = std::move(sh.assigned.front().second);
        sh.assigned.pop_front();
      }
      try {
        Inter r = spec.job(bucket, id);
        std::lock_guard<std::mutex> lk(sh.mu);
        sh.completed.emplace_back(std::move(bucket), std::move(r));
        sh.busy--;
        sh.done_cv.notify_one();
      } catch (const std::exception &e) {
        std::lock_guard<std::mutex> lk(sh.mu);
        sh.failure = {bucket.empty() ? std::string() : bucket.front(), e.what()};
        sh.busy--;
        sh.done_cv.notify_one();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int i = 0; i < workers; i++) pool.emplace_back(worker_loop, i);

  Result result = spec.neutral;
  {
    std::unique_lock<std::mutex> lk(sh.mu);
    for (;;) {
      if (sh.failure) break;
      // Fold finished work first: merge may feed the worklist behind next().
      while (!sh.completed.empty()) {
        auto done = std::move(sh.completed.front());
        sh.completed.pop_front();
        lk.unlock();
        spec.merge(result, std::move(done.second));
        lk.lock();
      }
      while (sh.busy < workers) {
        lk.unlock();
        std::vector<std::string> bucket = spec.next();
        lk.lock();
        if (bucket.empty()) break;
        sh.busy++;
        sh.assigned.emplace_back(0, std::move(bucket));
        sh.work_cv.notify_one();
      }
      if (sh.busy == 0 && sh.completed.empty()) {
        lk.unlock();
        bool empty = spec.next().empty();
        lk.lock();
        if (empty && sh.completed.empty() && sh.busy == 0) break;
        continue;
      }
      sh.done_cv.wait(lk, [&] {
        return !sh.completed.empty() || sh.busy == 0 || sh.failure.has_value();
      });
    }
    sh.shutdown = true;
    sh.work_cv.notify_all();
  }
  for (auto &t : pool) t.join();
  if (sh.failure)
    throw JobFailure(sh.failure->first, sh.failure->second);
  return result;
}

// ---- Dependency-ordered dispatch -------------------------------------------------

// Worklist for the dynamic next(): items become ready when their dependency
// count reaches zero. Completions decrement their dependents' counts.
// Dispatch order is instrumented so schedules can be audited.
class DependencyDispatcher {
public:
  DependencyDispatcher(const std::map<std::string, std::vector<std::string>> &deps,
                       int bucket_size);

  std::vector<std::string> next();
  void complete(const std::string &item);

  bool all_done() const;
  // Nonempty remainder with an empty worklist means an uncondensed cycle.
  void check_no_deadlock() const;

  const std::vector<std::string> &dispatch_log() const { return dispatch_log_; }
  bool dependency_order_violated() const { return violation_; }

private:
  int bucket_;
  std::map<std::string, int> remaining_;
  std::map<std::string, std::vector<std::string>> dependents_;
  std::map<std::string, std::vector<std::string>> deps_;
  std::deque<std::string> ready_;
  std::set<std::string> completed_;
  std::set<std::string> dispatched_;
  std::vector<std::string> dispatch_log_;
  size_t pending_ = 0;
  bool violation_ = false;
};

} // namespace flowlet
