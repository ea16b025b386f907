#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "flowlet/modules.hpp"
#include "flowlet/scheduler.hpp"

namespace flowlet {

struct ChangeSet {
  std::vector<std::string> added;
  std::vector<std::string> modified;
  std::vector<std::string> deleted;
};

ChangeSet changeset_from_json(const std::string &json);

// Long-lived checking state. Invariant: after init or any sequence of
// apply_changes, the stored errors and signatures equal a from-scratch check
// of the current file set.
class Server {
public:
  Server(const FileSystemView &fs, std::string root, CheckOptions opts);

  void init();
  struct ApplyResult {
    std::vector<std::string> rechecked; // sorted
  };
  ApplyResult apply_changes(const ChangeSet &ch);

  struct Dependents {
    std::set<std::string> direct;
    std::set<std::string> indirect;
  };
  Dependents dependents(const std::string &file) const;

  std::vector<ErrorReport> all_errors() const; // sorted
  std::map<std::string, uint64_t> signature_hashes() const;
  std::string status_json(bool pretty = false) const;
  size_t file_count() const { return files_.size(); }

  const SharedTable &table() const { return table_; }
  bool dependency_order_violated() const { return dep_order_violated_; }

private:
  struct FileState {
    FileAnalysis analysis;
    ModuleSignature signature;
    std::vector<ErrorReport> type_errors;
  };

  std::vector<std::string> recheck_wave(const std::set<std::string> &to_compile,
                                        const std::set<std::string> &candidates);
  DepGraph dep_graph() const;

  const FileSystemView &fs_;
  std::string root_;
  CheckOptions opts_;
  std::map<std::string, FileState> files_;
  SharedTable table_;
  bool dep_order_violated_ = false;
};

} // namespace flowlet
