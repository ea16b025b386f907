#pragma once

#include <memory>
#include <string>
#include <vector>

#include "flowlet/gen.hpp"
#include "flowlet/modules.hpp"

namespace flowlet {

// Batch check of every .fc file under root.
struct BatchResult {
  std::vector<ErrorReport> errors;
  size_t file_count = 0;
  std::map<std::string, uint64_t> sig_hashes;
};

BatchResult check_root(const FileSystemView &fs, const std::string &root,
                       const CheckOptions &opts);

std::string batch_json(const BatchResult &r, bool pretty = false);

// One source text checked in isolation (no module resolution). Tests and the
// dump subcommands use this.
struct UnitCheck {
  std::shared_ptr<ast::Program> program;
  std::unique_ptr<ConstraintGraph> graph;
  ConstraintSet gen_log;
  std::vector<ErrorReport> errors; // parse/unbound + type errors, sorted
  TypePtr export_type;             // null when no export statement
  bool parse_ok = false;
};

UnitCheck check_source(const std::string &source, const std::string &name,
                       bool refinements = true);

// Error assembly shared by unit and module checks: renders solver
// inconsistencies and ambiguities into reports, given the file table mapping
// span.file indices to names.
void collect_graph_errors(const ConstraintGraph &g,
                          const std::vector<std::string> &file_names,
                          std::vector<ErrorReport> &out);

} // namespace flowlet
