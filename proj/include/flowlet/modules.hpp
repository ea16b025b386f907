#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowlet/ast.hpp"
#include "flowlet/diag.hpp"
#include "flowlet/sig.hpp"

namespace flowlet {

// ---- File system ------------------------------------------------------------

class FileSystemView {
public:
  virtual ~FileSystemView() = default;
  virtual std::optional<std::string> read(const std::string &path) const = 0;
  virtual bool exists(const std::string &path) const = 0;
  // All files under root with the given extension, sorted.
  virtual std::vector<std::string> list(const std::string &root,
                                        const std::string &ext) const = 0;
};

class RealFileSystem : public FileSystemView {
public:
  std::optional<std::string> read(const std::string &path) const override;
  bool exists(const std::string &path) const override;
  std::vector<std::string> list(const std::string &root,
                                const std::string &ext) const override;
};

class MemFileSystem : public FileSystemView {
public:
  std::optional<std::string> read(const std::string &path) const override;
  bool exists(const std::string &path) const override;
  std::vector<std::string> list(const std::string &root,
                                const std::string &ext) const override;

  void put(const std::string &path, std::string content);
  void remove(const std::string &path);

private:
  std::map<std::string, std::string> files_;
};

// Lexical normalization: resolves "." and ".." segments, collapses slashes.
std::string normalize_path(const std::string &path);
std::string dirname(const std::string &path);
std::string join_path(const std::string &dir, const std::string &rel);

// ---- Resolution -------------------------------------------------------------

struct ResolveOutcome {
  std::optional<std::string> resolved;
  std::vector<std::string> probes; // every path looked up, existing or not
};

// Resolves a relative reference against the importer's directory, appending
// ".fc" when the bare path does not exist.
ResolveOutcome resolve_module(const FileSystemView &fs, const std::string &importer,
                              const std::string &ref);

// ---- Per-file front end -------------------------------------------------------

struct FileAnalysis {
  std::string file;
  bool exists = false;
  bool parse_ok = false;
  std::shared_ptr<ast::Program> program;
  std::vector<ErrorReport> front_errors; // parse / unbound / unresolved refs
  std::vector<std::string> refs;         // distinct, first-appearance order
  std::map<std::string, ResolveOutcome> resolutions;
  std::set<std::string> probe_log;
  uint32_t next_uid = 1;
};

// Parse, alpha-rename and resolve the module references of one file.
FileAnalysis analyze_file(const FileSystemView &fs, const std::string &file);

// ---- Compile & link -----------------------------------------------------------

struct CheckOptions {
  int workers = 1;
  int bucket = 16;
  bool refinements = true;
};

struct LinkedFile {
  std::string file;
  ModuleSignature signature;
  std::vector<ErrorReport> errors; // type errors of this file
  ConstraintSet gen_log;
};

// Compiles and links one strongly connected component against its dependency
// signatures. Members share a constraint graph; each exports its own
// signature. `dep_sigs` maps resolved file -> signature for all external
// dependencies of the group.
std::vector<LinkedFile>
compile_and_link_group(const std::vector<const FileAnalysis *> &members,
                       const std::map<std::string, const ModuleSignature *> &dep_sigs,
                       const CheckOptions &opts);

// ---- Dependency graph ----------------------------------------------------------

struct DepGraph {
  // file -> resolved dependencies (deduped, sorted)
  std::map<std::string, std::vector<std::string>> deps;
};

// Strongly connected components in dependency order (dependencies first).
// Members within a component are sorted. The condensation is acyclic.
std::vector<std::vector<std::string>> condensation_order(const DepGraph &g);

} // namespace flowlet
