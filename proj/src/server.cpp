#include "flowlet/server.hpp"

#include <algorithm>
#include <cassert>

#include "flowlet/check.hpp"
#include "json.hpp"

namespace flowlet {

ChangeSet changeset_from_json(const std::string &json) {
  ChangeSet ch;
  auto j = nlohmann::json::parse(json);
  for (const auto &f : j.value("added", nlohmann::json::array()))
    ch.added.push_back(f.get<std::string>());
  for (const auto &f : j.value("modified", nlohmann::json::array()))
    ch.modified.push_back(f.get<std::string>());
  for (const auto &f : j.value("deleted", nlohmann::json::array()))
    ch.deleted.push_back(f.get<std::string>());
  return ch;
}

Server::Server(const FileSystemView &fs, std::string root, CheckOptions opts)
    : fs_(fs), root_(std::move(root)), opts_(opts) {}

void Server::init() {
  files_.clear();
  table_.clear(SharedTable::kMaster);
  ChangeSet all;
  all.added = fs_.list(root_, ".fc");
  apply_changes(all);
}

DepGraph Server::dep_graph() const {
  DepGraph g;
  for (const auto &[file, st] : files_) {
    auto &deps = g.deps[file];
    for (const auto &[ref, ro] : st.analysis.resolutions)
      if (ro.resolved && files_.count(*ro.resolved) && *ro.resolved != file)
        deps.push_back(*ro.resolved);
    std::sort(deps.begin(), deps.end());
    deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
  }
  return g;
}

Server::Dependents Server::dependents(const std::string &file) const {
  Dependents out;
  for (const auto &[other, st] : files_) {
    if (other == file) continue;
    if (st.analysis.probe_log.count(file)) out.direct.insert(other);
  }
  // Reverse edges of the resolved dependency graph.
  std::map<std::string, std::vector<std::string>> rdeps;
  for (const auto &[f, st] : files_)
    for (const auto &[ref, ro] : st.analysis.resolutions)
      if (ro.resolved && files_.count(*ro.resolved))
        rdeps[*ro.resolved].push_back(f);
  std::vector<std::string> frontier(out.direct.begin(), out.direct.end());
  std::set<std::string> seen(out.direct.begin(), out.direct.end());
  seen.insert(file);
  while (!frontier.empty()) {
    std::string cur = std::move(frontier.back());
    frontier.pop_back();
    for (const auto &dep : rdeps[cur]) {
      if (!seen.insert(dep).second) continue;
      out.indirect.insert(dep);
      frontier.push_back(dep);
    }
  }
  for (const auto &d : out.direct) out.indirect.erase(d);
  return out;
}

Server::ApplyResult Server::apply_changes(const ChangeSet &ch) {
  std::set<std::string> changed_paths;
  std::set<std::string> to_analyze;

  for (const auto &raw : ch.deleted) {
    std::string f = normalize_path(raw);
    changed_paths.insert(f);
    files_.erase(f);
    table_.remove("sig:" + f, SharedTable::kMaster);
    table_.remove("err:" + f, SharedTable::kMaster);
  }
  for (const auto &raw : ch.added) {
    std::string f = normalize_path(raw);
    changed_paths.insert(f);
    if (fs_.exists(f)) to_analyze.insert(f);
  }
  for (const auto &raw : ch.modified) {
    std::string f = normalize_path(raw);
    changed_paths.insert(f);
    if (fs_.exists(f)) to_analyze.insert(f);
    else files_.erase(f);
  }

  // Direct dependents: unmodified files whose resolution probes touched a
  // changed path. Their module references are re-resolved.
  std::set<std::string> direct;
  for (const auto &[file, st] : files_) {
    if (changed_paths.count(file)) continue;
    for (const auto &p : st.analysis.probe_log) {
      if (changed_paths.count(p)) {
        direct.insert(file);
        break;
      }
    }
  }
  for (const auto &f : direct) to_analyze.insert(f);

  // Stage: parse + resolve, parallel over a static list.
  std::vector<std::string> analyze_list(to_analyze.begin(), to_analyze.end());
  size_t next_idx = 0;
  TaskSpec<std::vector<FileAnalysis>, std::map<std::string, FileAnalysis>> parse_spec;
  parse_spec.neutral = {};
  parse_spec.next = [&]() {
    std::vector<std::string> bucket;
    while (next_idx < analyze_list.size() &&
           static_cast<int>(bucket.size()) < opts_.bucket)
      bucket.push_back(analyze_list[next_idx++]);
    return bucket;
  };
  parse_spec.job = [&](const std::vector<std::string> &files, int) {
    std::vector<FileAnalysis> out;
    for (const auto &f : files) out.push_back(analyze_file(fs_, f));
    return out;
  };
  parse_spec.merge = [](std::map<std::string, FileAnalysis> &acc,
                        std::vector<FileAnalysis> batch) {
    for (auto &a : batch) acc.emplace(a.file, std::move(a));
  };
  std::map<std::string, FileAnalysis> analyzed =
      run_parallel(parse_spec, opts_.workers);

  // Fold new analyses into the state; note resolution changes.
  std::set<std::string> must_compile;
  for (auto &[file, analysis] : analyzed) {
    if (!analysis.exists) {
      files_.erase(file);
      continue;
    }
    auto it = files_.find(file);
    bool resolution_changed = true;
    if (it != files_.end()) {
      resolution_changed = false;
      const auto &old_res = it->second.analysis.resolutions;
      if (old_res.size() != analysis.resolutions.size()) resolution_changed = true;
      else {
        for (const auto &[ref, ro] : analysis.resolutions) {
          auto o = old_res.find(ref);
          if (o == old_res.end() || o->second.resolved != ro.resolved) {
            resolution_changed = true;
            break;
          }
        }
      }
    }
    bool is_changed_file = changed_paths.count(file) != 0;
    if (it == files_.end()) {
      FileState st;
      st.analysis = std::move(analysis);
      files_.emplace(file, std::move(st));
    } else {
      it->second.analysis = std::move(analysis);
    }
    if (is_changed_file || resolution_changed) must_compile.insert(file);
  }

  // Candidates: the changed files plus their direct and indirect dependents.
  std::set<std::string> seeds = must_compile;
  for (const auto &d : direct) seeds.insert(d);
  std::map<std::string, std::vector<std::string>> rdeps;
  DepGraph dg = dep_graph();
  for (const auto &[f, deps] : dg.deps)
    for (const auto &d : deps) rdeps[d].push_back(f);
  std::set<std::string> candidates = seeds;
  std::vector<std::string> frontier(seeds.begin(), seeds.end());
  while (!frontier.empty()) {
    std::string cur = std::move(frontier.back());
    frontier.pop_back();
    for (const auto &dep : rdeps[cur])
      if (candidates.insert(dep).second) frontier.push_back(dep);
  }

  std::vector<std::string> rechecked = recheck_wave(must_compile, candidates);
  ApplyResult out;
  out.rechecked = std::move(rechecked);
  return out;
}

std::vector<std::string> Server::recheck_wave(const std::set<std::string> &must_compile,
                                              const std::set<std::string> &candidates) {
  DepGraph dg = dep_graph();
  auto components = condensation_order(dg);

  // Components and their dependencies, keyed by a stable component id.
  std::map<std::string, std::vector<std::string>> comp_members;
  std::map<std::string, std::string> comp_of;
  for (size_t i = 0; i < components.size(); i++) {
    std::string id = "c" + std::to_string(i);
    comp_members[id] = components[i];
    for (const auto &m : components[i]) comp_of[m] = id;
  }
  std::map<std::string, std::vector<std::string>> comp_deps;
  for (const auto &[id, members] : comp_members) {
    auto &ds = comp_deps[id];
    for (const auto &m : members)
      for (const auto &d : dg.deps[m])
        if (comp_of[d] != id) ds.push_back(comp_of[d]);
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  }

  DependencyDispatcher dispatcher(comp_deps, 1);
  std::map<std::string, bool> hash_changed;
  std::vector<std::string> rechecked;
  std::mutex state_mu; // guards files_ reads from workers vs master merges

  struct CompResult {
    std::string comp;
    std::vector<LinkedFile> linked;
    bool skipped = false;
  };

  TaskSpec<CompResult, int> spec;
  spec.neutral = 0;

  auto needs_recheck = [&](const std::string &comp) {
    const auto &members = comp_members[comp];
    for (const auto &m : members) {
      if (must_compile.count(m)) return true;
      if (!files_.count(m)) return true;
      if (!files_[m].signature.valid) return true;
      for (const auto &d : dg.deps[m]) {
        auto hc = hash_changed.find(d);
        if (hc != hash_changed.end() && hc->second) return true;
      }
    }
    return false;
  };

  spec.next = [&]() -> std::vector<std::string> {
    for (;;) {
      std::vector<std::string> bucket = dispatcher.next();
      if (bucket.empty()) return bucket;
      // Skip components whose inputs are unchanged; completing them feeds
      // the worklist without dispatching work.
      std::vector<std::string> dispatchable;
      for (auto &comp : bucket) {
        bool candidate = false;
        for (const auto &m : comp_members[comp])
          if (candidates.count(m)) candidate = true;
        if (!candidate || !needs_recheck(comp)) {
          for (const auto &m : comp_members[comp]) hash_changed[m] = false;
          dispatcher.complete(comp);
        } else {
          dispatchable.push_back(comp);
        }
      }
      if (!dispatchable.empty()) {
        // Fresh entries for everything about to be recompiled; removal is
        // the master's privilege, so it happens here rather than in jobs.
        for (const auto &comp : dispatchable) {
          for (const auto &m : comp_members[comp]) {
            table_.remove("sig:" + m, SharedTable::kMaster);
            table_.remove("err:" + m, SharedTable::kMaster);
          }
        }
        return dispatchable;
      }
      if (dispatcher.all_done()) return {};
    }
  };

  spec.job = [&](const std::vector<std::string> &comps, int worker) {
    // One component per bucket (bucket size 1 above).
    CompResult result;
    result.comp = comps.front();
    std::vector<const FileAnalysis *> members;
    std::map<std::string, const ModuleSignature *> dep_sigs;
    std::vector<ModuleSignature> owned;
    {
      std::lock_guard<std::mutex> lk(state_mu);
      const auto &member_names = comp_members[result.comp];
      std::set<std::string> member_set(member_names.begin(), member_names.end());
      std::set<std::string> external;
      for (const auto &m : member_names) {
        members.push_back(&files_[m].analysis);
        for (const auto &d : dg.deps[m])
          if (!member_set.count(d)) external.insert(d);
      }
      owned.reserve(external.size());
      for (const auto &d : external) {
        auto bytes = table_.get("sig:" + d);
        // Dependency order guarantees presence.
        if (!bytes) throw std::logic_error("dependency signature missing: " + d);
        owned.push_back(parse_signature(*bytes));
      }
      size_t i = 0;
      for (const auto &d : external) dep_sigs.emplace(d, &owned[i++]);
    }
    result.linked = compile_and_link_group(members, dep_sigs, opts_);
    for (const auto &lf : result.linked) {
      table_.put("sig:" + lf.file, lf.signature.serialized, worker);
      table_.put("err:" + lf.file,
                 reports_to_json(lf.errors, 1, false), worker);
    }
    return result;
  };

  spec.merge = [&](int &, CompResult result) {
    std::lock_guard<std::mutex> lk(state_mu);
    for (auto &lf : result.linked) {
      auto it = files_.find(lf.file);
      if (it == files_.end()) continue;
      uint64_t old_hash = it->second.signature.valid ? it->second.signature.hash : 0;
      it->second.signature = std::move(lf.signature);
      it->second.type_errors = std::move(lf.errors);
      hash_changed[lf.file] = old_hash != it->second.signature.hash;
      rechecked.push_back(lf.file);
    }
    dispatcher.complete(result.comp);
  };

  run_parallel(spec, opts_.workers);
  dispatcher.check_no_deadlock();
  if (dispatcher.dependency_order_violated()) dep_order_violated_ = true;

  std::sort(rechecked.begin(), rechecked.end());
  return rechecked;
}

std::vector<ErrorReport> Server::all_errors() const {
  std::vector<ErrorReport> out;
  for (const auto &[file, st] : files_) {
    for (const auto &e : st.analysis.front_errors) out.push_back(e);
    for (const auto &e : st.type_errors)
      if (e.code != ErrorCode::Parse && e.code != ErrorCode::Unbound &&
          e.code != ErrorCode::UnresolvedModule)
        out.push_back(e);
  }
  sort_reports(out);
  out.erase(std::unique(out.begin(), out.end(),
                        [](const ErrorReport &a, const ErrorReport &b) {
                          return !report_less(a, b) && !report_less(b, a);
                        }),
            out.end());
  return out;
}

std::map<std::string, uint64_t> Server::signature_hashes() const {
  std::map<std::string, uint64_t> out;
  for (const auto &[file, st] : files_)
    out.emplace(file, st.signature.valid ? st.signature.hash : 0);
  return out;
}

std::string Server::status_json(bool pretty) const {
  return reports_to_json(all_errors(), files_.size(), pretty);
}

} // namespace flowlet
