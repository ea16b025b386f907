#include "flowlet/modules.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "flowlet/check.hpp"
#include "flowlet/gen.hpp"
#include "flowlet/parse.hpp"
#include "flowlet/rename.hpp"

namespace flowlet {

// ---- Paths ------------------------------------------------------------------------

std::string normalize_path(const std::string &path) {
  std::vector<std::string> parts;
  std::string cur;
  auto flush = [&] {
    if (cur.empty() || cur == ".") {
      cur.clear();
      return;
    }
    if (cur == "..") {
      if (!parts.empty() && parts.back() != "..") parts.pop_back();
      else parts.push_back("..");
    } else {
      parts.push_back(cur);
    }
    cur.clear();
  };
  bool absolute = !path.empty() && path[0] == '/';
  for (char c : path) {
    if (c == '/') flush();
    else cur += c;
  }
  flush();
  std::string out = absolute ? "/" : "";
  for (size_t i = 0; i < parts.size(); i++) {
    if (i) out += "/";
    out += parts[i];
  }
  if (out.empty()) out = absolute ? "/" : ".";
  return out;
}

std::string dirname(const std::string &path) {
  auto pos = path.find_last_of('/');
  if (pos == std::string::npos) return ".";
  if (pos == 0) return "/";
  return path.substr(0, pos);
}

std::string join_path(const std::string &dir, const std::string &rel) {
  if (!rel.empty() && rel[0] == '/') return normalize_path(rel);
  return normalize_path(dir + "/" + rel);
}

// ---- File systems --------------------------------------------------------------------

std::optional<std::string> RealFileSystem::read(const std::string &path) const {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool RealFileSystem::exists(const std::string &path) const {
  std::error_code ec;
  return std::filesystem::is_regular_file(path, ec);
}

std::vector<std::string> RealFileSystem::list(const std::string &root,
                                              const std::string &ext) const {
  std::vector<std::string> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) return out;
  for (auto it = std::filesystem::recursive_directory_iterator(root, ec);
       it != std::filesystem::recursive_directory_iterator(); ++it) {
    if (it->is_regular_file() && it->path().extension() == ext)
      out.push_back(normalize_path(it->path().string()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::string> MemFileSystem::read(const std::string &path) const {
  auto it = files_.find(normalize_path(path));
  if (it == files_.end()) return std::nullopt;
  return it->second;
}

bool MemFileSystem::exists(const std::string &path) const {
  return files_.count(normalize_path(path)) != 0;
}

std::vector<std::string> MemFileSystem::list(const std::string &root,
                                             const std::string &ext) const {
  std::vector<std::string> out;
  std::string prefix = normalize_path(root);
  if (prefix == ".") prefix.clear();
  else prefix += "/";
  for (const auto &[path, content] : files_) {
    if (path.size() >= ext.size() &&
        path.compare(path.size() - ext.size(), ext.size(), ext) == 0 &&
        path.compare(0, prefix.size(), prefix) == 0)
      out.push_back(path);
  }
  return out;
}

void MemFileSystem::put(const std::string &path, std::string content) {
  files_[normalize_path(path)] = std::move(content);
}

void MemFileSystem::remove(const std::string &path) {
  files_.erase(normalize_path(path));
}

// ---- Resolution -------------------------------------------------------------------------

ResolveOutcome resolve_module(const FileSystemView &fs, const std::string &importer,
                              const std::string &ref) {
  ResolveOutcome out;
  std::string base = join_path(dirname(importer), ref);
  out.probes.push_back(base);
  if (fs.exists(base)) {
    out.resolved = base;
    return out;
  }
  if (base.size() < 3 || base.compare(base.size() - 3, 3, ".fc") != 0) {
    std::string with_ext = base + ".fc";
    out.probes.push_back(with_ext);
    if (fs.exists(with_ext)) out.resolved = with_ext;
  }
  return out;
}

// ---- Front end ------------------------------------------------------------------------------

namespace {

void collect_refs(const ast::Expr &e, std::vector<std::string> &out) {
  using ast::ExprKind;
  if (e.kind == ExprKind::Require) {
    for (const auto &r : out)
      if (r == e.lexeme) return;
    out.push_back(e.lexeme);
  }
  if (e.lhs) collect_refs(*e.lhs, out);
  if (e.rhs) collect_refs(*e.rhs, out);
  if (e.ret) collect_refs(*e.ret, out);
  for (const auto &a : e.args) collect_refs(*a, out);
  for (const auto &f : e.fields) collect_refs(*f.init, out);
  if (e.body) {
    std::function<void(const ast::Stmt &)> walk = [&](const ast::Stmt &s) {
      if (s.expr) collect_refs(*s.expr, out);
      if (s.a) walk(*s.a);
      if (s.b) walk(*s.b);
    };
    walk(*e.body);
  }
}

void collect_refs(const ast::Program &p, std::vector<std::string> &out) {
  std::function<void(const ast::Stmt &)> walk = [&](const ast::Stmt &s) {
    if (s.expr) collect_refs(*s.expr, out);
    if (s.a) walk(*s.a);
    if (s.b) walk(*s.b);
  };
  for (const auto &s : p.statements) walk(*s);
}

Span require_span(const ast::Program &p, const std::string &ref) {
  Span found{};
  std::function<void(const ast::Expr &)> walk_e = [&](const ast::Expr &e) {
    if (found.end > found.pos) return;
    if (e.kind == ast::ExprKind::Require && e.lexeme == ref) {
      found = e.span;
      return;
    }
    if (e.lhs) walk_e(*e.lhs);
    if (e.rhs) walk_e(*e.rhs);
    if (e.ret) walk_e(*e.ret);
    for (const auto &a : e.args) walk_e(*a);
    for (const auto &f : e.fields) walk_e(*f.init);
    if (e.body) {
      std::function<void(const ast::Stmt &)> walk_s = [&](const ast::Stmt &s) {
        if (s.expr) walk_e(*s.expr);
        if (s.a) walk_s(*s.a);
        if (s.b) walk_s(*s.b);
      };
      walk_s(*e.body);
    }
  };
  std::function<void(const ast::Stmt &)> walk_s = [&](const ast::Stmt &s) {
    if (s.expr) walk_e(*s.expr);
    if (s.a) walk_s(*s.a);
    if (s.b) walk_s(*s.b);
  };
  for (const auto &s : p.statements) walk_s(*s);
  return found;
}

} // namespace

FileAnalysis analyze_file(const FileSystemView &fs, const std::string &file) {
  FileAnalysis out;
  out.file = file;
  auto content = fs.read(file);
  if (!content) return out;
  out.exists = true;

  ParseResult pr = parse(*content, file);
  if (!pr.ok()) {
    out.front_errors.push_back(ErrorReport{file, pr.error->span, ErrorCode::Parse,
                                           pr.error->message, {}});
    return out;
  }
  out.program = std::make_shared<ast::Program>(std::move(*pr.program));
  out.parse_ok = true;

  RenameResult rr = alpha_rename(*out.program);
  out.next_uid = rr.next_uid;
  for (const auto &ub : rr.errors)
    out.front_errors.push_back(ErrorReport{
        file, ub.span, ErrorCode::Unbound, "unbound variable '" + ub.ident.text + "'", {}});

  collect_refs(*out.program, out.refs);
  for (const auto &ref : out.refs) {
    ResolveOutcome ro = resolve_module(fs, file, ref);
    for (const auto &p : ro.probes) out.probe_log.insert(p);
    if (!ro.resolved) {
      std::string probed;
      for (size_t i = 0; i < ro.probes.size(); i++)
        probed += (i ? ", " : "") + ro.probes[i];
      out.front_errors.push_back(ErrorReport{file, require_span(*out.program, ref),
                                             ErrorCode::UnresolvedModule,
                                             "cannot resolve '" + ref + "' (tried " +
                                                 probed + ")",
                                             {}});
    }
    out.resolutions.emplace(ref, std::move(ro));
  }
  return out;
}

// ---- Compile & link -----------------------------------------------------------------------------

std::vector<LinkedFile>
compile_and_link_group(const std::vector<const FileAnalysis *> &members,
                       const std::map<std::string, const ModuleSignature *> &dep_sigs,
                       const CheckOptions &opts) {
  ConstraintGraph graph;
  graph.set_refinements(opts.refinements);

  std::vector<std::string> file_names;
  std::map<std::string, uint32_t> member_index;
  for (const auto *m : members) {
    member_index.emplace(m->file, static_cast<uint32_t>(file_names.size()));
    file_names.push_back(m->file);
  }

  struct MemberState {
    const FileAnalysis *analysis = nullptr;
    std::shared_ptr<ast::Program> program; // spans rewritten to group file ids
    std::optional<GenContext::ExportInfo> export_info;
    std::map<std::string, TypeVar> import_vars;
    ConstraintSet gen_log;
  };
  std::vector<MemberState> states(members.size());

  // Each member's spans carry its index in the group so errors can be
  // attributed to the right file.
  auto retag = [](ast::Program &p, uint32_t file_idx) {
    std::function<void(ast::Expr &)> we = [&](ast::Expr &e) {
      e.span.file = file_idx;
      if (e.lhs) we(*e.lhs);
      if (e.rhs) we(*e.rhs);
      if (e.ret) we(*e.ret);
      for (auto &a : e.args) we(*a);
      for (auto &f : e.fields) we(*f.init);
      for (auto &pp : e.params) pp.span.file = file_idx;
      if (e.body) {
        std::function<void(ast::Stmt &)> ws = [&](ast::Stmt &s) {
          s.span.file = file_idx;
          if (s.expr) we(*s.expr);
          if (s.a) ws(*s.a);
          if (s.b) ws(*s.b);
        };
        ws(*e.body);
      }
    };
    std::function<void(ast::Stmt &)> ws = [&](ast::Stmt &s) {
      s.span.file = file_idx;
      if (s.expr) we(*s.expr);
      if (s.a) ws(*s.a);
      if (s.b) ws(*s.b);
    };
    for (auto &s : p.statements) ws(*s);
  };

  // Compile every member into the shared graph, imports as fresh variables.
  uint32_t uid_base = 1;
  std::vector<std::unique_ptr<GenContext>> contexts;
  for (size_t i = 0; i < members.size(); i++) {
    MemberState &st = states[i];
    st.analysis = members[i];
    if (!members[i]->parse_ok) continue;
    st.program = std::make_shared<ast::Program>(ast::clone_program(*members[i]->program));
    retag(*st.program, static_cast<uint32_t>(i));
    alpha_rename(*st.program, uid_base);
    uid_base += 100000; // distinct uid ranges per member
    contexts.push_back(std::make_unique<GenContext>(graph));
    GenContext &ctx = *contexts.back();
    MemberState *stp = &st;
    ctx.import_binder = [&graph, stp](const std::string &ref, Span sp) {
      auto it = stp->import_vars.find(ref);
      if (it != stp->import_vars.end()) return std::optional<TypeVar>(it->second);
      TypeVar v = graph.fresh_type_var(sp);
      stp->import_vars.emplace(ref, v);
      return std::optional<TypeVar>(v);
    };
    gen_program(ctx, *st.program);
    st.export_info = ctx.export_info;
    st.gen_log = ctx.log;
  }

  // Link: dependency signatures (or intra-group exports) flow into the
  // import variables.
  for (size_t i = 0; i < members.size(); i++) {
    MemberState &st = states[i];
    for (const auto &[ref, var] : st.import_vars) {
      auto rit = st.analysis->resolutions.find(ref);
      if (rit == st.analysis->resolutions.end() || !rit->second.resolved) continue;
      const std::string &target = *rit->second.resolved;
      auto mi = member_index.find(target);
      if (mi != member_index.end()) {
        MemberState &dep = states[mi->second];
        TypePtr export_type =
            dep.export_info ? dep.export_info->type : t_void();
        graph.add(TypeConstraint{export_type, UseToVar{var}, {}, {}});
        continue;
      }
      auto dit = dep_sigs.find(target);
      if (dit != dep_sigs.end() && dit->second) {
        Span import_span = graph.var_span(var.id);
        TypePtr loaded = load_signature(graph, *dit->second, import_span);
        graph.add(TypeConstraint{loaded, UseToVar{var}, import_span, import_span});
      }
    }
  }

  // Extract per-member signatures and attribute errors.
  std::vector<LinkedFile> out(members.size());
  std::vector<std::vector<ErrorReport>> errors(members.size());
  for (size_t i = 0; i < members.size(); i++) {
    MemberState &st = states[i];
    LinkedFile &lf = out[i];
    lf.file = st.analysis->file;
    lf.gen_log = std::move(st.gen_log);
    for (const auto &e : st.analysis->front_errors) errors[i].push_back(e);
    if (!st.analysis->parse_ok) {
      lf.signature = void_signature();
      continue;
    }
    TypePtr export_type = st.export_info ? st.export_info->type : t_void();
    Span export_span = st.export_info ? st.export_info->span : Span{};
    lf.signature = extract_signature(graph, export_type, lf.file, export_span);
    for (const auto &loc : lf.signature.required_annotations) {
      uint32_t fidx = loc.span.file;
      std::string in_file = fidx < file_names.size() ? file_names[fidx] : lf.file;
      if (in_file != lf.file) continue; // attributed where the var was born
      errors[i].push_back(ErrorReport{lf.file, loc.span, ErrorCode::AnnotationRequired,
                                      "exported value needs a type annotation here",
                                      {}});
    }
  }

  std::vector<ErrorReport> graph_errors;
  collect_graph_errors(graph, file_names, graph_errors);
  for (auto &er : graph_errors) {
    auto mi = member_index.find(er.file);
    if (mi != member_index.end()) errors[mi->second].push_back(std::move(er));
    else if (!members.empty()) errors[0].push_back(std::move(er));
  }

  // Annotation requirements discovered across an intra-group cycle land on
  // the file that owns the unannotated declaration.
  for (size_t i = 0; i < members.size(); i++) {
    for (const auto &loc : out[i].signature.required_annotations) {
      uint32_t fidx = loc.span.file;
      if (fidx < file_names.size() && file_names[fidx] != out[i].file) {
        auto mi = member_index.find(file_names[fidx]);
        if (mi != member_index.end())
          errors[mi->second].push_back(
              ErrorReport{file_names[fidx], loc.span, ErrorCode::AnnotationRequired,
                          "exported value needs a type annotation here", {}});
      }
    }
  }

  for (size_t i = 0; i < members.size(); i++) {
    sort_reports(errors[i]);
    errors[i].erase(std::unique(errors[i].begin(), errors[i].end(),
                                [](const ErrorReport &a, const ErrorReport &b) {
                                  return !report_less(a, b) && !report_less(b, a);
                                }),
                    errors[i].end());
    out[i].errors = std::move(errors[i]);
  }
  return out;
}

// ---- Condensation -----------------------------------------------------------------------------------

std::vector<std::vector<std::string>> condensation_order(const DepGraph &g) {
  // Tarjan over the file nodes; emitted components already come out in
  // dependency order (callees before callers).
  struct State {
    int index = -1, low = 0;
    bool on_stack = false;
  };
  std::map<std::string, State> st;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> components;
  int counter = 0;

  std::function<void(const std::string &)> strongconnect = [&](const std::string &v) {
    State &sv = st[v];
    sv.index = sv.low = counter++;
    sv.on_stack = true;
    stack.push_back(v);
    auto it = g.deps.find(v);
    if (it != g.deps.end()) {
      for (const auto &w : it->second) {
        if (!g.deps.count(w)) continue;
        State &sw = st[w];
        if (sw.index < 0) {
          strongconnect(w);
          sv.low = std::min(sv.low, st[w].low);
        } else if (sw.on_stack) {
          sv.low = std::min(sv.low, sw.index);
        }
      }
    }
    if (sv.low == sv.index) {
      std::vector<std::string> comp;
      for (;;) {
        std::string w = stack.back();
        stack.pop_back();
        st[w].on_stack = false;
        comp.push_back(w);
        if (w == v) break;
      }
      std::sort(comp.begin(), comp.end());
      components.push_back(std::move(comp));
    }
  };

  for (const auto &[v, deps] : g.deps)
    if (st[v].index < 0) strongconnect(v);
  return components;
}

} // namespace flowlet
