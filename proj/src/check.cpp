#include "flowlet/check.hpp"

#include "flowlet/parse.hpp"
#include "flowlet/rename.hpp"
#include "flowlet/server.hpp"

namespace flowlet {

namespace {

std::string describe(const Inconsistency &inc) {
  std::string lhs = type_lit_str(inc.lhs);
  switch (inc.reason) {
  case InconsistencyReason::NotAFunction:
    return "cannot call a value of type " + lhs;
  case InconsistencyReason::MissingField:
    return "type " + lhs + " has no field '" + inc.field + "'";
  case InconsistencyReason::NotARecord:
    return "field access on non-record type " + lhs;
  case InconsistencyReason::ArityMismatch:
    return "wrong number of arguments for function of type " + lhs;
  case InconsistencyReason::ArithMismatch:
    return "'+' cannot combine " + lhs + " with the other operand";
  case InconsistencyReason::IncompatibleWrite:
    return "write of type " + lhs + " would break a checked field";
  case InconsistencyReason::AnnotationMismatch: {
    const auto *an = std::get_if<UseAnnot>(&inc.use);
    std::string want = an && an->annot ? annot_str(an->annot) : "?";
    return "type " + lhs + " does not satisfy annotation " + want;
  }
  }
  return "type error";
}

std::string file_of(const std::vector<std::string> &names, uint32_t idx,
                    const std::string &fallback) {
  if (idx < names.size()) return names[idx];
  return fallback;
}

} // namespace

void collect_graph_errors(const ConstraintGraph &g,
                          const std::vector<std::string> &file_names,
                          std::vector<ErrorReport> &out) {
  std::string fallback = file_names.empty() ? "<unknown>" : file_names[0];
  for (const auto &inc : g.consistency_errors()) {
    ErrorReport r;
    bool anchor_at_value = inc.reason == InconsistencyReason::AnnotationMismatch;
    const Span &anchor = anchor_at_value ? inc.lhs_hop : inc.use_span;
    r.file = file_of(file_names, anchor.file, fallback);
    r.span = anchor;
    r.code = reason_code(inc.reason);
    r.message = describe(inc);
    if (inc.lhs_origin.end > inc.lhs_origin.pos || inc.lhs_origin.line)
      r.trace.push_back(Loc{file_of(file_names, inc.lhs_origin.file, fallback),
                            inc.lhs_origin});
    out.push_back(std::move(r));
  }
  for (const auto &amb : g.ambiguities()) {
    ErrorReport r;
    r.file = file_of(file_names, amb.span.file, fallback);
    r.span = amb.span;
    r.code = ErrorCode::AmbiguousUnion;
    std::string spans;
    for (const auto &sp : amb.implicated) {
      if (!spans.empty()) spans += ", ";
      spans += span_str(sp);
    }
    r.message = "ambiguous union " + annot_str(amb.annot) +
                (spans.empty() ? "; annotate the value flowing here"
                               : "; annotate the declarations at " + spans);
    if (amb.origin.end > amb.origin.pos || amb.origin.line)
      r.trace.push_back(Loc{file_of(file_names, amb.origin.file, fallback), amb.origin});
    out.push_back(std::move(r));
  }
}

UnitCheck check_source(const std::string &source, const std::string &name,
                       bool refinements) {
  UnitCheck out;
  out.graph = std::make_unique<ConstraintGraph>();
  out.graph->set_refinements(refinements);

  ParseResult pr = parse(source, name);
  if (!pr.ok()) {
    out.errors.push_back(
        ErrorReport{name, pr.error->span, ErrorCode::Parse, pr.error->message, {}});
    return out;
  }
  out.program = std::make_shared<ast::Program>(std::move(*pr.program));
  out.parse_ok = true;
  RenameResult rr = alpha_rename(*out.program);
  for (const auto &ub : rr.errors)
    out.errors.push_back(ErrorReport{name, ub.span, ErrorCode::Unbound,
                                     "unbound variable '" + ub.ident.text + "'", {}});

  GenContext ctx(*out.graph);
  gen_program(ctx, *out.program);
  out.gen_log = std::move(ctx.log);
  if (ctx.export_info) out.export_type = ctx.export_info->type;

  collect_graph_errors(*out.graph, {name}, out.errors);
  sort_reports(out.errors);
  return out;
}

BatchResult check_root(const FileSystemView &fs, const std::string &root,
                       const CheckOptions &opts) {
  Server server(fs, root, opts);
  server.init();
  BatchResult out;
  out.errors = server.all_errors();
  out.file_count = server.file_count();
  out.sig_hashes = server.signature_hashes();
  return out;
}

std::string batch_json(const BatchResult &r, bool pretty) {
  return reports_to_json(r.errors, r.file_count, pretty);
}

} // namespace flowlet
