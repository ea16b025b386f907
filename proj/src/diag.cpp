#include "flowlet/diag.hpp"

#include <algorithm>

#include "json.hpp"

namespace flowlet {

const char *code_name(ErrorCode c) {
  switch (c) {
  case ErrorCode::Parse: return "E_PARSE";
  case ErrorCode::Unbound: return "E_UNBOUND";
  case ErrorCode::NotAFunction: return "E_NOT_A_FUNCTION";
  case ErrorCode::MissingField: return "E_MISSING_FIELD";
  case ErrorCode::NotARecord: return "E_NOT_A_RECORD";
  case ErrorCode::Arity: return "E_ARITY";
  case ErrorCode::ArithMismatch: return "E_ARITH_MISMATCH";
  case ErrorCode::IncompatibleWrite: return "E_INCOMPATIBLE_WRITE";
  case ErrorCode::AnnotationMismatch: return "E_ANNOTATION_MISMATCH";
  case ErrorCode::AnnotationRequired: return "E_ANNOTATION_REQUIRED";
  case ErrorCode::AmbiguousUnion: return "E_AMBIGUOUS_UNION";
  case ErrorCode::UnresolvedModule: return "E_UNRESOLVED_MODULE";
  }
  return "E_INTERNAL";
}

bool report_less(const ErrorReport &a, const ErrorReport &b) {
  if (a.file != b.file) return a.file < b.file;
  if (a.span.pos != b.span.pos) return a.span.pos < b.span.pos;
  if (a.span.end != b.span.end) return a.span.end < b.span.end;
  if (a.code != b.code) return static_cast<int>(a.code) < static_cast<int>(b.code);
  return a.message < b.message;
}

void sort_reports(std::vector<ErrorReport> &reports) {
  std::stable_sort(reports.begin(), reports.end(), report_less);
}

static nlohmann::ordered_json span_json(const Span &s) {
  return {{"line", s.line}, {"col", s.col}, {"start", s.pos}, {"end", s.end}};
}

std::string reports_to_json(const std::vector<ErrorReport> &reports,
                            size_t file_count, bool pretty) {
  nlohmann::ordered_json j;
  j["schema"] = "1";
  j["files"] = file_count;
  j["errors"] = nlohmann::ordered_json::array();
  for (const auto &r : reports) {
    nlohmann::ordered_json e;
    e["file"] = r.file;
    e["span"] = span_json(r.span);
    e["code"] = code_name(r.code);
    e["message"] = r.message;
    auto trace = nlohmann::ordered_json::array();
    for (const auto &t : r.trace)
      trace.push_back({{"file", t.file}, {"span", span_json(t.span)}});
    e["trace"] = trace;
    j["errors"].push_back(std::move(e));
  }
  return pretty ? j.dump(2) : j.dump();
}

} // namespace flowlet
