#pragma once

#include <string>
#include <vector>

#include "flowlet/span.hpp"

namespace flowlet {

enum class ErrorCode {
  Parse,
  Unbound,
  NotAFunction,
  MissingField,
  NotARecord,
  Arity,
  ArithMismatch,
  IncompatibleWrite,
  AnnotationMismatch,
  AnnotationRequired,
  AmbiguousUnion,
  UnresolvedModule,
};

const char *code_name(ErrorCode c);

// A span paired with the file it lives in, for traces that may cross files.
struct Loc {
  std::string file;
  Span span;
};

struct ErrorReport {
  std::string file;
  Span span;
  ErrorCode code = ErrorCode::Parse;
  std::string message;
  std::vector<Loc> trace; // origin of the offending lower bound, when known
};

// Deterministic report order: (file, span, code, message).
bool report_less(const ErrorReport &a, const ErrorReport &b);
void sort_reports(std::vector<ErrorReport> &reports);

// Machine-readable output: {"schema":"1","files":N,"errors":[...]}.
// Stable byte-for-byte given the same reports.
std::string reports_to_json(const std::vector<ErrorReport> &reports,
                            size_t file_count, bool pretty = false);

} // namespace flowlet
