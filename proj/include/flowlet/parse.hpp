#pragma once

#include <optional>
#include <string>

#include "flowlet/ast.hpp"

namespace flowlet {

struct ParseError {
  Span span;
  std::string message;
};

struct ParseResult {
  std::optional<ast::Program> program;
  std::optional<ParseError> error;

  bool ok() const { return program.has_value(); }
};

// Parses a whole source file. `function f(...) {...}` declarations desugar to
// `var f = (...) => {...}`, type aliases are expanded in place, and tail
// returns inside `if` are normalized so that a return can only be the final
// statement of a function body.
ParseResult parse(const std::string &source, const std::string &file,
                  uint32_t file_index = 0);

} // namespace flowlet
