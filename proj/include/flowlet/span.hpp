#pragma once

#include <cstdint>
#include <string>

namespace flowlet {

// Half-open byte range [pos, end) into one source file, with the 1-based
// line/column of its start. `file` indexes the file table of whatever unit
// the span belongs to (0 for single-file checks).
struct Span {
  uint32_t file = 0;
  uint32_t line = 0;
  uint32_t col = 0;
  uint32_t pos = 0;
  uint32_t end = 0;

  friend bool operator==(const Span &a, const Span &b) {
    return a.file == b.file && a.pos == b.pos && a.end == b.end;
  }
  friend bool operator!=(const Span &a, const Span &b) { return !(a == b); }
  friend bool operator<(const Span &a, const Span &b) {
    if (a.file != b.file) return a.file < b.file;
    if (a.pos != b.pos) return a.pos < b.pos;
    return a.end < b.end;
  }
};

inline std::string span_str(const Span &s) {
  return std::to_string(s.line) + ":" + std::to_string(s.col);
}

// A program identifier. `uid` is 0 until renaming; after renaming every
// definition point carries a nonzero uid that is unique within its check unit.
struct Ident {
  std::string text;
  uint32_t uid = 0;

  friend bool operator==(const Ident &a, const Ident &b) {
    return a.uid == b.uid && a.text == b.text;
  }
  friend bool operator!=(const Ident &a, const Ident &b) { return !(a == b); }
  friend bool operator<(const Ident &a, const Ident &b) {
    if (a.uid != b.uid) return a.uid < b.uid;
    return a.text < b.text;
  }
};

} // namespace flowlet
