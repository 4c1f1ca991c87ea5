#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "spatel/formula.hpp"

namespace spatel {

/// Syntax or binding error with a 1-based source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Named thresholds and named sub-formulas visible to a formula.
struct Bindings {
  std::map<std::string, double> constants;
  std::map<std::string, Spatel> formulas;
};

/// Parses one formula.
///
///   spatel := tssl | "!" spatel | spatel ("&"|"|") spatel
///           | ("F"|"G") interval spatel | spatel "U" interval spatel | "(" spatel ")"
///   tssl   := "true" | "mu" (">="|"<="|"==") value | "!" tssl | tssl ("&"|"|") tssl
///           | ("A"|"E") labels "O" tssl
///           | ("A"|"E") labels "(" tssl "U[" int "]" tssl ")" | "(" tssl ")"
///   labels := "[" ("L" | label ("," label)*) "]"      label := NW | NE | SW | SE
///   interval := "[" value "," value ")"
///
/// Binding strength, tightest first: "!", prefix operators, "&", "|", "U".
/// `mu == c` reads as `mu >= c & mu <= c`. Identifiers refer to `bindings`.
Spatel parse(const std::string& text, const Bindings& bindings = {});

/// A program is a sequence of `const NAME = value;` and `let NAME = formula;`
/// statements followed by the formula itself. `#` starts a line comment.
struct Program {
  Bindings bindings;
  Spatel formula;
};

Program parse_program(const std::string& text, Bindings base = {});

}  // namespace spatel
