#pragma once

#include <stdexcept>
#include <string>

#include "stlsynth/stl_ast.hpp"

namespace stlsynth::stl {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(int line_, int col_, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                           std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

// Grammar:
//   spec     := group ("&&" group)*
//   group    := temporal | "(" temporal ("||" temporal)+ ")"
//   temporal := OP window (OP window)? dnf | dnf "U" window dnf
//   dnf      := clause ("|" clause)* , optionally parenthesized
//   clause   := pred ("&" pred)*
//   pred     := circle(x,y,cx,cy,r) | box(x|y,lo,hi) | rect(xlo,xhi,ylo,yhi)
// OP is F or G; window is [a,b]. Any y, circle, or rect makes the state 2-D.
SpecTree parse_spec(const std::string& text);

}  // namespace stlsynth::stl
