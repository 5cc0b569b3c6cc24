#include "stlsynth/parser.hpp"

#include <cstdlib>
#include <vector>

namespace stlsynth::stl {
namespace {

struct Tok {
  enum Kind { Ident, Num, Sym, End } kind = End;
  std::string text;
  double num = 0.0;
  int line = 1, col = 1;
};

std::vector<Tok> lex(const std::string& text) {
  std::vector<Tok> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto push = [&](Tok::Kind k, std::string t, double n = 0.0) {
    out.push_back({k, std::move(t), n, line, col});
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++col;
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() &&
             std::isalpha(static_cast<unsigned char>(text[j])))
        ++j;
      push(Tok::Ident, text.substr(i, j - i));
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.') {
      const char* start = text.c_str() + i;
      char* end = nullptr;
      const double v = std::strtod(start, &end);
      if (end == start) throw ParseError(line, col, "bad number");
      push(Tok::Num, std::string(start, static_cast<size_t>(end - start)), v);
      col += static_cast<int>(end - start);
      i += end - start;
      continue;
    }
    if (c == '&' || c == '|') {
      if (i + 1 < text.size() && text[i + 1] == c) {
        push(Tok::Sym, std::string(2, c));
        col += 2;
        i += 2;
      } else {
        push(Tok::Sym, std::string(1, c));
        ++col;
        ++i;
      }
      continue;
    }
    if (std::string("()[],").find(c) != std::string::npos) {
      push(Tok::Sym, std::string(1, c));
      ++col;
      ++i;
      continue;
    }
    throw ParseError(line, col, std::string("unexpected character '") + c +
                                    "'");
  }
  Tok end;
  end.kind = Tok::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Tok> toks) : toks_(std::move(toks)) {}

  SpecTree parse() {
    SpecTree spec;
    spec.groups.push_back(parse_group());
    while (accept_sym("&&")) spec.groups.push_back(parse_group());
    if (peek().kind != Tok::End)
      throw err("unexpected trailing input");
    spec.state_dim = 1;
    for (const auto& g : spec.groups)
      for (const auto& m : g.members) {
        auto scan = [&](const InnerFormula& f) {
          for (const auto& cl : f.clauses)
            for (const auto& p : cl)
              for (int d : p.dims)
                if (d == 1) spec.state_dim = 2;
        };
        scan(m.inner);
        if (m.until_left) scan(*m.until_left);
      }
    return spec;
  }

 private:
  std::vector<Tok> toks_;
  size_t pos_ = 0;
  int nextId_ = 0;

  const Tok& peek(size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  Tok take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  ParseError err(const std::string& msg) const {
    return ParseError(peek().line, peek().col, msg);
  }
  bool accept_sym(const std::string& s) {
    if (peek().kind == Tok::Sym && peek().text == s) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_sym(const std::string& s) {
    if (!accept_sym(s)) throw err("expected '" + s + "'");
  }
  bool at_op() const {
    return peek().kind == Tok::Ident &&
           (peek().text == "F" || peek().text == "G") &&
           peek(1).kind == Tok::Sym && peek(1).text == "[";
  }

  // Looks past a leading '(' to decide between a disjunction group and a
  // parenthesized left operand of U.
  bool paren_is_group() const {
    int depth = 0;
    bool sawOr = false;
    for (size_t i = pos_; i < toks_.size(); ++i) {
      const Tok& t = toks_[i];
      if (t.kind == Tok::Sym && t.text == "(") ++depth;
      else if (t.kind == Tok::Sym && t.text == ")") {
        --depth;
        if (depth == 0) return sawOr;
      } else if (depth == 1 && t.kind == Tok::Sym && t.text == "||") {
        sawOr = true;
      }
    }
    throw ParseError(peek().line, peek().col, "unbalanced '('");
  }

  SubtaskGroup parse_group() {
    SubtaskGroup g;
    if (peek().kind == Tok::Sym && peek().text == "(" && paren_is_group()) {
      expect_sym("(");
      g.members.push_back(parse_temporal());
      while (accept_sym("||")) g.members.push_back(parse_temporal());
      expect_sym(")");
      if (g.members.size() < 2) throw err("a group needs two alternatives");
      return g;
    }
    g.members.push_back(parse_temporal());
    return g;
  }

  double parse_num() {
    if (peek().kind != Tok::Num) throw err("expected a number");
    return take().num;
  }

  void parse_window(double& a, double& b) {
    const Tok open = peek();
    expect_sym("[");
    a = parse_num();
    expect_sym(",");
    b = parse_num();
    expect_sym("]");
    if (a < 0 || b < a)
      throw ParseError(open.line, open.col,
                       "window must satisfy 0 <= a <= b");
  }

  Subtask parse_temporal() {
    Subtask st;
    st.id = nextId_++;
    if (at_op()) {
      const std::string op1 = take().text;
      parse_window(st.op.a, st.op.b);
      if (at_op()) {
        const std::string op2 = peek().text;
        if (op1 == op2)
          throw err("repeated temporal operator, use F G or G F");
        take();
        parse_window(st.op.c, st.op.d);
        st.op.kind = op1 == "F" ? OpKind::FinallyGlobally
                                : OpKind::GloballyFinally;
      } else {
        st.op.kind = op1 == "F" ? OpKind::Finally : OpKind::Globally;
      }
      st.inner = parse_dnf();
      return st;
    }
    st.until_left = parse_dnf();
    if (!(peek().kind == Tok::Ident && peek().text == "U"))
      throw err("expected a temporal operator");
    take();
    st.op.kind = OpKind::Until;
    parse_window(st.op.a, st.op.b);
    st.inner = parse_dnf();
    return st;
  }

  InnerFormula parse_dnf() {
    InnerFormula f;
    const bool paren = accept_sym("(");
    f.clauses.push_back(parse_clause());
    while (accept_sym("|")) f.clauses.push_back(parse_clause());
    if (paren) expect_sym(")");
    return f;
  }

  Clause parse_clause() {
    Clause c;
    c.push_back(parse_pred());
    while (accept_sym("&")) c.push_back(parse_pred());
    return c;
  }

  int parse_var() {
    if (peek().kind == Tok::Ident && peek().text == "x") {
      take();
      return 0;
    }
    if (peek().kind == Tok::Ident && peek().text == "y") {
      take();
      return 1;
    }
    throw err("expected variable x or y");
  }

  Predicate parse_pred() {
    if (peek().kind != Tok::Ident) throw err("expected a predicate");
    const Tok name = take();
    expect_sym("(");
    Predicate p;
    if (name.text == "circle") {
      if (parse_var() != 0) throw err("circle arguments start with x,y");
      expect_sym(",");
      if (parse_var() != 1) throw err("circle arguments start with x,y");
      expect_sym(",");
      geom::Disc d;
      d.center[0] = parse_num();
      expect_sym(",");
      d.center[1] = parse_num();
      expect_sym(",");
      d.radius = parse_num();
      if (d.radius <= 0) throw err("circle radius must be positive");
      p.dims = {0, 1};
      p.set = d;
    } else if (name.text == "box") {
      const int dim = parse_var();
      expect_sym(",");
      const double lo = parse_num();
      expect_sym(",");
      const double hi = parse_num();
      if (lo >= hi) throw err("box interval is empty");
      geom::Vec l(1), h(1);
      l << lo;
      h << hi;
      p.dims = {dim};
      p.set = geom::Box{l, h};
    } else if (name.text == "rect") {
      const double xlo = parse_num();
      expect_sym(",");
      const double xhi = parse_num();
      expect_sym(",");
      const double ylo = parse_num();
      expect_sym(",");
      const double yhi = parse_num();
      if (xlo >= xhi || ylo >= yhi) throw err("rect interval is empty");
      geom::Vec l(2), h(2);
      l << xlo, ylo;
      h << xhi, yhi;
      p.dims = {0, 1};
      p.set = geom::Box{l, h};
    } else {
      throw ParseError(name.line, name.col,
                       "unknown predicate '" + name.text + "'");
    }
    expect_sym(")");
    return p;
  }
};

}  // namespace

SpecTree parse_spec(const std::string& text) {
  return Parser(lex(text)).parse();
}

}  // namespace stlsynth::stl
