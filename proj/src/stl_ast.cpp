#include "stlsynth/stl_ast.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace stlsynth::stl {

double horizon(const TemporalOp& op) {
  switch (op.kind) {
    case OpKind::FinallyGlobally:
    case OpKind::GloballyFinally:
      return op.b + op.d;
    default:
      return op.b;
  }
}

double horizon(const SpecTree& spec) {
  double h = 0.0;
  for (const auto& g : spec.groups)
    for (const auto& m : g.members) h = std::max(h, horizon(m.op));
  return h;
}

std::string dtos(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) != v)
    std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string print_pred(const Predicate& p) {
  if (const auto* d = std::get_if<geom::Disc>(&p.set)) {
    return "circle(x,y," + dtos(d->center[0]) + "," + dtos(d->center[1]) +
           "," + dtos(d->radius) + ")";
  }
  const auto& b = std::get<geom::Box>(p.set);
  if (p.dims.size() == 1) {
    const char* var = p.dims[0] == 0 ? "x" : "y";
    return std::string("box(") + var + "," + dtos(b.lo[0]) + "," +
           dtos(b.hi[0]) + ")";
  }
  return "rect(" + dtos(b.lo[0]) + "," + dtos(b.hi[0]) + "," + dtos(b.lo[1]) +
         "," + dtos(b.hi[1]) + ")";
}

std::string print_window(double a, double b) {
  return "[" + dtos(a) + "," + dtos(b) + "]";
}

std::string print_subtask(const Subtask& st) {
  const auto& op = st.op;
  switch (op.kind) {
    case OpKind::Finally:
      return "F" + print_window(op.a, op.b) + "(" + print_inner(st.inner) + ")";
    case OpKind::Globally:
      return "G" + print_window(op.a, op.b) + "(" + print_inner(st.inner) + ")";
    case OpKind::FinallyGlobally:
      return "F" + print_window(op.a, op.b) + "G" + print_window(op.c, op.d) +
             "(" + print_inner(st.inner) + ")";
    case OpKind::GloballyFinally:
      return "G" + print_window(op.a, op.b) + "F" + print_window(op.c, op.d) +
             "(" + print_inner(st.inner) + ")";
    case OpKind::Until:
      return "(" + print_inner(*st.until_left) + ") U" +
             print_window(op.a, op.b) + " (" + print_inner(st.inner) + ")";
  }
  return {};
}

}  // namespace

std::string print_inner(const InnerFormula& f) {
  std::string out;
  for (size_t c = 0; c < f.clauses.size(); ++c) {
    if (c) out += " | ";
    for (size_t p = 0; p < f.clauses[c].size(); ++p) {
      if (p) out += " & ";
      out += print_pred(f.clauses[c][p]);
    }
  }
  return out;
}

std::string print_spec(const SpecTree& spec) {
  std::string out;
  for (size_t g = 0; g < spec.groups.size(); ++g) {
    if (g) out += " && ";
    const auto& grp = spec.groups[g];
    if (grp.members.size() == 1) {
      out += print_subtask(grp.members[0]);
    } else {
      out += "( ";
      for (size_t m = 0; m < grp.members.size(); ++m) {
        if (m) out += " || ";
        out += print_subtask(grp.members[m]);
      }
      out += " )";
    }
  }
  return out;
}

geom::TargetSet clause_target_set(const Clause& clause, int state_dim) {
  const double inf = std::numeric_limits<double>::infinity();
  geom::Vec lo = geom::Vec::Constant(state_dim, -inf);
  geom::Vec hi = geom::Vec::Constant(state_dim, inf);
  std::vector<geom::Disc> discs;
  for (const auto& p : clause) {
    if (const auto* d = std::get_if<geom::Disc>(&p.set)) {
      discs.push_back(*d);
      continue;
    }
    const auto& b = std::get<geom::Box>(p.set);
    for (size_t k = 0; k < p.dims.size(); ++k) {
      lo[p.dims[k]] = std::max(lo[p.dims[k]], b.lo[k]);
      hi[p.dims[k]] = std::min(hi[p.dims[k]], b.hi[k]);
    }
  }
  const bool boxBounded = lo.allFinite() && hi.allFinite();
  if (boxBounded && (lo.array() > hi.array()).any())
    throw std::runtime_error("clause reduces to an empty box");

  if (discs.empty()) {
    if (!boxBounded)
      throw std::runtime_error(
          "clause leaves a state dimension unbounded and has no compact set");
    return geom::Box{lo, hi};
  }
  if (state_dim != 2)
    throw std::runtime_error("circle predicates need a 2-D state");

  // With discs involved the clause reduces only by containment: pick the
  // candidate contained in every other constraint.
  auto discInBounds = [&](const geom::Disc& d) {
    for (int a = 0; a < 2; ++a)
      if (d.center[a] - d.radius < lo[a] - 1e-9 ||
          d.center[a] + d.radius > hi[a] + 1e-9)
        return false;
    return true;
  };
  for (size_t i = 0; i < discs.size(); ++i) {
    bool innermost = discInBounds(discs[i]);
    for (size_t j = 0; j < discs.size() && innermost; ++j)
      innermost = i == j || geom::contains(discs[j], discs[i]);
    if (innermost) return discs[i];
  }
  if (boxBounded) {
    const geom::Box box{lo, hi};
    bool innermost = true;
    for (const auto& d : discs) innermost = innermost && contains(d, box);
    if (innermost) return box;
  }
  throw std::runtime_error(
      "clause mixes sets that are not nested, cannot reduce to one target");
}

void validate_spec(const SpecTree& spec) {
  for (const auto& g : spec.groups)
    for (const auto& m : g.members) {
      for (const auto& c : m.inner.clauses) clause_target_set(c, spec.state_dim);
      if (m.until_left)
        for (const auto& c : m.until_left->clauses)
          clause_target_set(c, spec.state_dim);
    }
}

}  // namespace stlsynth::stl
