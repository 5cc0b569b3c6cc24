#include "stlsynth/normalize.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace stlsynth::stl {
namespace {

BoolPtr make(BoolExpr e) { return std::make_shared<const BoolExpr>(std::move(e)); }

// Negation-normal form: negation flips comparisons and dualizes junctions.
BoolPtr nnf(const BoolPtr& e, bool negate) {
  switch (e->kind) {
    case BoolExpr::Pred: {
      LinearAtom a = e->atom;
      if (negate) a.cmp = a.cmp == Cmp::Ge ? Cmp::Le : Cmp::Ge;
      return atom(a.dim, a.cmp, a.bound);
    }
    case BoolExpr::Not:
      return nnf(e->kids[0], !negate);
    case BoolExpr::And:
    case BoolExpr::Or: {
      const bool isAnd = (e->kind == BoolExpr::And) != negate;
      BoolExpr out;
      out.kind = isAnd ? BoolExpr::And : BoolExpr::Or;
      for (const auto& k : e->kids) out.kids.push_back(nnf(k, negate));
      return make(std::move(out));
    }
  }
  throw std::logic_error("unreachable");
}

using Clauses = std::vector<std::vector<LinearAtom>>;

Clauses cross(const Clauses& a, const Clauses& b) {
  Clauses out;
  for (const auto& ca : a)
    for (const auto& cb : b) {
      auto c = ca;
      c.insert(c.end(), cb.begin(), cb.end());
      out.push_back(std::move(c));
    }
  return out;
}

Clauses expand(const BoolPtr& e) {
  switch (e->kind) {
    case BoolExpr::Pred:
      return {{e->atom}};
    case BoolExpr::Or: {
      Clauses out;
      for (const auto& k : e->kids) {
        auto sub = expand(k);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
    case BoolExpr::And: {
      Clauses out = {{}};
      for (const auto& k : e->kids) out = cross(out, expand(k));
      return out;
    }
    case BoolExpr::Not:
      throw std::logic_error("negation survived NNF");
  }
  throw std::logic_error("unreachable");
}

// Tightest bound per (dim, cmp); nullopt when the interval is empty.
std::optional<std::vector<LinearAtom>> tighten(
    const std::vector<LinearAtom>& clause) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<int> dims;
  for (const auto& a : clause)
    if (std::find(dims.begin(), dims.end(), a.dim) == dims.end())
      dims.push_back(a.dim);
  std::sort(dims.begin(), dims.end());
  std::vector<LinearAtom> out;
  for (int d : dims) {
    double lo = -inf, hi = inf;
    for (const auto& a : clause) {
      if (a.dim != d) continue;
      if (a.cmp == Cmp::Ge) lo = std::max(lo, a.bound);
      else hi = std::min(hi, a.bound);
    }
    if (lo > hi) return std::nullopt;
    if (lo > -inf) out.push_back({d, Cmp::Ge, lo});
    if (hi < inf) out.push_back({d, Cmp::Le, hi});
  }
  return out;
}

}  // namespace

BoolPtr atom(int dim, Cmp cmp, double bound) {
  BoolExpr e;
  e.kind = BoolExpr::Pred;
  e.atom = {dim, cmp, bound};
  return make(std::move(e));
}

BoolPtr lnot(BoolPtr e) {
  BoolExpr out;
  out.kind = BoolExpr::Not;
  out.kids = {std::move(e)};
  return make(std::move(out));
}

BoolPtr land(std::vector<BoolPtr> kids) {
  BoolExpr out;
  out.kind = BoolExpr::And;
  out.kids = std::move(kids);
  return make(std::move(out));
}

BoolPtr lor(std::vector<BoolPtr> kids) {
  BoolExpr out;
  out.kind = BoolExpr::Or;
  out.kids = std::move(kids);
  return make(std::move(out));
}

std::vector<std::vector<LinearAtom>> to_dnf(const BoolPtr& e) {
  Clauses out;
  for (const auto& clause : expand(nnf(e, false)))
    if (auto t = tighten(clause)) out.push_back(std::move(*t));
  if (out.empty()) throw std::runtime_error("formula is unsatisfiable");
  return out;
}

geom::Box clause_box(const std::vector<LinearAtom>& clause, int dim,
                     const std::optional<geom::Box>& universe) {
  const double inf = std::numeric_limits<double>::infinity();
  geom::Vec lo = geom::Vec::Constant(dim, -inf);
  geom::Vec hi = geom::Vec::Constant(dim, inf);
  if (universe) {
    lo = universe->lo;
    hi = universe->hi;
  }
  for (const auto& a : clause) {
    if (a.dim < 0 || a.dim >= dim)
      throw std::invalid_argument("atom dimension out of range");
    if (a.cmp == Cmp::Ge) lo[a.dim] = std::max(lo[a.dim], a.bound);
    else hi[a.dim] = std::min(hi[a.dim], a.bound);
  }
  if (!lo.allFinite() || !hi.allFinite())
    throw std::runtime_error(
        "clause is unbounded; provide a universe box to close it");
  if ((lo.array() > hi.array()).any())
    throw std::runtime_error("clause reduces to an empty box");
  return geom::Box{lo, hi};
}

InnerFormula dnf_inner(const BoolPtr& e, int state_dim,
                       const std::optional<geom::Box>& universe) {
  InnerFormula f;
  for (const auto& clause : to_dnf(e)) {
    Predicate p;
    for (int d = 0; d < state_dim; ++d) p.dims.push_back(d);
    p.set = clause_box(clause, state_dim, universe);
    f.clauses.push_back({std::move(p)});
  }
  return f;
}

}  // namespace stlsynth::stl
