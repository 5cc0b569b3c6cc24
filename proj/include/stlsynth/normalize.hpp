#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "stlsynth/stl_ast.hpp"

namespace stlsynth::stl {

// Helpers for bringing a boolean combination of axis bounds into the
// negation-free disjunctive normal form the rest of the toolkit expects.

enum class Cmp { Ge, Le };

struct LinearAtom {
  int dim = 0;
  Cmp cmp = Cmp::Ge;
  double bound = 0.0;
};

struct BoolExpr;
using BoolPtr = std::shared_ptr<const BoolExpr>;

struct BoolExpr {
  enum Kind { Pred, Not, And, Or } kind = Pred;
  LinearAtom atom;           // Pred
  std::vector<BoolPtr> kids; // Not: one, And/Or: two or more
};

BoolPtr atom(int dim, Cmp cmp, double bound);
BoolPtr lnot(BoolPtr e);
BoolPtr land(std::vector<BoolPtr> kids);
BoolPtr lor(std::vector<BoolPtr> kids);

// Pushes negations to the atoms (flipping comparisons), then distributes
// conjunction over disjunction. Within a clause, atoms on one axis collapse
// to their tightest bound; clauses with an empty interval are dropped.
std::vector<std::vector<LinearAtom>> to_dnf(const BoolPtr& e);

// One DNF clause as a box over `dim` dimensions. Missing bounds come from
// the universe box; without one the clause is rejected as unbounded.
geom::Box clause_box(const std::vector<LinearAtom>& clause, int dim,
                     const std::optional<geom::Box>& universe);

InnerFormula dnf_inner(const BoolPtr& e, int state_dim,
                       const std::optional<geom::Box>& universe);

}  // namespace stlsynth::stl
