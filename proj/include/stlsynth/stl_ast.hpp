#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stlsynth/geometry.hpp"

namespace stlsynth::stl {

enum class OpKind { Finally, Globally, FinallyGlobally, GloballyFinally, Until };

// An atomic region over a subset of the state dimensions. box(x,..) covers
// dim 0, box(y,..) dim 1, circle/rect cover both.
struct Predicate {
  std::vector<int> dims;  // ascending
  geom::TargetSet set;
};

using Clause = std::vector<Predicate>;  // conjunction

struct InnerFormula {
  std::vector<Clause> clauses;  // disjunction of conjunctions
};

struct TemporalOp {
  OpKind kind = OpKind::Finally;
  double a = 0, b = 0;  // outer window
  double c = 0, d = 0;  // inner window, FG/GF only
};

struct Subtask {
  int id = 0;
  TemporalOp op;
  InnerFormula inner;                        // target (right operand of U)
  std::optional<InnerFormula> until_left;    // hold condition for U
};

struct SubtaskGroup {
  std::vector<Subtask> members;  // disjunction; singleton for a plain subtask
};

struct SpecTree {
  std::vector<SubtaskGroup> groups;  // conjunction
  int state_dim = 1;
};

double horizon(const TemporalOp& op);
double horizon(const SpecTree& spec);

// Shortest decimal text that parses back to exactly the same double.
std::string dtos(double v);

std::string print_inner(const InnerFormula& f);
std::string print_spec(const SpecTree& spec);  // round-trips through the parser

// Reduce a conjunctive clause to a single convex target over the full state
// space. Boxes intersect exactly; a disc combines with other sets only by
// containment, in which case the innermost set is the reduction. Throws
// std::runtime_error otherwise.
geom::TargetSet clause_target_set(const Clause& clause, int state_dim);

// Runs clause_target_set over every clause; throws on the first failure.
void validate_spec(const SpecTree& spec);

}  // namespace stlsynth::stl
