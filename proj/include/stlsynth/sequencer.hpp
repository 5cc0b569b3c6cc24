#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stlsynth/geometry.hpp"
#include "stlsynth/stl_ast.hpp"

namespace stlsynth::seq {

// One plannable reach obligation. Times are absolute seconds from t=0.
// deadline_abs is the latest arrival time (Table-style initial budgets:
// F -> b, G -> a, FG -> b+c, GF -> a+d, U right part -> b).
// open_abs gates when an arrival can count (F -> a, GF -> a+c, U -> a).
// start_abs gates when a hold may begin (G -> a, FG -> a+c).
// hold is the dwell duration (G -> b-a, FG -> d-c), excess the part of the
// dwell that cannot be spent crossing the set: max(0, hold - diameter/u_max).
struct Term {
  int subtask_id = -1;
  int group = -1;
  int member = 0;
  int clause = 0;
  stl::OpKind kind = stl::OpKind::Finally;
  geom::TargetSet target;
  double deadline_abs = 0.0;
  double open_abs = 0.0;
  double start_abs = 0.0;
  double hold = 0.0;
  double excess = 0.0;
};

// One concrete member/clause choice per group.
struct Alternative {
  std::vector<Term> terms;
};

// Gated feasibility plus the pure (ungated) slack profile of one order.
// arrival[j] includes window-open waits and upstream dwell excess;
// pure_arrival[j] is the plain travel chain the slack is scored on.
struct Feasibility {
  bool feasible = false;
  std::vector<double> arrival;
  std::vector<double> pure_arrival;
  std::vector<double> slack;
  double slack_sum = 0.0;
  double deficit = 0.0;
};

struct Selection {
  std::vector<Term> order;
  int alternative = -1;
  double slack_sum = 0.0;
};

class NoFeasibleSequence : public std::runtime_error {
 public:
  NoFeasibleSequence(std::string msg, std::vector<int> ids, double missing)
      : std::runtime_error(std::move(msg)),
        best_ids(std::move(ids)),
        deficit(missing) {}
  std::vector<int> best_ids;  // least-deficit order, by subtask id
  double deficit = 0.0;       // worst arrival overshoot of that order
};

std::vector<Alternative> enumerate_alternatives(const stl::SpecTree& spec,
                                                double u_max);

Feasibility feasibility(const std::vector<Term>& order,
                        const Eigen::VectorXd& x, double t, double u_max);

// Best order within one term set. Exhaustive for k <= 8 (OpenMP sweep when
// parallel), earliest-deadline greedy beyond. Ties: larger slack sum, then
// lexicographically smaller subtask-id sequence. Throws NoFeasibleSequence.
Selection select_terms(const std::vector<Term>& pending,
                       const Eigen::VectorXd& x, double t, double u_max,
                       bool parallel = true);

// Best (alternative, order) pair. pin_alternative restricts the search to
// one alternative index; ties across alternatives prefer the lower index.
Selection select(const std::vector<Alternative>& alts,
                 const Eigen::VectorXd& x, double t, double u_max,
                 bool parallel = true, int pin_alternative = -1);

std::vector<Term> remove_completed(std::vector<Term> order, int subtask_id);

}  // namespace stlsynth::seq
