#pragma once

#include <vector>

#include "stlsynth/robustness.hpp"

namespace stlsynth::cbf {

// Remaining time budget of one subtask. Counts down in real time until a
// hold phase freezes it at the margin left.
struct Deadline {
  double r0 = 0.0;  // initial budget
  double t0 = 0.0;  // wall time the budget started counting
  bool frozen = false;
  double frozen_r = 0.0;

  double value(double t) const { return frozen ? frozen_r : r0 - (t - t0); }
  double dt_term() const { return frozen ? 0.0 : -1.0; }
};

struct Evaluation {
  double value = 0.0;
  geom::Vec grad_x;
  double dt_term = 0.0;
};

// Certificate that the active reach target is still attainable in the time
// left: deadline plus smoothed robustness converted to travel time. The
// value stays nonnegative exactly when the worst-case dash at u_max can
// still make it.
Evaluation primary_value(const geom::Vec& x, double t,
                         const stl::InnerFormula& inner, const Deadline& dl,
                         double u_max, double beta);

// Soft maximum over alternatives of a disjunction; gradients and time terms
// mix with the same weights, so the blend stays differentiable.
Evaluation blend_max(const std::vector<Evaluation>& parts, double beta);

// One pending subtask beyond the head: its current budget and the travel
// plus hold time accumulated between the head and it.
struct LaterTerm {
  double deadline_value = 0.0;
  double chain = 0.0;
};

// Certificate that chasing the head does not starve any later deadline:
// min_i of (budget_i + signed distance to the head / u_max - chain_i).
// The state gradient is shared by every candidate; `critical` reports the
// index attaining the min (lowest wins ties), or -1 when `later` is empty.
Evaluation secondary_value(const geom::Vec& x, const geom::TargetSet& head,
                           double u_max, const std::vector<LaterTerm>& later,
                           int* critical = nullptr);

}  // namespace stlsynth::cbf
