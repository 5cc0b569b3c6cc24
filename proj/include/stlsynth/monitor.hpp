#pragma once

#include <vector>

#include "stlsynth/stl_ast.hpp"

namespace stlsynth::stl {

struct Sample {
  double t = 0.0;
  geom::Vec x;
  geom::Vec u;  // input applied at t; may be empty on the final sample
};

struct Trajectory {
  double dt = 0.0;
  std::vector<Sample> samples;
};

struct MonitorResult {
  bool satisfied = false;
  double robustness = 0.0;
};

// Exact sampled-time robustness of one temporal subtask at time zero.
// Window membership allows half a sample step of slack on each end.
double subtask_robustness(const Trajectory& traj, const Subtask& st);

// min over conjunction groups, max over disjunction members. Throws when
// the trajectory stops short of the specification horizon.
MonitorResult monitor(const Trajectory& traj, const SpecTree& spec);

}  // namespace stlsynth::stl
