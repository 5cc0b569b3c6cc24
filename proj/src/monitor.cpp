#include "stlsynth/monitor.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "stlsynth/robustness.hpp"

namespace stlsynth::stl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> window_indices(const Trajectory& traj, double w0, double w1) {
  std::vector<int> idx;
  const double slop = traj.dt / 2.0;
  for (int i = 0; i < static_cast<int>(traj.samples.size()); ++i) {
    const double t = traj.samples[i].t;
    if (t >= w0 - slop && t <= w1 + slop) idx.push_back(i);
  }
  if (idx.empty())
    throw std::runtime_error("trajectory has no samples in a formula window");
  return idx;
}

double rho(const Trajectory& traj, int i, const InnerFormula& f) {
  return exact_robustness(traj.samples[i].x, f);
}

}  // namespace

double subtask_robustness(const Trajectory& traj, const Subtask& st) {
  const auto& op = st.op;
  switch (op.kind) {
    case OpKind::Finally: {
      double best = -kInf;
      for (int i : window_indices(traj, op.a, op.b))
        best = std::max(best, rho(traj, i, st.inner));
      return best;
    }
    case OpKind::Globally: {
      double worst = kInf;
      for (int i : window_indices(traj, op.a, op.b))
        worst = std::min(worst, rho(traj, i, st.inner));
      return worst;
    }
    case OpKind::FinallyGlobally: {
      double best = -kInf;
      for (int i : window_indices(traj, op.a, op.b)) {
        const double t = traj.samples[i].t;
        double worst = kInf;
        for (int j : window_indices(traj, t + op.c, t + op.d))
          worst = std::min(worst, rho(traj, j, st.inner));
        best = std::max(best, worst);
      }
      return best;
    }
    case OpKind::GloballyFinally: {
      double worst = kInf;
      for (int i : window_indices(traj, op.a, op.b)) {
        const double t = traj.samples[i].t;
        double best = -kInf;
        for (int j : window_indices(traj, t + op.c, t + op.d))
          best = std::max(best, rho(traj, j, st.inner));
        worst = std::min(worst, best);
      }
      return worst;
    }
    case OpKind::Until: {
      // prefix-min of the hold condition up to and including each candidate
      double best = -kInf;
      double hold = kInf;
      int next = 0;
      for (int i : window_indices(traj, op.a, op.b)) {
        for (; next <= i; ++next) hold = std::min(hold, rho(traj, next, *st.until_left));
        best = std::max(best, std::min(rho(traj, i, st.inner), hold));
      }
      return best;
    }
  }
  throw std::logic_error("unreachable");
}

MonitorResult monitor(const Trajectory& traj, const SpecTree& spec) {
  if (traj.samples.empty() || traj.dt <= 0.0)
    throw std::invalid_argument("empty trajectory");
  const double h = horizon(spec);
  if (traj.samples.back().t < h - traj.dt / 2.0 - 1e-12)
    throw std::runtime_error("trajectory stops short of the horizon");
  MonitorResult out;
  out.robustness = kInf;
  for (const auto& g : spec.groups) {
    double best = -kInf;
    for (const auto& m : g.members)
      best = std::max(best, subtask_robustness(traj, m));
    out.robustness = std::min(out.robustness, best);
  }
  out.satisfied = out.robustness >= 0.0;
  return out;
}

}  // namespace stlsynth::stl
