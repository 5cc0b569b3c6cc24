#include "stlsynth/cbf.hpp"

#include <limits>
#include <stdexcept>

namespace stlsynth::cbf {

Evaluation primary_value(const geom::Vec& x, double t,
                         const stl::InnerFormula& inner, const Deadline& dl,
                         double u_max, double beta) {
  const auto rob = stl::smooth_robustness(x, inner, beta);
  Evaluation out;
  out.value = dl.value(t) + rob.value / u_max;
  out.grad_x = rob.grad / u_max;
  out.dt_term = dl.dt_term();
  return out;
}

Evaluation blend_max(const std::vector<Evaluation>& parts, double beta) {
  if (parts.empty()) throw std::invalid_argument("blend of nothing");
  if (parts.size() == 1) return parts[0];
  std::vector<double> vals;
  for (const auto& p : parts) vals.push_back(p.value);
  Evaluation out;
  out.value = stl::smooth_max(vals, beta);
  const auto w = stl::smooth_max_weights(vals, beta);
  out.grad_x = geom::Vec::Zero(parts[0].grad_x.size());
  out.dt_term = 0.0;
  for (size_t i = 0; i < parts.size(); ++i) {
    out.grad_x += w[i] * parts[i].grad_x;
    out.dt_term += w[i] * parts[i].dt_term;
  }
  return out;
}

Evaluation secondary_value(const geom::Vec& x, const geom::TargetSet& head,
                           double u_max, const std::vector<LaterTerm>& later,
                           int* critical) {
  const auto sd = geom::signed_distance_grad(x, head);
  Evaluation out;
  out.grad_x = sd.grad / u_max;
  out.dt_term = -1.0;
  out.value = std::numeric_limits<double>::infinity();
  int arg = -1;
  for (size_t i = 0; i < later.size(); ++i) {
    const double v = later[i].deadline_value + sd.value / u_max -
                     later[i].chain;
    if (v < out.value) {
      out.value = v;
      arg = static_cast<int>(i);
    }
  }
  if (critical) *critical = arg;
  return out;
}

}  // namespace stlsynth::cbf
