#include "stlsynth/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stlsynth::stl {
namespace {

geom::Vec subvector(const geom::Vec& x, const std::vector<int>& dims) {
  geom::Vec v(dims.size());
  for (size_t i = 0; i < dims.size(); ++i) v[i] = x[dims[i]];
  return v;
}

struct PredEval {
  double value;
  geom::Vec grad;  // full state dimension
};

PredEval eval_pred(const geom::Vec& x, const Predicate& p) {
  const auto sd = geom::signed_distance_grad(subvector(x, p.dims), p.set);
  PredEval out{sd.value, geom::Vec::Zero(x.size())};
  for (size_t i = 0; i < p.dims.size(); ++i) out.grad[p.dims[i]] = sd.grad[i];
  return out;
}

}  // namespace

double smooth_min(const std::vector<double>& c, double beta) {
  if (c.empty()) throw std::invalid_argument("smooth_min of nothing");
  const double m = *std::min_element(c.begin(), c.end());
  double s = 0.0;
  for (double v : c) s += std::exp(-beta * (v - m));
  return m - std::log(s) / beta;  // s >= 1, so this never exceeds m
}

double smooth_max(const std::vector<double>& c, double beta) {
  if (c.empty()) throw std::invalid_argument("smooth_max of nothing");
  const double M = *std::max_element(c.begin(), c.end());
  double num = 0.0, den = 0.0;
  for (double v : c) {
    const double w = std::exp(beta * (v - M));
    num += (v - M) * w;  // each term <= 0
    den += w;            // >= 1
  }
  return M + num / den;
}

std::vector<double> smooth_min_weights(const std::vector<double>& c,
                                       double beta) {
  const double m = *std::min_element(c.begin(), c.end());
  std::vector<double> w(c.size());
  double s = 0.0;
  for (size_t i = 0; i < c.size(); ++i) {
    w[i] = std::exp(-beta * (c[i] - m));
    s += w[i];
  }
  for (double& wi : w) wi /= s;
  return w;
}

std::vector<double> smooth_max_weights(const std::vector<double>& c,
                                       double beta) {
  const double v = smooth_max(c, beta);
  const double M = *std::max_element(c.begin(), c.end());
  std::vector<double> p(c.size());
  double s = 0.0;
  for (size_t i = 0; i < c.size(); ++i) {
    p[i] = std::exp(beta * (c[i] - M));
    s += p[i];
  }
  for (size_t i = 0; i < c.size(); ++i)
    p[i] = p[i] / s * (1.0 + beta * (c[i] - v));
  return p;
}

double exact_robustness(const geom::Vec& x, const InnerFormula& f) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& clause : f.clauses) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& p : clause)
      worst = std::min(worst, eval_pred(x, p).value);
    best = std::max(best, worst);
  }
  return best;
}

ValueGrad smooth_robustness(const geom::Vec& x, const InnerFormula& f,
                            double beta) {
  std::vector<double> clauseVals;
  std::vector<geom::Vec> clauseGrads;
  for (const auto& clause : f.clauses) {
    std::vector<PredEval> evals;
    std::vector<double> vals;
    for (const auto& p : clause) {
      evals.push_back(eval_pred(x, p));
      vals.push_back(evals.back().value);
    }
    clauseVals.push_back(smooth_min(vals, beta));
    const auto w = smooth_min_weights(vals, beta);
    geom::Vec g = geom::Vec::Zero(x.size());
    for (size_t i = 0; i < evals.size(); ++i) g += w[i] * evals[i].grad;
    clauseGrads.push_back(std::move(g));
  }
  ValueGrad out;
  out.value = smooth_max(clauseVals, beta);
  const auto w = smooth_max_weights(clauseVals, beta);
  out.grad = geom::Vec::Zero(x.size());
  for (size_t i = 0; i < clauseGrads.size(); ++i)
    out.grad += w[i] * clauseGrads[i];
  return out;
}

}  // namespace stlsynth::stl
