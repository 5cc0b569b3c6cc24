#pragma once

#include <vector>

#include "stlsynth/stl_ast.hpp"

namespace stlsynth::stl {

// Log-sum-exp underapproximations of min and max. Both are lower bounds of
// the exact value, and the implementations keep that property in floating
// point by factoring out the extreme element.
double smooth_min(const std::vector<double>& c, double beta);
double smooth_max(const std::vector<double>& c, double beta);

// d smooth_min / d c_i: the softmin weights, nonnegative, summing to one.
std::vector<double> smooth_min_weights(const std::vector<double>& c,
                                       double beta);
// d smooth_max / d c_i: softmax partials, summing to one (can be negative
// for elements far below the max).
std::vector<double> smooth_max_weights(const std::vector<double>& c,
                                       double beta);

struct ValueGrad {
  double value = 0.0;
  geom::Vec grad;
};

// Exact robustness of a disjunctive-normal-form region formula at a point:
// max over clauses of min over predicates of signed distance.
double exact_robustness(const geom::Vec& x, const InnerFormula& f);

// Smoothed robustness with gradient; a guaranteed lower bound on the exact
// value for every beta > 0.
ValueGrad smooth_robustness(const geom::Vec& x, const InnerFormula& f,
                            double beta);

}  // namespace stlsynth::stl
