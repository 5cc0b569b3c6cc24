#pragma once

#include <Eigen/Dense>
#include <vector>

namespace stlsynth::qp {

// One inequality a . u >= b.
struct Row {
  Eigen::VectorXd a;
  double b = 0.0;
};

enum class Status { Optimal, Infeasible, Stalled };

struct Problem {
  Eigen::MatrixXd H;  // symmetric positive definite
  Eigen::VectorXd c;
  std::vector<Row> rows;
};

struct Solution {
  Status status = Status::Stalled;
  Eigen::VectorXd u;
  std::vector<double> lambda;  // per row, zero when inactive
  std::vector<int> active;     // ascending row indices
  double kkt_residual = 0.0;
  int iterations = 0;
  bool warm_hit = false;  // fast path verified and accepted
};

// Convenience: min 1/2 |u|^2 with no constraints yet.
Problem min_norm_problem(int n);

// Dual active-set method. Starts from the unconstrained minimum, walks in
// the most-violated constraint each iteration, and certifies the result
// against the KKT conditions (residual <= 1e-8 for Optimal). Infeasible
// problems are detected when neither a primal nor a dual step can make
// progress. Ties break toward the lowest row index, so runs are
// deterministic.
Solution solve(const Problem& p);

// Tries an equality solve on the previous active set first; falls back to
// the cold solve when the guess fails full KKT verification.
Solution solve_warm(const Problem& p, const std::vector<int>& warm_active);

// Inner polytope approximation of the input ball |u| <= u_max, as rows.
// 1-D is exact; 2-D uses `facets` sides with vertices on the circle (worst
// direction loses a factor cos(pi/facets)); n >= 3 falls back to the
// inscribed box of half-width u_max/sqrt(n).
std::vector<Row> ball_rows(int n, double u_max, int facets = 32);

}  // namespace stlsynth::qp
