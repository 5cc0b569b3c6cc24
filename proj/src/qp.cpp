#include "stlsynth/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stlsynth::qp {
namespace {

constexpr double kStepTol = 1e-10;
constexpr double kViolTol = 1e-9;
constexpr double kKktTol = 1e-8;
constexpr double kInf = std::numeric_limits<double>::infinity();

double kkt_residual(const Problem& p, const Eigen::VectorXd& u,
                    const std::vector<double>& lambda) {
  Eigen::VectorXd g = p.H * u + p.c;
  for (size_t i = 0; i < p.rows.size(); ++i) g -= lambda[i] * p.rows[i].a;
  double res = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
  for (size_t i = 0; i < p.rows.size(); ++i) {
    const double s = p.rows[i].a.dot(u) - p.rows[i].b;
    res = std::max(res, -s);
    res = std::max(res, -lambda[i]);
    res = std::max(res, std::abs(lambda[i] * s));
  }
  return res;
}

Solution finish(const Problem& p, Eigen::VectorXd u,
                std::vector<double> lambda, std::vector<int> active,
                int iters) {
  Solution out;
  out.u = std::move(u);
  out.lambda = std::move(lambda);
  std::sort(active.begin(), active.end());
  out.active = std::move(active);
  out.iterations = iters;
  out.kkt_residual = kkt_residual(p, out.u, out.lambda);
  out.status = out.kkt_residual <= kKktTol ? Status::Optimal : Status::Stalled;
  return out;
}

}  // namespace

Problem min_norm_problem(int n) {
  Problem p;
  p.H = Eigen::MatrixXd::Identity(n, n);
  p.c = Eigen::VectorXd::Zero(n);
  return p;
}

Solution solve(const Problem& p) {
  const int n = static_cast<int>(p.H.rows());
  const int m = static_cast<int>(p.rows.size());
  const Eigen::LLT<Eigen::MatrixXd> hf(p.H);
  if (hf.info() != Eigen::Success)
    throw std::invalid_argument("objective matrix is not positive definite");

  Eigen::VectorXd u = hf.solve(-p.c);
  std::vector<double> lambda(m, 0.0);
  std::vector<int> active;
  int iters = 0;
  const int cap = 60 * (m + 1) + 200;

  while (true) {
    // most violated row, lowest index on ties
    int viol = -1;
    double worst = -kViolTol;
    for (int i = 0; i < m; ++i) {
      const double s = p.rows[i].a.dot(u) - p.rows[i].b;
      if (s < worst) {
        worst = s;
        viol = i;
      }
    }
    if (viol < 0) return finish(p, std::move(u), std::move(lambda),
                                std::move(active), iters);

    // work this row until it joins the active set or infeasibility shows
    while (true) {
      if (++iters > cap) {
        Solution out;
        out.status = Status::Stalled;
        out.u = u;
        out.lambda = lambda;
        out.iterations = iters;
        out.kkt_residual = kkt_residual(p, u, lambda);
        return out;
      }
      const Eigen::VectorXd& ap = p.rows[viol].a;
      const Eigen::VectorXd hiAp = hf.solve(ap);
      const int k = static_cast<int>(active.size());
      Eigen::VectorXd z = hiAp;
      Eigen::VectorXd r(k);
      if (k > 0) {
        Eigen::MatrixXd N(n, k);
        for (int j = 0; j < k; ++j) N.col(j) = p.rows[active[j]].a;
        const Eigen::MatrixXd hiN = hf.solve(N);
        r = (N.transpose() * hiN).ldlt().solve(N.transpose() * hiAp);
        z -= hiN * r;
      }
      const double zAp = z.dot(ap);
      const double sp = ap.dot(u) - p.rows[viol].b;

      double t1 = kInf;
      int drop = -1;
      for (int j = 0; j < k; ++j) {
        if (r[j] > kStepTol) {
          const double cand = lambda[active[j]] / r[j];
          if (cand < t1) {
            t1 = cand;
            drop = j;
          }
        }
      }
      const double t2 = zAp > kStepTol ? -sp / zAp : kInf;
      if (t1 == kInf && t2 == kInf) {
        // no direction improves the dual: the constraints are inconsistent
        Solution out;
        out.status = Status::Infeasible;
        out.u = u;
        out.lambda = lambda;
        out.iterations = iters;
        return out;
      }
      const double t = std::min(t1, t2);
      for (int j = 0; j < k; ++j) lambda[active[j]] -= t * r[j];
      lambda[viol] += t;
      if (zAp > kStepTol) u += t * z;
      if (t2 <= t1) {
        active.push_back(viol);
        break;
      }
      lambda[active[drop]] = 0.0;
      active.erase(active.begin() + drop);
    }
  }
}

Solution solve_warm(const Problem& p, const std::vector<int>& warm_active) {
  const int n = static_cast<int>(p.H.rows());
  const int m = static_cast<int>(p.rows.size());
  std::vector<int> act;
  for (int i : warm_active)
    if (i >= 0 && i < m &&
        std::find(act.begin(), act.end(), i) == act.end())
      act.push_back(i);

  if (static_cast<int>(act.size()) <= n) {
    const Eigen::LLT<Eigen::MatrixXd> hf(p.H);
    Eigen::VectorXd u;
    std::vector<double> lambda(m, 0.0);
    if (act.empty()) {
      u = hf.solve(-p.c);
    } else {
      const int k = static_cast<int>(act.size());
      Eigen::MatrixXd N(n, k);
      Eigen::VectorXd bA(k);
      for (int j = 0; j < k; ++j) {
        N.col(j) = p.rows[act[j]].a;
        bA[j] = p.rows[act[j]].b;
      }
      const Eigen::MatrixXd hiN = hf.solve(N);
      const Eigen::VectorXd lamA =
          (N.transpose() * hiN).ldlt().solve(bA + N.transpose() * hf.solve(p.c));
      u = hf.solve(N * lamA - p.c);
      for (int j = 0; j < k; ++j) lambda[act[j]] = lamA[j];
    }
    const double res = kkt_residual(p, u, lambda);
    if (res <= kKktTol) {
      Solution out;
      out.status = Status::Optimal;
      out.u = std::move(u);
      out.lambda = std::move(lambda);
      std::sort(act.begin(), act.end());
      out.active = std::move(act);
      out.kkt_residual = res;
      out.iterations = 0;
      out.warm_hit = true;
      return out;
    }
  }
  return solve(p);
}

std::vector<Row> ball_rows(int n, double u_max, int facets) {
  if (n < 1 || u_max <= 0) throw std::invalid_argument("bad input bound");
  std::vector<Row> rows;
  if (n == 1) {
    Eigen::VectorXd a(1);
    a << 1;
    rows.push_back({a, -u_max});
    a << -1;
    rows.push_back({a, -u_max});
    return rows;
  }
  if (n == 2) {
    if (facets < 3) throw std::invalid_argument("need at least 3 facets");
    const double apothem = u_max * std::cos(M_PI / facets);
    for (int k = 0; k < facets; ++k) {
      const double th = 2.0 * M_PI * (k + 0.5) / facets;
      Eigen::VectorXd a(2);
      a << -std::cos(th), -std::sin(th);
      rows.push_back({a, -apothem});
    }
    return rows;
  }
  const double half = u_max / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    a[i] = 1;
    rows.push_back({a, -half});
    a[i] = -1;
    rows.push_back({a, -half});
  }
  return rows;
}

}  // namespace stlsynth::qp
