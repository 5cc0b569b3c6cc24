#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "stlsynth/qp.hpp"

using namespace stlsynth::qp;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Problem with_rows(int n, std::vector<Row> rows) {
  Problem p = min_norm_problem(n);
  p.rows = std::move(rows);
  return p;
}

}  // namespace

TEST_CASE("unconstrained and inactive constraints give zero") {
  auto s = solve(min_norm_problem(2));
  CHECK(s.status == Status::Optimal);
  CHECK(s.u.norm() == 0.0);

  s = solve(with_rows(1, {{vec({1}), -5.0}}));
  CHECK(s.status == Status::Optimal);
  CHECK(s.u[0] == doctest::Approx(0.0));
  CHECK(s.active.empty());
}

TEST_CASE("single and double active bounds") {
  auto s = solve(with_rows(1, {{vec({1}), 1.0}}));
  CHECK(s.status == Status::Optimal);
  CHECK(s.u[0] == doctest::Approx(1.0));
  CHECK(s.lambda[0] == doctest::Approx(1.0));

  s = solve(with_rows(2, {{vec({1, 0}), 1.0}}));
  CHECK(s.u[0] == doctest::Approx(1.0));
  CHECK(s.u[1] == doctest::Approx(0.0));

  s = solve(with_rows(2, {{vec({1, 0}), 1.0}, {vec({0, 1}), 1.0}}));
  CHECK(s.u[0] == doctest::Approx(1.0));
  CHECK(s.u[1] == doctest::Approx(1.0));
  CHECK(s.active.size() == 2);

  // min-norm point of a single halfspace lies along its normal
  s = solve(with_rows(2, {{vec({1, 1}), 2.0}}));
  CHECK(s.u[0] == doctest::Approx(1.0));
  CHECK(s.u[1] == doctest::Approx(1.0));
}

TEST_CASE("infeasible rows are detected, not stalled") {
  auto s = solve(with_rows(1, {{vec({1}), 1.0}, {vec({-1}), 0.0}}));
  CHECK(s.status == Status::Infeasible);

  s = solve(with_rows(2, {{vec({1, 0}), 3.0},
                          {vec({-1, 0}), -1.0},
                          {vec({0, 1}), 0.0}}));
  CHECK(s.status == Status::Infeasible);

  // same normals, compatible offsets: feasible
  s = solve(with_rows(2, {{vec({1, 0}), 1.0}, {vec({-1, 0}), -3.0}}));
  CHECK(s.status == Status::Optimal);
  CHECK(s.u[0] == doctest::Approx(1.0));
}

TEST_CASE("KKT certificate on randomized feasible problems") {
  std::mt19937 rng(1234);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> mrg(0.05, 1.0);
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 1 + trial % 3;
    const int m = 1 + static_cast<int>(rng() % 7);
    Problem p = min_norm_problem(n);
    if (trial % 3 == 0) {
      // random SPD objective and linear term
      Eigen::MatrixXd A(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = g(rng);
      p.H = A * A.transpose() + Eigen::MatrixXd::Identity(n, n) * 0.5;
      for (int i = 0; i < n; ++i) p.c[i] = g(rng);
    }
    // rows built around a designated interior point stay feasible
    Eigen::VectorXd u0(n);
    for (int i = 0; i < n; ++i) u0[i] = g(rng);
    for (int k = 0; k < m; ++k) {
      Eigen::VectorXd a(n);
      for (int i = 0; i < n; ++i) a[i] = g(rng);
      if (a.norm() < 1e-3) a[0] += 1.0;
      p.rows.push_back({a, a.dot(u0) - mrg(rng)});
    }
    const auto s = solve(p);
    REQUIRE(s.status == Status::Optimal);
    CHECK(s.kkt_residual <= 1e-8);  // convexity makes this a global certificate
    // objective no worse than the known feasible point
    const double fs = 0.5 * s.u.dot(p.H * s.u) + p.c.dot(s.u);
    const double f0 = 0.5 * u0.dot(p.H * u0) + p.c.dot(u0);
    CHECK(fs <= f0 + 1e-9);
  }
}

TEST_CASE("randomized infeasible problems are flagged") {
  std::mt19937 rng(777);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 3;
    Problem p = min_norm_problem(n);
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a[i] = g(rng);
    if (a.norm() < 1e-3) a[0] += 1.0;
    p.rows.push_back({a, 1.0});
    p.rows.push_back({-a, -0.5});  // a.u >= 1 and a.u <= 0.5
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXd b(n);
      for (int i = 0; i < n; ++i) b[i] = g(rng);
      p.rows.push_back({b, -std::abs(g(rng)) - 1.0});
    }
    const auto s = solve(p);
    CHECK(s.status == Status::Infeasible);
  }
}

TEST_CASE("warm start reproduces the cold solution") {
  std::mt19937 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2;
    Problem p = min_norm_problem(n);
    Eigen::VectorXd u0(n);
    for (int i = 0; i < n; ++i) u0[i] = g(rng);
    for (int k = 0; k < 5; ++k) {
      Eigen::VectorXd a(n);
      for (int i = 0; i < n; ++i) a[i] = g(rng);
      if (a.norm() < 1e-3) a[0] += 1.0;
      p.rows.push_back({a, a.dot(u0) - 0.2});
    }
    const auto cold = solve(p);
    REQUIRE(cold.status == Status::Optimal);

    // nudge the offsets, as consecutive control steps do
    Problem q = p;
    for (auto& row : q.rows) row.b += 1e-3 * g(rng);
    const auto warm = solve_warm(q, cold.active);
    const auto ref = solve(q);
    REQUIRE(warm.status == Status::Optimal);
    REQUIRE(ref.status == Status::Optimal);
    CHECK((warm.u - ref.u).norm() < 1e-7);
    CHECK(warm.kkt_residual <= 1e-8);

    // unchanged problem: the fast path must verify and skip iterations
    const auto same = solve_warm(p, cold.active);
    CHECK(same.warm_hit);
    CHECK((same.u - cold.u).norm() < 1e-9);
  }
}

TEST_CASE("warm start with a stale or bogus active set falls back") {
  Problem p = with_rows(2, {{vec({1, 0}), 1.0}, {vec({0, 1}), 1.0}});
  const auto s = solve_warm(p, {7, -1, 0, 0});
  CHECK(s.status == Status::Optimal);
  CHECK(s.u[0] == doctest::Approx(1.0));
  CHECK(s.u[1] == doctest::Approx(1.0));
}

TEST_CASE("input ball rows, 1-D exact") {
  const auto rows = ball_rows(1, 2.0);
  REQUIRE(rows.size() == 2);
  Problem p = min_norm_problem(1);
  p.rows = rows;
  p.c = vec({-10.0});  // pushes toward +u_max
  auto s = solve(p);
  CHECK(s.u[0] == doctest::Approx(2.0));
  p.c = vec({10.0});
  s = solve(p);
  CHECK(s.u[0] == doctest::Approx(-2.0));
}

TEST_CASE("input ball rows, 2-D polygon geometry") {
  const double u_max = 2.0;
  const int m = 32;
  const auto rows = ball_rows(2, u_max, m);
  REQUIRE(rows.size() == static_cast<size_t>(m));
  // vertices sit exactly on the circle
  for (int k = 0; k < m; ++k) {
    const double th = 2.0 * M_PI * k / m;
    const Eigen::VectorXd v = u_max * vec({std::cos(th), std::sin(th)});
    for (const auto& r : rows) CHECK(r.a.dot(v) >= r.b - 1e-12);
  }
  // anything within the apothem is feasible; anything beyond the circle not
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  for (int trial = 0; trial < 200; ++trial) {
    const double th = ang(rng);
    Eigen::VectorXd dir = vec({std::cos(th), std::sin(th)});
    const Eigen::VectorXd in = 0.999 * u_max * std::cos(M_PI / m) * dir;
    bool ok = true;
    for (const auto& r : rows) ok = ok && r.a.dot(in) >= r.b - 1e-12;
    CHECK(ok);
    const Eigen::VectorXd out = 1.001 * u_max * dir;
    bool violated = false;
    for (const auto& r : rows) violated = violated || r.a.dot(out) < r.b;
    CHECK(violated);
  }
}

TEST_CASE("input ball rows, higher dimensions use the inscribed box") {
  const auto rows = ball_rows(3, 3.0);
  REQUIRE(rows.size() == 6);
  Eigen::VectorXd corner = vec({1, 1, 1}) * (3.0 / std::sqrt(3.0));
  CHECK(corner.norm() == doctest::Approx(3.0));
  for (const auto& r : rows) CHECK(r.a.dot(corner) >= r.b - 1e-12);
}

TEST_CASE("deterministic tie-breaking") {
  // two identical rows: the lower index becomes active
  Problem p = with_rows(1, {{vec({1}), 1.0}, {vec({1}), 1.0}});
  const auto a = solve(p);
  const auto b = solve(p);
  REQUIRE(a.status == Status::Optimal);
  CHECK(a.active == b.active);
  REQUIRE(!a.active.empty());
  CHECK(a.active[0] == 0);
  CHECK(a.u[0] == doctest::Approx(1.0));
}
