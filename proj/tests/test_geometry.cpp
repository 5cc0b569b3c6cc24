#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "stlsynth/geometry.hpp"

using namespace stlsynth::geom;

namespace {

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Box box1(double lo, double hi) { return Box{v1(lo), v1(hi)}; }

Box box2(double xlo, double xhi, double ylo, double yhi) {
  return Box{v2(xlo, ylo), v2(xhi, yhi)};
}

Disc disc(double cx, double cy, double r) {
  return Disc{Eigen::Vector2d(cx, cy), r};
}

Polytope square(double half) {
  Eigen::MatrixX2d a(4, 2);
  a << 1, 0, -1, 0, 0, 1, 0, -1;
  Eigen::VectorXd b(4);
  b << half, half, half, half;
  return Polytope(a, b);
}

// Central finite differences, for checking analytic gradients away from
// kinks.
Vec fd_grad(const Vec& x, const TargetSet& s, double h = 1e-6) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (signed_distance(xp, s) - signed_distance(xm, s)) / (2.0 * h);
  }
  return g;
}

// Dense boundary-grid supremum, an independent check on the closed forms.
double brute_sup(const TargetSet& from, const TargetSet& to, int n = 20000) {
  return sampled_sup_distance_serial(from, to, n);
}

}  // namespace

TEST_CASE("disc signed distance and gradient") {
  const TargetSet d = disc(0, 0, 1);
  auto r = signed_distance_grad(v2(2, 0), d);
  CHECK(r.value == doctest::Approx(-1.0));
  CHECK(r.grad[0] == doctest::Approx(-1.0));
  CHECK(r.grad[1] == doctest::Approx(0.0));

  r = signed_distance_grad(v2(0, 0), d);
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(r.grad.norm() == doctest::Approx(1.0));  // kink resolved to a unit dir

  CHECK(signed_distance(v2(0, 0.5), d) == doctest::Approx(0.5));
  CHECK(signed_distance(v2(0, 1), d) == doctest::Approx(0.0));
}

TEST_CASE("box signed distance, 1-D and 2-D") {
  CHECK(signed_distance(v1(2.5), box1(2, 3)) == doctest::Approx(0.5));
  CHECK(signed_distance(v1(8), box1(10, 11)) == doctest::Approx(-2.0));
  CHECK(signed_distance(v1(12), box1(10, 11)) == doctest::Approx(-1.0));

  const TargetSet b = box2(0, 4, 0, 2);
  CHECK(signed_distance(v2(1, 1), b) == doctest::Approx(1.0));
  CHECK(signed_distance(v2(5, 3), b) == doctest::Approx(-std::sqrt(2.0)));
  // Inside at a lo/hi tie the lowest-index face wins.
  auto r = signed_distance_grad(v2(2, 1), b);
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(r.grad[1] == doctest::Approx(1.0));
}

TEST_CASE("polytope construction and distances") {
  const Polytope sq = square(1.0);
  CHECK(sq.vertices.size() == 4);
  const TargetSet s = sq;
  CHECK(signed_distance(v2(0, 0), s) == doctest::Approx(1.0));
  CHECK(signed_distance(v2(2, 0), s) == doctest::Approx(-1.0));
  CHECK(signed_distance(v2(2, 2), s) == doctest::Approx(-std::sqrt(2.0)));

  Eigen::MatrixX2d a(2, 2);
  a << 1, 0, 0, 1;
  Eigen::VectorXd b(2);
  b << 1, 1;
  CHECK_THROWS_AS(Polytope(a, b), std::invalid_argument);

  Eigen::MatrixX2d a3(3, 2);
  a3 << 1, 0, -1, 0, 0, 1;  // open below
  Eigen::VectorXd b3(3);
  b3 << 1, 1, 1;
  CHECK_THROWS_AS(Polytope(a3, b3), std::invalid_argument);
}

TEST_CASE("ordered set distance closed forms") {
  CHECK(ordered_set_distance(box1(5, 6), box1(7, 8)) == doctest::Approx(2.0));
  CHECK(ordered_set_distance(box1(10, 11), box1(4, 5)) ==
        doctest::Approx(6.0));
  CHECK(ordered_set_distance(box1(4, 5), box1(10, 11)) ==
        doctest::Approx(6.0));
  CHECK(ordered_set_distance(box1(4, 6), box1(4, 6)) == doctest::Approx(0.0));
  CHECK(ordered_set_distance(box1(4.4, 4.6), box1(4, 5)) ==
        doctest::Approx(0.0));

  CHECK(ordered_set_distance(disc(0, 0, 1), disc(5, 0, 1)) ==
        doctest::Approx(5.0));
  CHECK(ordered_set_distance(disc(0, 0, 0.5), disc(0, 0, 2)) ==
        doctest::Approx(0.0));
  CHECK(ordered_set_distance(disc(0, 0, 2), disc(0, 0, 0.5)) ==
        doctest::Approx(1.5));
}

TEST_CASE("closed forms agree with a dense boundary supremum") {
  const TargetSet a = disc(7, 6, 1.5);
  const TargetSet b = disc(2, 5, 0.5);
  CHECK(ordered_set_distance(a, b) ==
        doctest::Approx(brute_sup(a, b)).epsilon(1e-4));

  const TargetSet ba = box2(0, 1, 0, 1);
  const TargetSet bb = box2(3, 5, 0, 4);
  CHECK(ordered_set_distance(ba, bb) ==
        doctest::Approx(brute_sup(ba, bb)).epsilon(1e-4));
}

TEST_CASE("mixed-pair distance by boundary sampling") {
  // Disc inside a box: supremum is zero.
  CHECK(ordered_set_distance(disc(0, 0, 1), box2(-2, 2, -2, 2)) ==
        doctest::Approx(0.0));
  // Box corner (1,1) is the farthest point from the unit disc.
  CHECK(ordered_set_distance(box2(0, 1, 0, 1), disc(0, 0, 1)) ==
        doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-6));
  const TargetSet p = square(1.0);
  CHECK(ordered_set_distance(p, disc(0, 0, 1)) ==
        doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-4));
}

TEST_CASE("serial and parallel supremum kernels match exactly") {
  const TargetSet a = disc(1, 2, 1.25);
  const TargetSet b = box2(4, 6, -1, 0);
  for (int n : {16, 257, 720, 4096}) {
    const double s = sampled_sup_distance_serial(a, b, n);
    const double p = sampled_sup_distance(a, b, n, true);
    CHECK(s == p);  // max-reduction is exact, so bitwise equality holds
  }
}

TEST_CASE("diameter") {
  CHECK(diameter(disc(3, 3, 1)) == doctest::Approx(2.0));
  CHECK(diameter(box1(4, 5)) == doctest::Approx(1.0));
  CHECK(diameter(box2(0, 3, 0, 4)) == doctest::Approx(5.0));
  CHECK(diameter(square(1.0)) == doctest::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("containment") {
  CHECK(contains(box2(-2, 2, -2, 2), disc(0, 0, 1)));
  CHECK_FALSE(contains(box2(-2, 2, -2, 2), disc(1.5, 0, 1)));
  CHECK(contains(disc(0, 0, 3), box2(-1, 1, -1, 1)));
  CHECK_FALSE(contains(disc(0, 0, 1), box2(-1, 1, -1, 1)));
  CHECK(contains(disc(0, 0, 2), disc(0.5, 0, 1)));
  CHECK_FALSE(contains(disc(0, 0, 2), disc(1.5, 0, 1)));
  CHECK(contains(box1(0, 10), box1(2, 3)));
  CHECK_FALSE(contains(box1(2, 3), box1(0, 10)));
}

TEST_CASE("travel times") {
  std::vector<TargetSet> sets{box1(10, 11), box1(4, 5)};
  const auto tt = travel_times(v1(8), sets, 2.0);
  CHECK(tt.to_first[0] == doctest::Approx(1.0));
  CHECK(tt.to_first[1] == doctest::Approx(1.5));
  CHECK(tt.between(0, 1) == doctest::Approx(3.0));
  CHECK(tt.between(1, 0) == doctest::Approx(3.0));
  CHECK(tt.between(0, 0) == 0.0);

  // Inside a set the time is negative: the deadline term earns slack.
  const auto in = travel_times(v1(4.5), sets, 2.0);
  CHECK(in.to_first[1] == doctest::Approx(-0.25));
}

TEST_CASE("gradients match finite differences away from kinks") {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  const std::vector<TargetSet> sets{disc(0.5, -1, 1.5), box2(-1, 2, 0, 3),
                                    square(2.0)};
  int checked = 0;
  while (checked < 300) {
    const Vec x = v2(u(rng), u(rng));
    for (const auto& s : sets) {
      // Skip points close to a gradient kink, where finite differences
      // straddle two branches.
      if (const auto* d = std::get_if<Disc>(&s)) {
        if ((Eigen::Vector2d(x) - d->center).norm() < 1e-2) continue;
      }
      bool nearKink = false;
      if (const auto* b = std::get_if<Box>(&s)) {
        for (int a = 0; a < 2; ++a)
          nearKink = nearKink || std::abs(x[a] - b->lo[a]) < 1e-2 ||
                     std::abs(x[a] - b->hi[a]) < 1e-2;
        if (signed_distance(x, s) > 0) {
          double s1 = 1e9, s2 = 1e9;
          for (int a = 0; a < 2; ++a)
            for (double f : {x[a] - b->lo[a], b->hi[a] - x[a]}) {
              if (f < s1) {
                s2 = s1;
                s1 = f;
              } else if (f < s2) {
                s2 = f;
              }
            }
          nearKink = nearKink || s2 - s1 < 1e-2;
        }
      }
      if (const auto* p = std::get_if<Polytope>(&s)) {
        const Eigen::VectorXd slack =
            p->offsets - p->normals * Eigen::Vector2d(x);
        std::vector<double> sl(slack.data(), slack.data() + slack.size());
        std::sort(sl.begin(), sl.end());
        nearKink = std::abs(sl[0]) < 1e-2 || sl[1] - sl[0] < 1e-2;
        for (const auto& vert : p->vertices)
          nearKink = nearKink || (Eigen::Vector2d(x) - vert).norm() < 2e-2;
      }
      if (nearKink) continue;
      const auto r = signed_distance_grad(x, s);
      const Vec g = fd_grad(x, s);
      CHECK((r.grad - g).norm() < 1e-4);
      CHECK(r.grad.norm() == doctest::Approx(1.0).epsilon(1e-6));
      ++checked;
    }
  }
}

TEST_CASE("signed distance is 1-Lipschitz") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  const std::vector<TargetSet> sets{disc(1, 1, 2), box2(-3, 0, -1, 4),
                                    square(1.5)};
  for (int i = 0; i < 500; ++i) {
    const Vec x = v2(u(rng), u(rng));
    const Vec y = v2(u(rng), u(rng));
    for (const auto& s : sets) {
      const double dx = signed_distance(x, s);
      const double dy = signed_distance(y, s);
      CHECK(std::abs(dx - dy) <= (x - y).norm() + 1e-9);
    }
  }
}
