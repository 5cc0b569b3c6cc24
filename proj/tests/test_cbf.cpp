#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "stlsynth/cbf.hpp"
#include "stlsynth/parser.hpp"

using namespace stlsynth;
using namespace stlsynth::cbf;

namespace {

geom::Vec v1(double a) {
  geom::Vec v(1);
  v << a;
  return v;
}

geom::Vec v2(double a, double b) {
  geom::Vec v(2);
  v << a, b;
  return v;
}

stl::InnerFormula inner_of(const std::string& spec) {
  return stl::parse_spec(spec).groups[0].members[0].inner;
}

geom::Box box1(double lo, double hi) { return geom::Box{v1(lo), v1(hi)}; }

}  // namespace

TEST_CASE("primary certificate: budget plus scaled distance") {
  const auto inner = inner_of("F[0,5](box(x,10,11))");
  Deadline dl{5.0, 0.0, false, 0.0};
  auto e = primary_value(v1(9.0), 0.0, inner, dl, 1.0, 30.0);
  CHECK(e.value == doctest::Approx(4.0));
  CHECK(e.grad_x[0] == doctest::Approx(1.0));
  CHECK(e.dt_term == -1.0);

  // budget drains one-for-one with time
  e = primary_value(v1(9.0), 1.0, inner, dl, 1.0, 30.0);
  CHECK(e.value == doctest::Approx(3.0));

  // faster input bound shrinks the distance share
  Deadline tight{1.0, 0.0, false, 0.0};
  e = primary_value(v1(8.0), 0.0, inner, tight, 5.0, 30.0);
  CHECK(e.value == doctest::Approx(0.6));
  CHECK(e.grad_x[0] == doctest::Approx(0.2));
}

TEST_CASE("frozen deadline stops draining") {
  Deadline dl{5.0, 0.0, true, 0.3};
  CHECK(dl.value(100.0) == 0.3);
  CHECK(dl.dt_term() == 0.0);
  const auto inner = inner_of("F[0,5](box(x,10,11))");
  const auto e = primary_value(v1(10.5), 99.0, inner, dl, 1.0, 30.0);
  CHECK(e.value == doctest::Approx(0.8));  // 0.3 + 0.5 inside the box
  CHECK(e.dt_term == 0.0);
}

TEST_CASE("blend of alternatives stays below the best and mixes slopes") {
  const auto innerA = inner_of("F[0,5](box(x,10,11))");
  const auto innerB = inner_of("F[0,5](box(x,2,3))");
  const Deadline dl{5.0, 0.0, false, 0.0};
  const geom::Vec x = v1(9.0);
  const auto a = primary_value(x, 0.0, innerA, dl, 1.0, 30.0);  // 4
  const auto b = primary_value(x, 0.0, innerB, dl, 1.0, 30.0);  // -1
  const auto blend = blend_max({a, b}, 30.0);
  CHECK(blend.value <= std::max(a.value, b.value));
  CHECK(blend.value == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(blend.dt_term == doctest::Approx(-1.0));

  double prev = -1e9;
  for (double beta : {2.0, 8.0, 32.0, 128.0}) {
    const auto e = blend_max({a, b}, beta);
    CHECK(e.value >= prev - 1e-12);  // tightens monotonically toward the max
    prev = e.value;
  }
  CHECK(std::max(a.value, b.value) - prev < 1e-9);

  // a frozen member pulls the blended time term toward zero (the soft
  // weights of far-losing members can dip negative, hence the slack)
  auto frozen = a;
  frozen.dt_term = 0.0;
  const auto mixed = blend_max({frozen, b}, 30.0);
  CHECK(mixed.dt_term <= 1e-9);
  CHECK(mixed.dt_term > -1.0);
}

TEST_CASE("primary gradient matches finite differences in 2-D") {
  const auto inner = inner_of("F[0,5](circle(x,y,7,6,1.5))");
  const Deadline dl{8.0, 0.0, false, 0.0};
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-2.0, 12.0);
  for (int trial = 0; trial < 100; ++trial) {
    const geom::Vec x = v2(u(rng), u(rng));
    if ((v2(7, 6) - x).norm() < 1e-2) continue;
    const auto e = primary_value(x, 1.0, inner, dl, 2.0, 30.0);
    for (int i = 0; i < 2; ++i) {
      geom::Vec xp = x, xm = x;
      xp[i] += 1e-6;
      xm[i] -= 1e-6;
      const double fd = (primary_value(xp, 1.0, inner, dl, 2.0, 30.0).value -
                         primary_value(xm, 1.0, inner, dl, 2.0, 30.0).value) /
                        2e-6;
      CHECK(e.grad_x[i] == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("chain certificate: frozen value and critical index") {
  const geom::TargetSet head = box1(5, 6);
  int critical = -2;
  auto e = secondary_value(v1(3.5), head, 1.0, {{10.0, 2.0}}, &critical);
  CHECK(e.value == doctest::Approx(6.5));  // 10 - 1.5 - 2
  CHECK(critical == 0);
  CHECK(e.grad_x[0] == doctest::Approx(1.0));
  CHECK(e.dt_term == -1.0);

  e = secondary_value(v1(3.5), head, 1.0, {{10.0, 2.0}, {7.0, 4.0}},
                      &critical);
  CHECK(e.value == doctest::Approx(1.5));  // 7 - 1.5 - 4 binds
  CHECK(critical == 1);

  // exact ties resolve to the earliest candidate
  e = secondary_value(v1(3.5), head, 1.0, {{5.0, 1.0}, {6.0, 2.0}},
                      &critical);
  CHECK(e.value == doctest::Approx(2.5));
  CHECK(critical == 0);

  // no later terms: the certificate is vacuous
  e = secondary_value(v1(3.5), head, 1.0, {}, &critical);
  CHECK(std::isinf(e.value));
  CHECK(critical == -1);
}

TEST_CASE("chain certificate lower-bounds every later budget certificate") {
  // Travel legs use the worst-case (supremum) set-to-set distance, so
  // moving deeper into the head buys exactly as much distance credit as it
  // costs toward later sets. That makes b <= h_i hold for every state, not
  // just outside the head, and b >= 0 protects each later budget anywhere.
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> place(-20.0, 20.0);
  std::uniform_real_distribution<double> width(0.3, 6.0);
  std::uniform_real_distribution<double> budget(0.0, 60.0);
  std::uniform_real_distribution<double> extra(0.0, 2.0);
  const double u_max = 1.7;
  int positives = 0, insides = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 3);
    std::vector<geom::TargetSet> sets;
    for (int i = 0; i < k; ++i) {
      const double lo = place(rng);
      sets.push_back(box1(lo, lo + width(rng)));
    }
    const geom::Vec x = v1(place(rng));
    insides += geom::signed_distance(x, sets[0]) > 0.0 ? 1 : 0;

    std::vector<LaterTerm> later;
    std::vector<double> budgets;
    double chain = 0.0;
    for (int i = 1; i < k; ++i) {
      chain += geom::ordered_set_distance(sets[i - 1], sets[i]) / u_max +
               extra(rng);  // hold excess only lengthens the chain
      budgets.push_back(budget(rng));
      later.push_back({budgets.back(), chain});
    }
    const auto b = secondary_value(x, sets[0], u_max, later);
    for (int i = 1; i < k; ++i) {
      const double h =
          budgets[i - 1] + geom::signed_distance(x, sets[i]) / u_max;
      CHECK(h >= b.value - 1e-9);
    }
    positives += b.value >= 0.0 ? 1 : 0;
  }
  CHECK(positives > 50);  // the sweep exercised both outcomes
  CHECK(insides > 50);    // and both sides of the head boundary
}
