#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

namespace stlsynth::geom {

using Vec = Eigen::VectorXd;

// Compact target sets. Disc is 2-D, Box is any dimension, Polytope is a
// bounded 2-D halfspace intersection a_i . x <= b_i.
struct Disc {
  Eigen::Vector2d center;
  double radius = 0.0;
};

struct Box {
  Vec lo, hi;
};

struct Polytope {
  Eigen::MatrixX2d normals;
  Eigen::VectorXd offsets;
  std::vector<Eigen::Vector2d> vertices;  // hull order, filled by the ctor

  Polytope(Eigen::MatrixX2d a, Eigen::VectorXd b);
};

using TargetSet = std::variant<Disc, Box, Polytope>;

int set_dim(const TargetSet& s);

struct SignedDistance {
  double value = 0.0;  // penetration depth inside, minus distance outside
  Vec grad;            // unit norm except at ties, where the lowest-index
                       // face/boundary term wins
};

double signed_distance(const Vec& x, const TargetSet& s);
SignedDistance signed_distance_grad(const Vec& x, const TargetSet& s);

// Plain (unsigned) distance from a point to a set; zero inside.
double point_set_distance(const Vec& x, const TargetSet& s);

bool contains(const TargetSet& outer, const TargetSet& inner);

// Nearest point of s to x; x itself when inside.
Vec project_point(const TargetSet& s, const Vec& x);

// Point of s closest to t, by alternating projection (both sets convex).
Vec nearest_point_to(const TargetSet& s, const TargetSet& t);

double diameter(const TargetSet& s);

// Points on the boundary of s. Boxes return their vertex set (enough for a
// supremum of a convex function); discs and polytopes get k samples.
std::vector<Vec> boundary_samples(const TargetSet& s, int k);

// sup_{x in from} dist(x, to) by boundary sampling. The parallel flag picks
// the OpenMP kernel; both paths reduce with an exact max, so the results are
// bit-identical.
double sampled_sup_distance(const TargetSet& from, const TargetSet& to,
                            int samples, bool parallel);
double sampled_sup_distance_serial(const TargetSet& from, const TargetSet& to,
                                   int samples);

// Worst-case set-to-set distance: closed forms for disc/disc and box/box,
// boundary sampling (720 samples by default) for the mixed pairs.
double ordered_set_distance(const TargetSet& from, const TargetSet& to,
                            int samples = 720);

struct TravelTimes {
  std::vector<double> to_first;  // signed: negative once inside the set
  Eigen::MatrixXd between;       // between(i, j) = Dist(P_i, P_j) / u_max
};

TravelTimes travel_times(const Vec& x, const std::vector<TargetSet>& sets,
                         double u_max);

}  // namespace stlsynth::geom
