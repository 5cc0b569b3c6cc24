#include "stlsynth/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stlsynth::geom {
namespace {

constexpr double kFeasTol = 1e-7;

std::vector<Vec> box_vertices(const Box& b) {
  const int n = static_cast<int>(b.lo.size());
  std::vector<Vec> out;
  out.reserve(1u << n);
  for (int mask = 0; mask < (1 << n); ++mask) {
    Vec v(n);
    for (int a = 0; a < n; ++a) v[a] = (mask >> a & 1) ? b.hi[a] : b.lo[a];
    out.push_back(std::move(v));
  }
  return out;
}

double point_segment_distance(const Eigen::Vector2d& p,
                              const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b,
                              Eigen::Vector2d* proj = nullptr) {
  const Eigen::Vector2d d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Eigen::Vector2d q = a + t * d;
  if (proj) *proj = q;
  return (p - q).norm();
}

}  // namespace

Polytope::Polytope(Eigen::MatrixX2d a, Eigen::VectorXd b)
    : normals(std::move(a)), offsets(std::move(b)) {
  const int m = static_cast<int>(normals.rows());
  if (m < 3 || offsets.size() != m)
    throw std::invalid_argument("polytope needs at least 3 halfspaces");
  for (int i = 0; i < m; ++i) {
    const double n = normals.row(i).norm();
    if (n < 1e-12) throw std::invalid_argument("zero polytope normal");
    normals.row(i) /= n;
    offsets[i] /= n;
  }

  // Bounded iff the normal directions leave no angular gap of pi or more.
  std::vector<double> ang(m);
  for (int i = 0; i < m; ++i) ang[i] = std::atan2(normals(i, 1), normals(i, 0));
  std::sort(ang.begin(), ang.end());
  for (int i = 0; i < m; ++i) {
    const double gap = i + 1 < m ? ang[i + 1] - ang[i]
                                 : ang[0] + 2.0 * M_PI - ang[m - 1];
    if (gap >= M_PI - 1e-9)
      throw std::invalid_argument("unbounded polytope");
  }

  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double det = normals(i, 0) * normals(j, 1) -
                         normals(i, 1) * normals(j, 0);
      if (std::abs(det) < 1e-12) continue;
      Eigen::Vector2d v;
      v[0] = (offsets[i] * normals(j, 1) - offsets[j] * normals(i, 1)) / det;
      v[1] = (normals(i, 0) * offsets[j] - normals(j, 0) * offsets[i]) / det;
      if (((normals * v - offsets).array() > kFeasTol).any()) continue;
      bool dup = false;
      for (const auto& w : vertices) dup = dup || (w - v).norm() < 1e-7;
      if (!dup) vertices.push_back(v);
    }
  }
  if (vertices.size() < 3)
    throw std::invalid_argument("empty or degenerate polytope");

  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& v : vertices) c += v;
  c /= static_cast<double>(vertices.size());
  std::sort(vertices.begin(), vertices.end(),
            [&](const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
              return std::atan2(p[1] - c[1], p[0] - c[0]) <
                     std::atan2(q[1] - c[1], q[0] - c[0]);
            });
}

int set_dim(const TargetSet& s) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Disc>) return 2;
        else if constexpr (std::is_same_v<T, Box>)
          return static_cast<int>(v.lo.size());
        else
          return 2;
      },
      s);
}

SignedDistance signed_distance_grad(const Vec& x, const TargetSet& s) {
  if (x.size() != set_dim(s))
    throw std::invalid_argument("state dimension does not match target set");
  SignedDistance out;
  out.grad = Vec::Zero(x.size());

  if (const auto* d = std::get_if<Disc>(&s)) {
    const Eigen::Vector2d r = Eigen::Vector2d(x) - d->center;
    const double n = r.norm();
    out.value = d->radius - n;
    if (n > 1e-12) {
      out.grad = -r / n;
    } else {
      out.grad[0] = -1.0;  // any unit vector works at the center kink
    }
    return out;
  }

  if (const auto* b = std::get_if<Box>(&s)) {
    const int n = static_cast<int>(x.size());
    bool inside = true;
    for (int a = 0; a < n; ++a)
      inside = inside && x[a] >= b->lo[a] && x[a] <= b->hi[a];
    if (inside) {
      // Faces scanned lo-then-hi per axis; first strict minimum wins ties.
      double best = std::numeric_limits<double>::infinity();
      for (int a = 0; a < n; ++a) {
        if (x[a] - b->lo[a] < best) {
          best = x[a] - b->lo[a];
          out.grad.setZero();
          out.grad[a] = 1.0;
        }
        if (b->hi[a] - x[a] < best) {
          best = b->hi[a] - x[a];
          out.grad.setZero();
          out.grad[a] = -1.0;
        }
      }
      out.value = best;
    } else {
      Vec g = Vec::Zero(n);
      for (int a = 0; a < n; ++a) {
        if (x[a] > b->hi[a]) g[a] = x[a] - b->hi[a];
        else if (x[a] < b->lo[a]) g[a] = x[a] - b->lo[a];
      }
      const double dist = g.norm();
      out.value = -dist;
      out.grad = -g / dist;
    }
    return out;
  }

  const auto& p = std::get<Polytope>(s);
  const Eigen::Vector2d xv(x[0], x[1]);
  const Eigen::VectorXd slack = p.offsets - p.normals * xv;
  int arg = 0;
  for (int i = 1; i < slack.size(); ++i)
    if (slack[i] < slack[arg]) arg = i;
  if (slack[arg] >= 0.0) {
    out.value = slack[arg];
    out.grad = -p.normals.row(arg).transpose();
    return out;
  }
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector2d bestProj = p.vertices.front();
  const int nv = static_cast<int>(p.vertices.size());
  for (int i = 0; i < nv; ++i) {
    Eigen::Vector2d proj;
    const double d = point_segment_distance(xv, p.vertices[i],
                                            p.vertices[(i + 1) % nv], &proj);
    if (d < best) {
      best = d;
      bestProj = proj;
    }
  }
  out.value = -best;
  out.grad = -(xv - bestProj) / best;
  return out;
}

double signed_distance(const Vec& x, const TargetSet& s) {
  return signed_distance_grad(x, s).value;
}

double point_set_distance(const Vec& x, const TargetSet& s) {
  return std::max(0.0, -signed_distance(x, s));
}

bool contains(const TargetSet& outer, const TargetSet& inner) {
  if (set_dim(outer) != set_dim(inner)) return false;
  if (const auto* d = std::get_if<Disc>(&inner)) {
    // A disc fits iff its center clears every boundary of the outer set by r.
    Vec c(2);
    c << d->center[0], d->center[1];
    return signed_distance(c, outer) >= d->radius - 1e-9;
  }
  std::vector<Vec> verts;
  if (const auto* b = std::get_if<Box>(&inner)) {
    verts = box_vertices(*b);
  } else {
    for (const auto& v : std::get<Polytope>(inner).vertices)
      verts.push_back(Vec(v));
  }
  for (const auto& v : verts)
    if (signed_distance(v, outer) < -1e-9) return false;
  return true;
}

Vec project_point(const TargetSet& s, const Vec& x) {
  return std::visit(
      [&](const auto& v) -> Vec {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Disc>) {
          const Eigen::Vector2d d = Eigen::Vector2d(x) - v.center;
          const double n = d.norm();
          if (n <= v.radius) return x;
          return Vec(v.center + (v.radius / n) * d);
        } else if constexpr (std::is_same_v<T, Box>) {
          return x.cwiseMax(v.lo).cwiseMin(v.hi);
        } else {
          if (((v.normals * Eigen::Vector2d(x) - v.offsets).array() <=
               kFeasTol)
                  .all())
            return x;
          const Eigen::Vector2d p(x);
          Eigen::Vector2d best = v.vertices[0];
          double best_d = (p - best).norm();
          const std::size_t m = v.vertices.size();
          for (std::size_t i = 0; i < m; ++i) {
            Eigen::Vector2d q;
            const double d = point_segment_distance(
                p, v.vertices[i], v.vertices[(i + 1) % m], &q);
            if (d < best_d) {
              best_d = d;
              best = q;
            }
          }
          return Vec(best);
        }
      },
      s);
}

Vec nearest_point_to(const TargetSet& s, const TargetSet& t) {
  // Alternating projection between two convex sets converges to a pair
  // realizing their minimum distance; the point on s is returned.
  Vec p = std::visit(
      [](const auto& v) -> Vec {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Disc>) return Vec(v.center);
        else if constexpr (std::is_same_v<T, Box>)
          return Vec(0.5 * (v.lo + v.hi));
        else {
          Eigen::Vector2d c = Eigen::Vector2d::Zero();
          for (const auto& w : v.vertices) c += w;
          return Vec(c / static_cast<double>(v.vertices.size()));
        }
      },
      s);
  for (int it = 0; it < 64; ++it) {
    const Vec q = project_point(t, p);
    const Vec next = project_point(s, q);
    if ((next - p).norm() < 1e-12) return next;
    p = next;
  }
  return p;
}

double diameter(const TargetSet& s) {
  if (const auto* d = std::get_if<Disc>(&s)) return 2.0 * d->radius;
  if (const auto* b = std::get_if<Box>(&s)) return (b->hi - b->lo).norm();
  const auto& v = std::get<Polytope>(s).vertices;
  double best = 0.0;
  for (size_t i = 0; i < v.size(); ++i)
    for (size_t j = i + 1; j < v.size(); ++j)
      best = std::max(best, (v[i] - v[j]).norm());
  return best;
}

std::vector<Vec> boundary_samples(const TargetSet& s, int k) {
  std::vector<Vec> out;
  if (const auto* d = std::get_if<Disc>(&s)) {
    out.reserve(k);
    for (int i = 0; i < k; ++i) {
      const double th = 2.0 * M_PI * i / k;
      Vec v(2);
      v << d->center[0] + d->radius * std::cos(th),
          d->center[1] + d->radius * std::sin(th);
      out.push_back(std::move(v));
    }
    return out;
  }
  if (const auto* b = std::get_if<Box>(&s)) {
    // The supremum of a convex function over a box sits at a vertex, so the
    // vertex set is an exact sample.
    return box_vertices(*b);
  }
  const auto& verts = std::get<Polytope>(s).vertices;
  const int nv = static_cast<int>(verts.size());
  double perim = 0.0;
  for (int i = 0; i < nv; ++i)
    perim += (verts[(i + 1) % nv] - verts[i]).norm();
  for (const auto& v : verts) out.push_back(Vec(v));
  int edge = 0;
  double edgeStart = 0.0;
  double edgeLen = (verts[1 % nv] - verts[0]).norm();
  for (int i = 0; i < k; ++i) {
    const double s0 = perim * i / k;
    while (s0 > edgeStart + edgeLen && edge + 1 < nv) {
      edgeStart += edgeLen;
      ++edge;
      edgeLen = (verts[(edge + 1) % nv] - verts[edge]).norm();
    }
    const double t = edgeLen > 0.0 ? (s0 - edgeStart) / edgeLen : 0.0;
    const Eigen::Vector2d p =
        verts[edge] + t * (verts[(edge + 1) % nv] - verts[edge]);
    out.push_back(Vec(p));
  }
  return out;
}

double sampled_sup_distance_serial(const TargetSet& from, const TargetSet& to,
                                   int samples) {
  const auto pts = boundary_samples(from, samples);
  double best = 0.0;
  for (const auto& p : pts) best = std::max(best, point_set_distance(p, to));
  return best;
}

double sampled_sup_distance(const TargetSet& from, const TargetSet& to,
                            int samples, bool parallel) {
  if (!parallel) return sampled_sup_distance_serial(from, to, samples);
#ifdef _OPENMP
  const auto pts = boundary_samples(from, samples);
  const int n = static_cast<int>(pts.size());
  double best = 0.0;
#pragma omp parallel for reduction(max : best)
  for (int i = 0; i < n; ++i)
    best = std::max(best, point_set_distance(pts[i], to));
  return best;
#else
  return sampled_sup_distance_serial(from, to, samples);
#endif
}

double ordered_set_distance(const TargetSet& from, const TargetSet& to,
                            int samples) {
  if (set_dim(from) != set_dim(to))
    throw std::invalid_argument("set dimension mismatch");
  const auto* d1 = std::get_if<Disc>(&from);
  const auto* d2 = std::get_if<Disc>(&to);
  if (d1 && d2)
    return std::max(0.0, (d1->center - d2->center).norm() + d1->radius -
                             d2->radius);
  const auto* b1 = std::get_if<Box>(&from);
  const auto* b2 = std::get_if<Box>(&to);
  if (b1 && b2) {
    Vec e(b1->lo.size());
    for (int a = 0; a < b1->lo.size(); ++a)
      e[a] = std::max({0.0, b1->hi[a] - b2->hi[a], b2->lo[a] - b1->lo[a]});
    return e.norm();
  }
  return sampled_sup_distance(from, to, samples, true);
}

TravelTimes travel_times(const Vec& x, const std::vector<TargetSet>& sets,
                         double u_max) {
  TravelTimes tt;
  const int k = static_cast<int>(sets.size());
  tt.to_first.resize(k);
  tt.between = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i)
    tt.to_first[i] = -signed_distance(x, sets[i]) / u_max;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j)
        tt.between(i, j) = ordered_set_distance(sets[i], sets[j]) / u_max;
  return tt;
}

}  // namespace stlsynth::geom
