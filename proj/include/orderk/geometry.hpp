#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "orderk/core.hpp"
#include "orderk/point_set.hpp"

namespace orderk {

struct Sphere {
  Vec center{};
  double radius = 0.0;
};

// Points of X strictly inside / on a sphere. Both label lists are sorted.
struct SphereClassification {
  std::vector<Label> inn_set;
  std::vector<Label> onn_set;

  std::size_t inn() const noexcept { return inn_set.size(); }
  std::size_t onn() const noexcept { return onn_set.size(); }
};

struct VisibilityReport {
  std::vector<std::size_t> visible_facets;  // facet i is U without its i-th vertex
  std::vector<Label> V;                     // vertices on every visible facet
  int v = 0;                                // |V| - 1
};

/// A simplex of up to four vertices given in local coordinates, with vertex 0
/// at the origin. Factors the Gram matrix of the edge vectors once so the
/// circumcenter and barycentric coordinates of points in the affine hull are
/// cheap to evaluate. Throws DegenerateTuple when the Gram system is
/// ill-conditioned (condition number above kMaxCondition).
class LocalSimplex {
 public:
  explicit LocalSimplex(std::span<const Vec> vertices);

  std::size_t size() const noexcept { return size_; }
  const Vec& vertex(std::size_t i) const { return vertices_[i]; }

  // Center of the smallest sphere through all vertices; lies in their affine hull.
  const Vec& circumcenter() const noexcept { return center_; }
  double circumradius() const noexcept { return radius_; }

  // Barycentric coordinates of p (local coordinates, assumed in the affine hull).
  std::array<double, 4> barycentric(const Vec& p) const;

 private:
  std::array<double, 3> solve(const std::array<double, 3>& rhs) const;

  std::size_t size_ = 0;
  std::array<Vec, 4> vertices_{};
  std::array<std::array<double, 3>, 3> lu_{};
  std::array<std::size_t, 3> pivot_{};
  Vec center_{};
  double radius_ = 0.0;
};

// Lower bound on the circumradius that stays reliable for nearly degenerate
// tuples (from edge lengths and the volume, padded by rounding error). Lets
// callers discard far-out tuples that LocalSimplex refuses.
double circumradius_lower_bound(std::span<const Vec> vertices);

// Coordinates of the labeled tuple relative to its first vertex, using
// minimum-image displacements on a torus.
std::vector<Vec> local_coordinates(const PointSet& X, std::span<const Label> U);

// Order-k Delaunay sphere of p: the smallest sphere centered at p with at least
// k points inside or on it, together with the inside/on classification.
std::pair<Sphere, SphereClassification> delaunay_sphere(const PointSet& X, const Vec& p, int k);

Sphere smallest_circumsphere(const PointSet& X, std::span<const Label> U);

// Brute-force linear scan.
SphereClassification count_inside(const PointSet& X, const Sphere& s);

VisibilityReport visibility_partition(const PointSet& X, std::span<const Label> U, const Vec& p);

bool interior_of_hull(const PointSet& X, std::span<const Label> U, const Vec& p);

// Visibility from barycentric coordinates: facet i is visible iff the i-th
// coordinate is negative. Throws AmbiguousSide when one is within
// kBarycentricEps of zero.
VisibilityReport visibility_from_barycentric(std::span<const double> lambda,
                                             std::span<const Label> U);

}  // namespace orderk
