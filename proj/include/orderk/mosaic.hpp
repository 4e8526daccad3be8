#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "orderk/combinatorics.hpp"
#include "orderk/core.hpp"
#include "orderk/geometry.hpp"
#include "orderk/point_set.hpp"

namespace orderk {

// Identity of a mosaic cell: the inside set I and the on set U, both sorted.
// Vertices are keyed by their full k-subset Q with an empty on set.
struct CellKey {
  std::vector<Label> inside;
  std::vector<Label> on;

  bool is_vertex() const noexcept { return on.empty(); }
  int dim() const noexcept { return on.empty() ? 0 : static_cast<int>(on.size()) - 1; }
  auto operator<=>(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& key) const noexcept;
};

// A relaxed interval of the radius function, determined by the tuple U whose
// smallest circumsphere is its defining sphere.
struct RelaxedInterval {
  std::vector<Label> U;  // sorted
  Sphere sphere;
  std::vector<Label> I;  // labels strictly inside the sphere, sorted
  int m = 0;             // |I|
  int g = 0;             // generation: k - m, or u + 1 for a critical vertex
  std::vector<Label> V;  // vertices on every visible facet
  int v = 0;             // |V| - 1
  bool vertex = false;   // m + u + 1 == k: the upper bound is a vertex
  bool critical = false; // no visible facets

  int u() const noexcept { return static_cast<int>(U.size()) - 1; }
  IntervalType type() const noexcept { return {v, u(), g}; }
  CellKey upper_bound() const;
};

struct Cell {
  CellKey key;
  int dim = 0;
  int generation = 0;
  std::vector<Vec> vertex_coords;  // the averages x_Q spanning the cell
  double radius = 0.0;             // radius-function value
  std::size_t owner = 0;           // index of the owning interval

  const std::vector<Label>& I() const noexcept { return key.inside; }
  const std::vector<Label>& U() const noexcept { return key.on; }
};

struct EnumerationOptions {
  double r_max = std::numeric_limits<double>::infinity();
  std::optional<Box> window;  // center-in-window filter; nullopt means everything
  unsigned threads = 1;       // 0 picks the hardware concurrency
};

class Mosaic {
 public:
  Mosaic(int k, int dim, std::vector<RelaxedInterval> intervals, std::vector<Cell> cells);

  int k() const noexcept { return k_; }
  int dim() const noexcept { return dim_; }
  const std::vector<RelaxedInterval>& intervals() const noexcept { return intervals_; }
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const Cell* find(const CellKey& key) const;

  // Number of cells per dimension (index = dimension).
  std::array<std::size_t, 4> count_by_dim() const;

 private:
  int k_;
  int dim_;
  std::vector<RelaxedInterval> intervals_;
  std::vector<Cell> cells_;
  std::unordered_map<CellKey, std::size_t, CellKeyHash> index_;
};

std::vector<RelaxedInterval> enumerate_intervals(const PointSet& X, int k,
                                                 const EnumerationOptions& options);

// Cells of one relaxed interval. Throws std::logic_error if the per-dimension
// counts disagree with n_faces.
std::vector<Cell> expand_interval(const PointSet& X, const RelaxedInterval& interval, int k,
                                  std::size_t owner = 0);

Mosaic build_mosaic(const PointSet& X, int k, const EnumerationOptions& options);

struct PointClass {
  SphereClassification classification;
  int voronoi_dim = 0;
  CellKey signature;  // key of the dual mosaic cell
};

PointClass classify_point(const PointSet& X, const Vec& p, int k);

// Keys of all proper faces of a cell (every dimension, vertices included).
std::vector<CellKey> face_keys(const CellKey& cell, int k);

struct StructuralReport {
  std::size_t checked_pairs = 0;
  std::size_t closure_violations = 0;       // a face missing from the mosaic
  std::size_t monotonicity_violations = 0;  // R(face) > R(cell)
  long long euler_sum = 0;                  // sum of (-1)^dim over all cells
};

// Meaningful only for mosaics built without a window restriction.
StructuralReport check_structure(const Mosaic& mosaic);

// Upper bound on the k-th nearest-neighbour distance over the whole torus,
// from a lattice of probes with the given spacing (the distance function is
// 1-Lipschitz). Every relaxed interval has radius at most this bound.
double certified_radius_bound(const PointSet& X, int k, double spacing);

// r_max for a complete periodic mosaic: 5% above the certified bound. Throws
// PeriodicCutoffExceeded if that does not stay below L/4.
double complete_torus_r_max(const PointSet& X, int k);

// Order-k Voronoi edges in the plane, recovered from the 2-cells: each edge is
// keyed like its dual 1-cell and carries one endpoint per incident Voronoi
// vertex together with the direction pointing into the edge.
struct VoronoiEdge {
  CellKey key;
  std::vector<Vec> endpoints;
  std::vector<Vec> directions;
};

std::vector<VoronoiEdge> voronoi_edges(const PointSet& X, const Mosaic& mosaic);

// l-dimensional measure of the order-k Voronoi skeleton inside the window
// (the whole torus when no window is given). Planar only, l in {0, 1, 2}.
double skeleton_measure(const PointSet& X, const Mosaic& mosaic, int ell,
                        const std::optional<Box>& window);

double voronoi_skeleton_measure(const PointSet& X, int k, int ell, const std::optional<Box>& window);

}  // namespace orderk
