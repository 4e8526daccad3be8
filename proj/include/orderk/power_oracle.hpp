#pragma once

#include <vector>

#include "orderk/core.hpp"
#include "orderk/mosaic.hpp"

// Brute-force order-k Voronoi tessellation of tiny planar instances, built as
// the power diagram of all k-subsets. Used as ground truth in tests.
namespace orderk::oracle {

inline constexpr double kDedupEps = 1e-7;

struct WeightedSite {
  std::vector<Label> Q;  // sorted k-subset
  Vec x{};               // average of the points in Q
  double w = 0.0;        // |x_Q|^2 - sum_{q in Q} |q|^2 / k

  double power(const Vec& p) const;
};

struct Domain {
  WeightedSite site;
  std::vector<Vec> polygon;  // counterclockwise, nonempty interior
  double area() const;
};

struct Tessellation {
  int k = 0;
  Box window;
  std::vector<Vec> points;
  std::vector<Domain> domains;
};

// Throws TooLarge beyond 14 points or k > 3.
Tessellation order_k_voronoi(const std::vector<Vec>& points, int k, const Box& window);

// k-subset whose power is smallest at p (ties broken by label order).
std::vector<Label> owner_at(const Tessellation& t, const Vec& p);

struct Signature {
  std::vector<Label> inside;  // strictly closer than the k-th neighbour
  std::vector<Label> on;      // at the k-th neighbour distance
};

// Computed from raw squared distances with tolerance kDedupEps.
Signature signature_at(const std::vector<Vec>& points, const Vec& p, int k);

struct DualCell {
  CellKey key;
  int dim = 0;        // dimension of the dual mosaic cell
  bool clean = true;  // the Voronoi feature stays off the window boundary
};

enum class BoundaryPolicy { Mark, Throw };

// Dual cells of every Voronoi domain, edge and vertex inside the window. With
// BoundaryPolicy::Throw a feature touching the window boundary raises
// BoundaryContamination.
std::vector<DualCell> dual_complex(const Tessellation& t, BoundaryPolicy policy = BoundaryPolicy::Mark);

// Cross-check of a planar mosaic (built without window or cutoff) against the
// oracle. A mosaic cell counts as clean when its Voronoi feature is bounded
// and lies inside the oracle window: 2-cells by their circumcenter, 1-cells by
// both coface 2-cells, 0-cells by all incident 1-cells.
struct Comparison {
  std::size_t mosaic_clean = 0;
  std::size_t oracle_cells = 0;
  std::size_t oracle_clean = 0;
  std::vector<CellKey> clean_missing_in_oracle;
  std::vector<CellKey> missing_in_mosaic;
  std::vector<CellKey> oracle_clean_not_clean_in_mosaic;

  bool equal() const {
    return clean_missing_in_oracle.empty() && missing_in_mosaic.empty() &&
           oracle_clean_not_clean_in_mosaic.empty();
  }
};

Comparison compare(const Mosaic& mosaic, const Tessellation& t);

}  // namespace orderk::oracle
