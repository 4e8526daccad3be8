#pragma once

#include <array>
#include <vector>

#include "orderk/core.hpp"
#include "orderk/point_set.hpp"

namespace orderk {

// Uniform bucket grid over a point set. On a torus the grid tiles the
// fundamental box and lookups wrap; otherwise it covers the bounding box.
class SpatialGrid {
 public:
  SpatialGrid(const PointSet& X, double cell_size);

  const PointSet& points() const noexcept { return *X_; }
  double cell_size() const noexcept { return cell_; }

  // Calls f(label, distance) for every point within distance r of c (with the
  // on-sphere tolerance as slack). Stops early when f returns false.
  template <class F>
  void for_each_in_ball(const Vec& c, double r, F&& f) const;

  // Distance from p to its k-th nearest point of X.
  double kth_distance(const Vec& p, int k) const;

 private:
  int axis_cell(double x, int a) const;

  const PointSet* X_;
  int dim_;
  double cell_;
  Vec origin_{};
  std::array<int, 3> counts_{1, 1, 1};
  std::vector<std::size_t> offsets_;  // CSR layout: bucket b spans [offsets_[b], offsets_[b+1])
  std::vector<Label> labels_;
};

template <class F>
void SpatialGrid::for_each_in_ball(const Vec& c, double r, F&& f) const {
  const double reach = r + kOnSphereEps * std::max(1.0, r);
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    lo[a] = static_cast<int>(std::floor((c[a] - reach - origin_[a]) / cell_));
    hi[a] = static_cast<int>(std::floor((c[a] + reach - origin_[a]) / cell_));
    if (X_->periodic()) {
      if (hi[a] - lo[a] + 1 >= counts_[a]) {
        lo[a] = 0;
        hi[a] = counts_[a] - 1;
      }
    } else {
      lo[a] = std::max(lo[a], 0);
      hi[a] = std::min(hi[a], counts_[a] - 1);
      if (lo[a] > hi[a]) return;
    }
  }
  auto wrap_index = [](int i, int n) { return ((i % n) + n) % n; };
  for (int ix = lo[0]; ix <= hi[0]; ++ix) {
    const int bx = wrap_index(ix, counts_[0]);
    for (int iy = lo[1]; iy <= hi[1]; ++iy) {
      const int by = wrap_index(iy, counts_[1]);
      for (int iz = lo[2]; iz <= hi[2]; ++iz) {
        const int bz = wrap_index(iz, counts_[2]);
        const std::size_t bucket =
            (static_cast<std::size_t>(bz) * counts_[1] + by) * counts_[0] + bx;
        for (std::size_t s = offsets_[bucket]; s < offsets_[bucket + 1]; ++s) {
          const Label l = labels_[s];
          const double d = X_->distance(c, (*X_)[l]);
          if (d <= reach) {
            if (!f(l, d)) return;
          }
        }
      }
    }
  }
}

}  // namespace orderk
