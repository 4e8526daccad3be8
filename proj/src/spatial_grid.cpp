#include "orderk/spatial_grid.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace orderk {

SpatialGrid::SpatialGrid(const PointSet& X, double cell_size) : X_(&X), dim_(X.dim()) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw Error(ErrorKind::InvalidInput, "grid cell size must be positive and finite");
  }
  // Keep the bucket count proportional to the point count.
  const double max_buckets = 4.0 * static_cast<double>(std::max<std::size_t>(X.size(), 1)) + 64.0;

  std::array<double, 3> extent{0.0, 0.0, 0.0};
  if (X.periodic()) {
    for (int a = 0; a < dim_; ++a) extent[a] = X.side();
  } else if (!X.empty()) {
    Vec lo = X[0], hi = X[0];
    for (const auto& p : X.points()) {
      for (int a = 0; a < dim_; ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
    }
    origin_ = lo;
    for (int a = 0; a < dim_; ++a) extent[a] = hi[a] - lo[a];
  }

  for (;;) {
    double total = 1.0;
    for (int a = 0; a < dim_; ++a) {
      if (X.periodic()) {
        counts_[a] = std::max(1, static_cast<int>(std::floor(extent[a] / cell_size)));
      } else {
        counts_[a] = std::max(1, static_cast<int>(std::floor(extent[a] / cell_size)) + 1);
      }
      total *= counts_[a];
    }
    if (total <= max_buckets) break;
    cell_size *= 1.5;
  }
  // On a torus the cells must tile the box exactly.
  cell_ = X.periodic() ? X.side() / counts_[0] : cell_size;
  if (X.periodic()) {
    for (int a = 1; a < dim_; ++a) counts_[a] = counts_[0];
  }

  const std::size_t buckets = static_cast<std::size_t>(counts_[0]) * counts_[1] * counts_[2];
  std::vector<std::size_t> bucket_of(X.size());
  offsets_.assign(buckets + 1, 0);
  for (Label l = 0; l < X.size(); ++l) {
    std::size_t b = 0;
    for (int a = dim_ - 1; a >= 0; --a) b = b * counts_[a] + axis_cell(X[l][a], a);
    bucket_of[l] = b;
    ++offsets_[b + 1];
  }
  for (std::size_t b = 0; b < buckets; ++b) offsets_[b + 1] += offsets_[b];
  labels_.resize(X.size());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (Label l = 0; l < X.size(); ++l) labels_[fill[bucket_of[l]]++] = l;
}

int SpatialGrid::axis_cell(double x, int a) const {
  const int i = static_cast<int>(std::floor((x - origin_[a]) / cell_));
  return std::clamp(i, 0, counts_[a] - 1);
}

double SpatialGrid::kth_distance(const Vec& p, int k) const {
  if (k < 1 || static_cast<std::size_t>(k) > X_->size()) {
    throw Error(ErrorKind::InsufficientPoints, "k-th neighbour query with k=" + std::to_string(k));
  }
  const double limit = X_->periodic() ? X_->side() / 2.0 : std::numeric_limits<double>::infinity();
  double r = cell_;
  std::vector<double> found;
  for (;;) {
    found.clear();
    for_each_in_ball(p, r, [&](Label, double d) {
      found.push_back(d);
      return true;
    });
    if (found.size() >= static_cast<std::size_t>(k)) {
      std::nth_element(found.begin(), found.begin() + (k - 1), found.end());
      if (found[k - 1] <= r) return found[k - 1];
    }
    if (r >= limit) {
      throw Error(ErrorKind::PeriodicCutoffExceeded, "k-th neighbour beyond half the box");
    }
    r = std::min(2.0 * r, limit);
    if (!X_->periodic() && found.size() == X_->size()) {
      std::nth_element(found.begin(), found.begin() + (k - 1), found.end());
      return found[k - 1];
    }
  }
}

}  // namespace orderk
