#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "orderk/core.hpp"

namespace orderk {

// Finite labeled point set in the plane or in space, optionally living on a
// periodic box (flat torus). Labels are indices into the point list.
class PointSet {
 public:
  PointSet(int dim, std::vector<Vec> points, std::optional<double> periodic_side = std::nullopt);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Vec& operator[](Label i) const { return points_[i]; }
  std::span<const Vec> points() const noexcept { return points_; }

  bool periodic() const noexcept { return side_.has_value(); }
  // Side length of the periodic box; only meaningful when periodic().
  double side() const noexcept { return side_.value_or(0.0); }

  // Minimum-image displacement vector from `from` to `to`.
  Vec displacement(const Vec& from, const Vec& to) const noexcept {
    Vec d = to - from;
    if (side_) {
      const double L = *side_;
      for (int a = 0; a < dim_; ++a) d[a] -= L * std::round(d[a] / L);
    }
    return d;
  }

  double distance(const Vec& a, const Vec& b) const noexcept { return norm(displacement(a, b)); }

  // Maps a coordinate into the fundamental box [0, L)^dim; identity when unbounded.
  Vec wrap(const Vec& p) const noexcept;

 private:
  int dim_;
  std::vector<Vec> points_;
  std::optional<double> side_;
};

// Seeded Gaussian perturbation of every coordinate (wrapped on a torus).
PointSet jitter(const PointSet& X, double sigma, std::uint64_t seed);

}  // namespace orderk
