#include "orderk/point_set.hpp"

#include <random>
#include <string>

namespace orderk {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::PeriodicCutoffExceeded: return "PeriodicCutoffExceeded";
    case ErrorKind::DegenerateTuple: return "DegenerateTuple";
    case ErrorKind::AmbiguousSide: return "AmbiguousSide";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::InvalidType: return "InvalidType";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::MissingConstant: return "MissingConstant";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::BoundaryContamination: return "BoundaryContamination";
    case ErrorKind::DuplicateCellOwnership: return "DuplicateCellOwnership";
    case ErrorKind::BiasFlag: return "BiasFlag";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

PointSet::PointSet(int dim, std::vector<Vec> points, std::optional<double> periodic_side)
    : dim_(dim), points_(std::move(points)), side_(periodic_side) {
  if (dim_ < 1 || dim_ > 3) {
    throw Error(ErrorKind::UnsupportedDimension, "point dimension " + std::to_string(dim_));
  }
  if (side_ && !(*side_ > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "periodic box side must be positive");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    auto& p = points_[i];
    for (int a = dim_; a < 3; ++a) {
      if (p[a] != 0.0) {
        throw Error(ErrorKind::InvalidInput, "point " + std::to_string(i) + " has extra coordinates");
      }
    }
    for (int a = 0; a < dim_; ++a) {
      if (!std::isfinite(p[a])) {
        throw Error(ErrorKind::InvalidInput, "point " + std::to_string(i) + " is not finite");
      }
      if (side_ && (p[a] < 0.0 || p[a] >= *side_)) {
        throw Error(ErrorKind::InvalidInput,
                    "point " + std::to_string(i) + " lies outside the periodic box");
      }
    }
  }
}

Vec PointSet::wrap(const Vec& p) const noexcept {
  if (!side_) return p;
  const double L = *side_;
  Vec q = p;
  for (int a = 0; a < dim_; ++a) {
    q[a] = std::fmod(q[a], L);
    if (q[a] < 0.0) q[a] += L;
    if (q[a] >= L) q[a] = 0.0;
  }
  return q;
}

PointSet jitter(const PointSet& X, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<Vec> pts(X.points().begin(), X.points().end());
  for (auto& p : pts) {
    for (int a = 0; a < X.dim(); ++a) p[a] += noise(rng);
    p = X.wrap(p);
  }
  if (X.periodic()) return PointSet(X.dim(), std::move(pts), X.side());
  return PointSet(X.dim(), std::move(pts));
}

}  // namespace orderk
