#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace orderk {

// Coordinates are stored in three slots; planar data leaves z at zero so the
// same arithmetic serves both supported dimensions.
using Vec = std::array<double, 3>;
using Label = std::uint32_t;

// Relative tolerance for "on the sphere": |dist - radius| <= eps * max(1, radius).
inline constexpr double kOnSphereEps = 1e-9;
// Barycentric coordinates within this distance of zero count as "on the facet".
inline constexpr double kBarycentricEps = 1e-9;
// Condition number of the Gram system above which a tuple is rejected.
inline constexpr double kMaxCondition = 1e12;

enum class ErrorKind {
  InsufficientPoints,
  PeriodicCutoffExceeded,
  DegenerateTuple,
  AmbiguousSide,
  UnsupportedDimension,
  InvalidType,
  DomainError,
  MissingConstant,
  TooLarge,
  BoundaryContamination,
  DuplicateCellOwnership,
  BiasFlag,
  InvalidInput,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline bool on_sphere(double dist, double radius) {
  return std::abs(dist - radius) <= kOnSphereEps * std::max(1.0, radius);
}

inline bool inside_sphere(double dist, double radius) {
  return dist < radius && !on_sphere(dist, radius);
}

// Axis-aligned box used as a counting window.
struct Box {
  Vec lo{};
  Vec hi{};

  bool contains(const Vec& p, int dim) const {
    for (int a = 0; a < dim; ++a) {
      if (p[a] < lo[a] || p[a] >= hi[a]) return false;
    }
    return true;
  }

  double volume(int dim) const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= hi[a] - lo[a];
    return v;
  }
};

}  // namespace orderk
