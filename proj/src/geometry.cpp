#include "orderk/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace orderk {

namespace {

std::string tuple_name(std::span<const Label> U) {
  std::string s = "{";
  for (std::size_t i = 0; i < U.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(U[i]);
  }
  return s + "}";
}

void check_periodic_radius(const PointSet& X, double radius) {
  if (X.periodic() && !(radius < X.side() / 4.0)) {
    throw Error(ErrorKind::PeriodicCutoffExceeded,
                "radius " + std::to_string(radius) + " is not below L/4 = " +
                    std::to_string(X.side() / 4.0));
  }
}

}  // namespace

LocalSimplex::LocalSimplex(std::span<const Vec> vertices) : size_(vertices.size()) {
  if (size_ == 0 || size_ > 4) {
    throw Error(ErrorKind::DegenerateTuple, "simplex needs 1 to 4 vertices");
  }
  std::copy(vertices.begin(), vertices.end(), vertices_.begin());
  const std::size_t u = size_ - 1;
  if (u == 0) {
    center_ = vertices_[0];
    radius_ = 0.0;
    return;
  }

  // Gram matrix of edge vectors e_i = x_i - x_0.
  std::array<std::array<double, 3>, 3> gram{};
  for (std::size_t i = 0; i < u; ++i) {
    for (std::size_t j = 0; j < u; ++j) {
      gram[i][j] = dot(vertices_[i + 1] - vertices_[0], vertices_[j + 1] - vertices_[0]);
    }
  }

  double norm1 = 0.0;
  for (std::size_t j = 0; j < u; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < u; ++i) col += std::abs(gram[i][j]);
    norm1 = std::max(norm1, col);
  }
  if (!(norm1 > 0.0)) throw Error(ErrorKind::DegenerateTuple, "coincident vertices");

  // LU with partial pivoting.
  lu_ = gram;
  for (std::size_t c = 0; c < u; ++c) {
    std::size_t best = c;
    for (std::size_t r = c + 1; r < u; ++r) {
      if (std::abs(lu_[r][c]) > std::abs(lu_[best][c])) best = r;
    }
    pivot_[c] = best;
    if (best != c) std::swap(lu_[best], lu_[c]);
    if (lu_[c][c] == 0.0) throw Error(ErrorKind::DegenerateTuple, "singular Gram matrix");
    for (std::size_t r = c + 1; r < u; ++r) {
      lu_[r][c] /= lu_[c][c];
      for (std::size_t j = c + 1; j < u; ++j) lu_[r][j] -= lu_[r][c] * lu_[c][j];
    }
  }

  // 1-norm condition number via the explicit inverse (at most 3x3).
  double inv_norm1 = 0.0;
  for (std::size_t j = 0; j < u; ++j) {
    std::array<double, 3> e{};
    e[j] = 1.0;
    const auto col = solve(e);
    double s = 0.0;
    for (std::size_t i = 0; i < u; ++i) s += std::abs(col[i]);
    inv_norm1 = std::max(inv_norm1, s);
  }
  if (!(norm1 * inv_norm1 <= kMaxCondition)) {
    throw Error(ErrorKind::DegenerateTuple, "Gram system condition number exceeds 1e12");
  }

  // |c - x_i|^2 = |c - x_0|^2 for all i  <=>  G mu = diag(G) / 2.
  std::array<double, 3> rhs{};
  for (std::size_t i = 0; i < u; ++i) rhs[i] = 0.5 * gram[i][i];
  const auto mu = solve(rhs);
  Vec c = vertices_[0];
  for (std::size_t i = 0; i < u; ++i) c = c + mu[i] * (vertices_[i + 1] - vertices_[0]);
  center_ = c;
  radius_ = norm(c - vertices_[0]);
}

double circumradius_lower_bound(std::span<const Vec> v) {
  constexpr double pad = 64.0 * std::numeric_limits<double>::epsilon();
  switch (v.size()) {
    case 0:
    case 1:
      return 0.0;
    case 2:
      return 0.5 * norm(v[1] - v[0]);
    case 3: {
      const Vec e1 = v[1] - v[0], e2 = v[2] - v[0];
      const Vec cr{e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]};
      const double twice_area = norm(cr) + pad * norm(e1) * norm(e2);
      return norm(e1) * norm(e2) * norm(v[2] - v[1]) / (2.0 * twice_area);
    }
    default: {
      // 24 V R = sqrt(P) with P built from products of opposite edge lengths.
      const Vec e1 = v[1] - v[0], e2 = v[2] - v[0], e3 = v[3] - v[0];
      const double det = e1[0] * (e2[1] * e3[2] - e2[2] * e3[1]) - e1[1] * (e2[0] * e3[2] - e2[2] * e3[0]) +
                         e1[2] * (e2[0] * e3[1] - e2[1] * e3[0]);
      const double six_volume = std::abs(det) + pad * norm(e1) * norm(e2) * norm(e3);
      const double a = norm(e1) * norm(v[3] - v[2]);
      const double b = norm(e2) * norm(v[3] - v[1]);
      const double c = norm(e3) * norm(v[2] - v[1]);
      const double P = (a + b + c) * (a + b - c) * (a - b + c) * (-a + b + c);
      double face = 0.0;
      for (std::size_t skip = 0; skip < 4; ++skip) {
        std::array<Vec, 3> f{};
        for (std::size_t i = 0, j = 0; i < 4; ++i) {
          if (i != skip) f[j++] = v[i];
        }
        face = std::max(face, circumradius_lower_bound(f));
      }
      return std::max(face, std::sqrt(std::max(P, 0.0)) / (4.0 * six_volume));
    }
  }
}

std::array<double, 3> LocalSimplex::solve(const std::array<double, 3>& rhs) const {
  const std::size_t u = size_ - 1;
  std::array<double, 3> x = rhs;
  // Whole rows (multipliers included) were swapped, so permute first.
  for (std::size_t c = 0; c < u; ++c) {
    if (pivot_[c] != c) std::swap(x[c], x[pivot_[c]]);
  }
  for (std::size_t c = 0; c < u; ++c) {
    for (std::size_t r = c + 1; r < u; ++r) x[r] -= lu_[r][c] * x[c];
  }
  for (std::size_t c = u; c-- > 0;) {
    for (std::size_t j = c + 1; j < u; ++j) x[c] -= lu_[c][j] * x[j];
    x[c] /= lu_[c][c];
  }
  return x;
}

std::array<double, 4> LocalSimplex::barycentric(const Vec& p) const {
  std::array<double, 4> lambda{};
  const std::size_t u = size_ - 1;
  if (u == 0) {
    lambda[0] = 1.0;
    return lambda;
  }
  std::array<double, 3> rhs{};
  const Vec rel = p - vertices_[0];
  for (std::size_t i = 0; i < u; ++i) rhs[i] = dot(vertices_[i + 1] - vertices_[0], rel);
  const auto mu = solve(rhs);
  double sum = 0.0;
  for (std::size_t i = 0; i < u; ++i) {
    lambda[i + 1] = mu[i];
    sum += mu[i];
  }
  lambda[0] = 1.0 - sum;
  return lambda;
}

std::vector<Vec> local_coordinates(const PointSet& X, std::span<const Label> U) {
  std::vector<Vec> local;
  local.reserve(U.size());
  const Vec& origin = X[U[0]];
  for (Label l : U) {
    if (l >= X.size()) throw Error(ErrorKind::InvalidInput, "label out of range");
    local.push_back(X.displacement(origin, X[l]));
  }
  return local;
}

SphereClassification count_inside(const PointSet& X, const Sphere& s) {
  check_periodic_radius(X, s.radius);
  SphereClassification out;
  for (Label i = 0; i < X.size(); ++i) {
    const double d = X.distance(s.center, X[i]);
    if (on_sphere(d, s.radius)) {
      out.onn_set.push_back(i);
    } else if (d < s.radius) {
      out.inn_set.push_back(i);
    }
  }
  return out;
}

std::pair<Sphere, SphereClassification> delaunay_sphere(const PointSet& X, const Vec& p, int k) {
  if (k < 1) throw Error(ErrorKind::DomainError, "order k must be positive");
  if (X.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::InsufficientPoints,
                "need at least " + std::to_string(k) + " points, have " + std::to_string(X.size()));
  }
  std::vector<double> dist(X.size());
  for (Label i = 0; i < X.size(); ++i) dist[i] = X.distance(p, X[i]);
  std::vector<double> sorted = dist;
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
  Sphere s{X.wrap(p), sorted[k - 1]};
  check_periodic_radius(X, s.radius);

  SphereClassification cls;
  for (Label i = 0; i < X.size(); ++i) {
    if (on_sphere(dist[i], s.radius)) {
      cls.onn_set.push_back(i);
    } else if (dist[i] < s.radius) {
      cls.inn_set.push_back(i);
    }
  }
  return {s, std::move(cls)};
}

Sphere smallest_circumsphere(const PointSet& X, std::span<const Label> U) {
  if (U.empty() || U.size() > static_cast<std::size_t>(X.dim()) + 1) {
    throw Error(ErrorKind::DegenerateTuple, "tuple size must be between 1 and dim+1");
  }
  const auto local = local_coordinates(X, U);
  try {
    LocalSimplex simplex(local);
    Sphere s{X.wrap(X[U[0]] + simplex.circumcenter()), simplex.circumradius()};
    if (X.periodic()) check_periodic_radius(X, s.radius);
    return s;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateTuple) throw;
    throw Error(ErrorKind::DegenerateTuple, "tuple " + tuple_name(U) + " is affinely dependent");
  }
}

VisibilityReport visibility_from_barycentric(std::span<const double> lambda,
                                             std::span<const Label> U) {
  VisibilityReport report;
  for (std::size_t i = 0; i < U.size(); ++i) {
    if (std::abs(lambda[i]) <= kBarycentricEps) {
      throw Error(ErrorKind::AmbiguousSide,
                  "center lies on the hull of facet " + std::to_string(i) + " of " + tuple_name(U));
    }
    if (lambda[i] < 0.0) {
      report.visible_facets.push_back(i);
    } else {
      report.V.push_back(U[i]);
    }
  }
  report.v = static_cast<int>(report.V.size()) - 1;
  return report;
}

VisibilityReport visibility_partition(const PointSet& X, std::span<const Label> U, const Vec& p) {
  if (U.size() < 2) throw Error(ErrorKind::DegenerateTuple, "visibility needs at least an edge");
  const auto local = local_coordinates(X, U);
  const LocalSimplex simplex(local);
  const auto lambda = simplex.barycentric(X.displacement(X[U[0]], p));
  return visibility_from_barycentric(std::span<const double>(lambda.data(), U.size()), U);
}

bool interior_of_hull(const PointSet& X, std::span<const Label> U, const Vec& p) {
  const auto local = local_coordinates(X, U);
  const LocalSimplex simplex(local);
  const auto lambda = simplex.barycentric(X.displacement(X[U[0]], p));
  for (std::size_t i = 0; i < U.size(); ++i) {
    if (!(lambda[i] > kBarycentricEps)) return false;
  }
  return true;
}

}  // namespace orderk
