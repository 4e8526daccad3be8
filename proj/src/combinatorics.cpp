#include "orderk/combinatorics.hpp"

#include <algorithm>

#include "orderk/core.hpp"

namespace orderk {

std::string IntervalType::str() const {
  return "(" + std::to_string(v) + "," + std::to_string(u) + "," + std::to_string(g) + ")";
}

std::uint64_t binomial(int n, int r) {
  if (n < 0 || r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  std::uint64_t result = 1;
  for (int i = 1; i <= r; ++i) result = result * static_cast<std::uint64_t>(n - r + i) / i;
  return result;
}

bool admissible_type(int v, int u, int g) {
  if (v == u && g == u + 1 && u >= 0) return true;
  return u >= 1 && v >= 1 && v <= u && g >= 1 && g <= u;
}

bool admissible(int v, int u, int g, int k) {
  if (k < 1) return false;
  if (v == u && g == u + 1) return u >= 0 && g <= k;
  return u >= 1 && v >= 1 && v <= u && g >= 1 && g <= std::min(k, u);
}

std::uint64_t n_faces(int v, int g, int u, int j) {
  if (!admissible_type(v, u, g) || j < 0) {
    throw Error(ErrorKind::InvalidType, "type " + IntervalType{v, u, g}.str() + " with j=" +
                                            std::to_string(j) + " is not admissible");
  }
  if (j > u) return 0;
  if (j == 0) return g == v + 1 ? 1 : 0;
  const int t0 = std::max({0, v - j, g - j});
  const int t1 = std::min({v + 1, u - j, g - 1});
  std::uint64_t total = 0;
  for (int t = t0; t <= t1; ++t) total += binomial(u - v, t + j - v) * binomial(v + 1, t);
  return total;
}

std::uint64_t interval_cell_total(int v, int g, int u) {
  std::uint64_t total = 0;
  for (int j = 0; j <= u; ++j) total += n_faces(v, g, u, j);
  return total;
}

}  // namespace orderk
