#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace orderk {

// Type (v, u, g) of a relaxed interval: visibility parameter v, dimension u of
// the upper bound, generation g. Critical vertices have type (u, u, u+1).
struct IntervalType {
  int v = 0;
  int u = 0;
  int g = 0;

  auto operator<=>(const IntervalType&) const = default;
  std::string str() const;
};

std::uint64_t binomial(int n, int r);

// Admissible type for some order: (1 <= v <= u, 1 <= g <= u) or v = u = g - 1.
bool admissible_type(int v, int u, int g);

// Admissible at order k: 1 <= g <= min(k, u) with 1 <= v <= u, or v = u = g - 1 <= k - 1.
bool admissible(int v, int u, int g, int k);

// Number of j-dimensional cells in a relaxed interval of type (v, u, g).
// Throws InvalidType for inadmissible types or negative j; j > u yields 0.
std::uint64_t n_faces(int v, int g, int u, int j);

// Total number of cells in a relaxed interval of the given type.
std::uint64_t interval_cell_total(int v, int g, int u);

}  // namespace orderk
