#include <bit>

#include "doctest.h"
#include "orderk/combinatorics.hpp"
#include "orderk/core.hpp"

using namespace orderk;

namespace {

// Counts j-cells of a relaxed interval by listing every 3-coloring of its
// u+1 vertices into inside / on / outside, with V the first v+1 vertices.
// A coloring is a cell when Uin is contained in V and V in Uin and Uon; for
// |Uon| = j+1 >= 2 it also needs g-j <= |Uin| <= g-1, and a vertex has no
// on-vertices and |Uin| = g.
std::uint64_t brute_force(int v, int g, int u, int j) {
  const int s = u + 1;
  const unsigned V = (1u << (v + 1)) - 1;
  int total = 1;
  for (int i = 0; i < s; ++i) total *= 3;
  std::uint64_t count = 0;
  for (int code = 0; code < total; ++code) {
    unsigned in = 0, on = 0;
    for (int i = 0, c = code; i < s; ++i, c /= 3) {
      if (c % 3 == 1) in |= 1u << i;
      if (c % 3 == 2) on |= 1u << i;
    }
    if ((in & ~V) != 0 || (V & ~(in | on)) != 0) continue;
    const int n_in = std::popcount(in);
    const int n_on = std::popcount(on);
    if (j == 0) {
      if (n_on == 0 && n_in == g) ++count;
    } else if (n_on == j + 1 && n_in >= g - j && n_in <= g - 1) {
      ++count;
    }
  }
  return count;
}

}  // namespace

TEST_CASE("binomial") {
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(6, 0) == 1);
  CHECK(binomial(3, 4) == 0);
  CHECK(binomial(3, -1) == 0);
  CHECK(binomial(40, 20) == 137846528820ULL);
}

TEST_CASE("n_faces on the triangle interval") {
  CHECK(n_faces(2, 2, 2, 2) == 1);
  CHECK(n_faces(2, 2, 2, 1) == 3);
  CHECK(n_faces(2, 2, 2, 0) == 0);
  CHECK(interval_cell_total(2, 2, 2) == 4);
  CHECK(interval_cell_total(1, 2, 1) == 1);
  for (int u = 0; u <= 6; ++u) {
    CHECK(n_faces(u, u + 1, u, 0) == 1);
    CHECK(interval_cell_total(u, u + 1, u) == 1);
  }
}

TEST_CASE("n_faces agrees with brute-force partitions for u <= 6") {
  int checked = 0;
  for (int u = 0; u <= 6; ++u) {
    for (int v = 0; v <= u; ++v) {
      for (int g = 1; g <= u + 1; ++g) {
        if (!admissible_type(v, u, g)) continue;
        std::uint64_t total = 0;
        for (int j = 0; j <= u; ++j) {
          const auto got = n_faces(v, g, u, j);
          CHECK_MESSAGE(got == brute_force(v, g, u, j), "v=" << v << " g=" << g << " u=" << u << " j=" << j);
          CHECK(got <= binomial(u + 1, j + 1) << (u + 1));
          total += got;
          ++checked;
        }
        CHECK(total == interval_cell_total(v, g, u));
        CHECK(n_faces(v, g, u, u + 1) == 0);
        if (g <= u) CHECK(n_faces(v, g, u, u) == 1);
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("generation one reduces to a binomial") {
  for (int u = 1; u <= 6; ++u) {
    for (int v = 1; v <= u; ++v) {
      for (int j = 0; j <= u; ++j) {
        const std::uint64_t want = (j >= v) ? binomial(u - v, j - v) : 0;
        CHECK(n_faces(v, 1, u, j) == want);
      }
    }
  }
}

TEST_CASE("admissibility") {
  CHECK(admissible(1, 2, 1, 1));
  CHECK(admissible(2, 2, 3, 3));
  CHECK_FALSE(admissible(1, 2, 2, 1));
  CHECK_FALSE(admissible(2, 2, 3, 2));
  CHECK_FALSE(admissible(0, 2, 1, 5));
  CHECK_FALSE(admissible(3, 2, 1, 5));
  CHECK(admissible(0, 0, 1, 1));
  CHECK_FALSE(admissible_type(1, 2, 3));
}

TEST_CASE("n_faces rejects bad input") {
  CHECK_THROWS_AS(n_faces(1, 2, 2, -1), Error);
  CHECK_THROWS_AS(n_faces(0, 1, 2, 1), Error);
  CHECK_THROWS_AS(n_faces(1, 3, 2, 1), Error);
}

TEST_CASE("type names") { CHECK(IntervalType{1, 2, 2}.str() == "(1,2,2)"); }
