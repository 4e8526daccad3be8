#pragma once

#include <limits>
#include <map>
#include <string>
#include <utility>

#include "orderk/combinatorics.hpp"

namespace orderk {

inline constexpr double kInfiniteRadius = std::numeric_limits<double>::infinity();

// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double regularized_lower_gamma(double a, double x);

// Lower incomplete gamma gamma(a, x); gamma(a, inf) = Gamma(a).
double lower_incomplete_gamma(double a, double x);

// Volume of the unit n-ball, pi^(n/2) / Gamma(1 + n/2).
double unit_ball_volume(int n);

struct ModelParams {
  int n = 2;
  int k = 1;
  double rho = 1.0;                // intensity (points per unit volume)
  double volume = 1.0;             // |Omega|
  double r0 = kInfiniteRadius;     // radius threshold; infinity counts everything

  double nu() const { return unit_ball_volume(n); }
  void validate() const;
};

struct Provenance {
  enum class Kind { Estimated, UserSupplied };
  Kind kind = Kind::UserSupplied;
  std::string run_id;  // set for estimated entries
};

struct CTableEntry {
  double value = 0.0;
  double stderr_ = 0.0;
  Provenance provenance;
};

// Constants C_v^{u,n} entering the interval-intensity formula, keyed by (v, u).
class CTable {
 public:
  explicit CTable(int n = 2) : n_(n) {}

  int n() const noexcept { return n_; }
  void set(int v, int u, CTableEntry entry);
  bool contains(int v, int u) const { return entries_.count({v, u}) != 0; }
  // Throws MissingConstant when absent.
  const CTableEntry& entry(int v, int u) const;
  double at(int v, int u) const { return entry(v, u).value; }
  const std::map<std::pair<int, int>, CTableEntry>& entries() const noexcept { return entries_; }

 private:
  int n_;
  std::map<std::pair<int, int>, CTableEntry> entries_;
};

// Expected l-skeleton measure of the order-k Poisson-Voronoi tessellation per
// unit volume. l = n gives exactly 1.
double expected_area(int ell, const ModelParams& params);

// gamma(u+k-g, rho nu r0^n) / ((k-g)! Gamma(u)); the r0 = inf case
// evaluates in log-gamma space.
double interval_prefactor(int u, int g, const ModelParams& params);

// Expected number of relaxed intervals of type (v, u, g) with center in Omega
// and radius at most r0. Zero for inadmissible types.
double expected_interval_count(const IntervalType& type, const ModelParams& params,
                               const CTable& ctable);

// Expected number of j-cells with center in Omega and radius at most r0,
// evaluated from the closed-form sums.
double expected_cell_count(int j, const ModelParams& params, const CTable& ctable);

// Same quantity assembled as sum over interval types of n_faces times the
// expected interval count.
double expected_cell_count_by_intervals(int j, const ModelParams& params, const CTable& ctable);

// Distribution function of the radius of a typical j-cell.
double radius_cdf(int j, const ModelParams& params, const CTable& ctable, double r);

}  // namespace orderk
