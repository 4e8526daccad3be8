#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "orderk/closed_form.hpp"
#include "orderk/core.hpp"
#include "orderk/point_set.hpp"

namespace orderk {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Independent seed for a named stream (e.g. one per order k) of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

// Seed of replication r: a counter mixed through splitmix64.
std::uint64_t replication_seed(std::uint64_t master, std::size_t replication) noexcept;

// Poisson process of intensity rho on the periodic box [0, L)^n.
PointSet sample_poisson(int n, double side, double rho, std::uint64_t seed);

struct RMaxPolicy {
  enum class Kind { Certified, Fixed };
  Kind kind = Kind::Certified;
  double value = 0.0;  // used by Fixed
};

struct ExperimentConfig {
  int n = 2;
  int k = 1;
  double rho = 1.0;
  double side = 30.0;
  int replications = 50;
  double r0 = kInfiniteRadius;
  std::optional<Box> window;  // nullopt: the whole torus
  std::uint64_t seed = 42;
  RMaxPolicy r_max;
  unsigned threads = 0;  // 0: hardware concurrency; not part of to_json (results do not depend on it)
  bool structural_checks = true;
  int duality_samples = 1000;
  bool keep_radii = false;  // retain every cell radius (for exact CDF tests)
  bool fail_on_bias = true;

  void validate() const;
  double window_volume() const;
  nlohmann::json to_json() const;
};

struct QuantityEstimate {
  std::string name;
  double mean = 0.0;    // per unit volume
  double stderr_ = 0.0;
  std::optional<double> theory;
  std::optional<double> theory_stderr;  // propagated from estimated constants
  std::optional<double> z;

  bool within(double band) const { return z && std::abs(*z) < band; }
};

struct StructuralTotals {
  std::size_t checked_pairs = 0;
  std::size_t closure_violations = 0;
  std::size_t monotonicity_violations = 0;
  std::size_t euler_violations = 0;  // replications with a nonzero Euler sum
  std::size_t duality_checked = 0;
  std::size_t duality_violations = 0;
  std::size_t intervals_checked = 0;
  std::size_t cell_count_mismatches = 0;  // expanded cells vs. interval_cell_total

  std::size_t violations() const {
    return closure_violations + monotonicity_violations + euler_violations + duality_violations +
           cell_count_mismatches;
  }
};

struct ReplicationSummary {
  std::uint64_t seed = 0;
  std::size_t points = 0;
  double r_max = 0.0;
  double max_radius = 0.0;
  bool biased = false;
};

struct RadiusHistogram {
  double upper = 0.0;                  // bins are uniform on [0, upper)
  std::vector<std::uint64_t> counts;   // 256 bins
  std::uint64_t overflow = 0;
};

struct EstimateReport {
  ExperimentConfig config;
  std::vector<QuantityEstimate> quantities;
  StructuralTotals structure;
  std::vector<ReplicationSummary> replications;
  std::vector<RadiusHistogram> radius_histograms;  // index = cell dimension
  bool biased = false;
  double runtime_seconds = 0.0;

  const QuantityEstimate* find(const std::string& name) const;
};

struct ExperimentResult {
  EstimateReport report;
  std::vector<std::vector<double>> cell_radii;  // per dimension, when keep_radii
};

std::string interval_quantity_name(const IntervalType& type);
std::string cell_quantity_name(int j);

// Replicated Monte Carlo on the torus. Theory values come from the closed
// form; per-type and per-dimension cell predictions need a C-table.
ExperimentResult run_experiment(const ExperimentConfig& config, const CTable* ctable = nullptr);

// C-table from interval intensities at k = 1 and r0 = infinity.
CTable estimate_ctable(int n, const ExperimentConfig& config, EstimateReport* report = nullptr);

// Runtime is left out so that identical runs give identical files.
nlohmann::json report_to_json(const EstimateReport& report);
std::string report_to_csv(const EstimateReport& report);

}  // namespace orderk
