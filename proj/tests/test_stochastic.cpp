#include <cmath>
#include <numeric>

#include "doctest.h"
#include "orderk/stochastic.hpp"

using namespace orderk;

namespace {

ExperimentConfig small(int k, std::uint64_t seed) {
  ExperimentConfig c;
  c.k = k;
  c.side = 14.0;
  c.replications = 6;
  c.seed = seed;
  c.duality_samples = 200;
  return c;
}

}  // namespace

TEST_CASE("seeds") {
  CHECK(replication_seed(42, 0) != replication_seed(42, 1));
  CHECK(replication_seed(42, 3) == replication_seed(42, 3));
  CHECK(derive_seed(42, 1) != derive_seed(42, 2));
  CHECK(derive_seed(42, 1) != derive_seed(43, 1));
}

TEST_CASE("Poisson sampling") {
  const auto a = sample_poisson(2, 5.0, 2.0, 9);
  const auto b = sample_poisson(2, 5.0, 2.0, 9);
  REQUIRE(a.size() == b.size());
  for (Label i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  CHECK(a.periodic());
  for (const auto& p : a.points()) {
    CHECK(p[0] >= 0.0);
    CHECK(p[0] < 5.0);
    CHECK(p[2] == 0.0);
  }

  // count mean and variance over many draws, both equal to rho L^n = 50
  const int draws = 4000;
  std::vector<double> counts(draws);
  for (int i = 0; i < draws; ++i) counts[i] = static_cast<double>(sample_poisson(2, 5.0, 2.0, replication_seed(5, i)).size());
  const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / draws;
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= draws - 1;
  CHECK(std::abs(mean - 50.0) < 3.0 * std::sqrt(50.0 / draws));
  // the sample variance has standard deviation about sqrt(2/draws) * 50
  CHECK(std::abs(var - 50.0) < 4.0 * std::sqrt(2.0 / draws) * 50.0);

  // x-coordinates are uniform: mean L/2
  const auto big = sample_poisson(2, 5.0, 40.0, 1);
  double sx = 0.0;
  for (const auto& p : big.points()) sx += p[0];
  CHECK(std::abs(sx / big.size() - 2.5) < 4.0 * 5.0 / std::sqrt(12.0 * big.size()));
}

TEST_CASE("configuration validation") {
  auto c = small(1, 1);
  c.replications = 1;
  CHECK_THROWS_AS(run_experiment(c), Error);
  c = small(1, 1);
  c.r0 = 2.0;  // needs L > 16
  CHECK_THROWS_AS(run_experiment(c), Error);
  c = small(1, 1);
  c.window = Box{{-1, 0, 0}, {3, 3, 0}};
  CHECK_THROWS_AS(run_experiment(c), Error);
  c = small(1, 1);
  c.r_max = {RMaxPolicy::Kind::Fixed, 4.0};
  CHECK_THROWS_AS(run_experiment(c), Error);
  c = small(1, 1);
  c.n = 4;
  CHECK_THROWS_AS(run_experiment(c), Error);
}

TEST_CASE("experiment is deterministic and consistent") {
  const auto c = small(2, 17);
  const auto a = run_experiment(c);
  auto c4 = c;
  c4.threads = 3;
  const auto b = run_experiment(c4);
  REQUIRE(a.report.quantities.size() == b.report.quantities.size());
  for (std::size_t i = 0; i < a.report.quantities.size(); ++i) {
    CHECK(a.report.quantities[i].mean == b.report.quantities[i].mean);
    CHECK(a.report.quantities[i].stderr_ == b.report.quantities[i].stderr_);
  }
  CHECK(report_to_json(a.report).dump() == report_to_json(b.report).dump() );
  CHECK(report_to_csv(a.report) == report_to_csv(b.report));

  const auto& s = a.report.structure;
  CHECK(s.violations() == 0);
  CHECK(s.duality_checked == 6 * 200);
  CHECK(s.intervals_checked > 0);
  CHECK_FALSE(a.report.biased);

  const auto* vv = a.report.find("voronoi_vertex_intensity");
  const auto* d2 = a.report.find(cell_quantity_name(2));
  REQUIRE(vv);
  REQUIRE(d2);
  CHECK(vv->mean == d2->mean);
  REQUIRE(vv->theory);
  CHECK(*vv->theory == doctest::Approx(6.0));
  CHECK(vv->stderr_ > 0.0);
  CHECK(*vv->z == doctest::Approx((vv->mean - 6.0) / vv->stderr_));
  CHECK(a.report.find(interval_quantity_name({1, 1, 2})) != nullptr);
  CHECK(a.report.find(interval_quantity_name({0, 0, 1})) == nullptr);
  CHECK_FALSE(a.report.find(cell_quantity_name(1))->theory.has_value());

  std::uint64_t binned = 0;
  for (auto n : a.report.radius_histograms[2].counts) binned += n;
  CHECK(binned + a.report.radius_histograms[2].overflow ==
        static_cast<std::uint64_t>(std::llround(d2->mean * 6 * 14.0 * 14.0)));
}

TEST_CASE("windowed counts and fixed cutoff") {
  auto c = small(1, 3);
  c.window = Box{{2, 2, 0}, {12, 9, 0}};
  c.r_max = {RMaxPolicy::Kind::Fixed, 3.4};
  c.keep_radii = true;
  const auto r = run_experiment(c);
  const auto* vv = r.report.find("voronoi_vertex_intensity");
  CHECK(std::abs(*vv->z) < 5.0);
  CHECK(r.cell_radii[2].size() > 100);
  CHECK(r.report.find("cell_intensity_d0")->theory.value() == 1.0);
}

TEST_CASE("tight fixed cutoff raises the bias flag") {
  auto c = small(3, 5);
  c.r_max = {RMaxPolicy::Kind::Fixed, 0.8};
  try {
    run_experiment(c);
    FAIL("expected BiasFlag");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BiasFlag);
  }
  c.fail_on_bias = false;
  CHECK(run_experiment(c).report.biased);
}

TEST_CASE("estimated constants") {
  auto c = small(1, 21);
  c.replications = 8;
  c.structural_checks = false;
  EstimateReport report;
  const auto table = estimate_ctable(2, c, &report);
  CHECK(report.config.k == 1);
  for (int u = 1; u <= 2; ++u) {
    for (int v = 1; v <= u; ++v) {
      const auto& e = table.entry(v, u);
      CHECK(e.provenance.kind == Provenance::Kind::Estimated);
      CHECK(e.stderr_ > 0.0);
      CHECK(e.value > 0.0);
    }
  }
  // k = 1 fixes C_1^{1,2} + C_1^{2,2} at 3 Delaunay edges and C_1^{2,2} + C_2^{2,2} at 2 triangles per point
  CHECK(std::abs(table.at(1, 1) + table.at(1, 2) - 3.0) < 0.2);
  CHECK(std::abs(table.at(1, 2) + table.at(2, 2) - 2.0) < 0.2);

  // reused at k = 2
  auto c2 = small(2, 23);
  c2.replications = 12;
  c2.structural_checks = false;
  const auto r = run_experiment(c2, &table);
  for (const auto& q : r.report.quantities) {
    REQUIRE(q.z.has_value());
    CHECK_MESSAGE(std::abs(*q.z) < 4.0, q.name);
    if (q.name.rfind("interval_", 0) == 0) CHECK(q.theory_stderr.value() > 0.0);
  }
  const CTable wrong(3);
  CHECK_THROWS_AS(run_experiment(c2, &wrong), Error);
}

TEST_CASE("doubling the box leaves intensities unchanged") {
  auto c = small(1, 31);
  c.structural_checks = false;
  c.replications = 12;
  auto big = c;
  big.side = 28.0;
  big.replications = 4;
  const auto a = run_experiment(c).report;
  const auto b = run_experiment(big).report;
  for (const char* name : {"voronoi_vertex_intensity", "voronoi_edge_length_intensity"}) {
    const auto* qa = a.find(name);
    const auto* qb = b.find(name);
    const double z = (qa->mean - qb->mean) / std::sqrt(qa->stderr_ * qa->stderr_ + qb->stderr_ * qb->stderr_);
    CHECK_MESSAGE(std::abs(z) < 3.0, name);
  }
}

TEST_CASE("report serialization") {
  auto c = small(1, 41);
  c.replications = 3;
  const auto r = run_experiment(c).report;
  const auto j = report_to_json(r);
  CHECK(j.contains("version"));
  CHECK(j["config"]["seed"] == 41);
  CHECK(j["config"]["r0"] == "inf");
  CHECK(j["quantities"].size() == r.quantities.size());
  CHECK(j["radius_histograms"][0]["counts"].size() == 256);
  CHECK_FALSE(j.contains("runtime_seconds"));
  const auto csv = report_to_csv(r);
  CHECK(csv.find("name,mean,stderr,theory,z\n") != std::string::npos);
  CHECK(csv.find("voronoi_vertex_intensity,") != std::string::npos);
}
