#include "orderk/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <limits>
#include <stdexcept>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "orderk/io.hpp"
#include "orderk/mosaic.hpp"

namespace orderk {

namespace {

constexpr int kHistogramBins = 256;

struct Quantity {
  std::string name;
  enum class Source { VoronoiVertices, EdgeLength, Cells, Intervals } source;
  int j = 0;
  IntervalType type{};
};

std::vector<Quantity> quantity_list(const ExperimentConfig& cfg) {
  std::vector<Quantity> out;
  out.push_back({"voronoi_vertex_intensity", Quantity::Source::VoronoiVertices});
  if (cfg.n == 2) out.push_back({"voronoi_edge_length_intensity", Quantity::Source::EdgeLength});
  for (int j = 0; j <= cfg.n; ++j) {
    Quantity q{cell_quantity_name(j), Quantity::Source::Cells};
    q.j = j;
    out.push_back(q);
  }
  std::vector<IntervalType> types;
  if (cfg.k == 1) types.push_back({0, 0, 1});
  for (int u = 1; u <= cfg.n; ++u) {
    for (int v = 1; v <= u + 1; ++v) {
      for (int g = 1; g <= cfg.k; ++g) {
        if (admissible(v, u, g, cfg.k)) types.push_back({v, u, g});
      }
    }
  }
  std::sort(types.begin(), types.end());
  for (const auto& t : types) {
    Quantity q{interval_quantity_name(t), Quantity::Source::Intervals};
    q.type = t;
    out.push_back(q);
  }
  return out;
}

struct ReplicationOutput {
  std::vector<double> values;  // per quantity, per unit volume
  ReplicationSummary summary;
  StructuralTotals structure;
  std::vector<std::vector<std::uint64_t>> histograms;
  std::vector<std::uint64_t> overflow;
  std::vector<std::vector<double>> radii;
};

double histogram_upper(const ExperimentConfig& cfg) { return cfg.side / 4.0; }

ReplicationOutput run_replication(const ExperimentConfig& cfg, const std::vector<Quantity>& quantities,
                                  std::size_t r) {
  ReplicationOutput out;
  out.summary.seed = replication_seed(cfg.seed, r);
  const PointSet X = sample_poisson(cfg.n, cfg.side, cfg.rho, out.summary.seed);
  out.summary.points = X.size();

  double r_max = cfg.r_max.value;
  if (cfg.r_max.kind == RMaxPolicy::Kind::Certified) {
    try {
      r_max = complete_torus_r_max(X, cfg.k);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::PeriodicCutoffExceeded) throw;
      throw Error(ErrorKind::BiasFlag, std::string("replication ") + std::to_string(r) + ": " + e.what());
    }
  }
  out.summary.r_max = r_max;

  EnumerationOptions options;
  options.r_max = r_max;
  options.threads = 1;
  const Mosaic mosaic = build_mosaic(X, cfg.k, options);

  const auto& intervals = mosaic.intervals();
  for (const auto& iv : intervals) out.summary.max_radius = std::max(out.summary.max_radius, iv.sphere.radius);
  out.summary.biased = out.summary.max_radius > 0.99 * r_max;

  const double volume = cfg.window_volume();
  auto in_window = [&](const Vec& c) { return !cfg.window || cfg.window->contains(c, cfg.n); };

  std::vector<double> cell_counts(cfg.n + 1, 0.0);
  out.histograms.assign(cfg.n + 1, std::vector<std::uint64_t>(kHistogramBins, 0));
  out.overflow.assign(cfg.n + 1, 0);
  out.radii.assign(cfg.n + 1, {});
  const double upper = histogram_upper(cfg);
  for (const auto& cell : mosaic.cells()) {
    if (!in_window(intervals[cell.owner].sphere.center)) continue;
    if (cell.radius <= cfg.r0) cell_counts[cell.dim] += 1.0;
    const auto bin = static_cast<std::size_t>(cell.radius / upper * kHistogramBins);
    if (bin < static_cast<std::size_t>(kHistogramBins)) {
      ++out.histograms[cell.dim][bin];
    } else {
      ++out.overflow[cell.dim];
    }
    if (cfg.keep_radii) out.radii[cell.dim].push_back(cell.radius);
  }

  std::map<IntervalType, double> type_counts;
  for (const auto& iv : intervals) {
    if (in_window(iv.sphere.center) && iv.sphere.radius <= cfg.r0) type_counts[iv.type()] += 1.0;
  }

  out.values.reserve(quantities.size());
  for (const auto& q : quantities) {
    double value = 0.0;
    switch (q.source) {
      case Quantity::Source::VoronoiVertices:
        for (const auto& cell : mosaic.cells()) {
          if (cell.dim == cfg.n && in_window(intervals[cell.owner].sphere.center)) value += 1.0;
        }
        break;
      case Quantity::Source::EdgeLength:
        // A truncated mosaic can leave Voronoi edges open; the value is then undefined.
        try {
          value = skeleton_measure(X, mosaic, 1, cfg.window);
        } catch (const std::logic_error&) {
          if (!out.summary.biased) throw;
          value = std::numeric_limits<double>::quiet_NaN();
        }
        break;
      case Quantity::Source::Cells:
        value = cell_counts[q.j];
        break;
      case Quantity::Source::Intervals: {
        const auto it = type_counts.find(q.type);
        value = it == type_counts.end() ? 0.0 : it->second;
        break;
      }
    }
    out.values.push_back(value / volume);
  }

  if (cfg.structural_checks) {
    const auto s = check_structure(mosaic);
    out.structure.checked_pairs = s.checked_pairs;
    out.structure.closure_violations = s.closure_violations;
    out.structure.monotonicity_violations = s.monotonicity_violations;
    out.structure.euler_violations = s.euler_sum != 0 ? 1 : 0;

    std::vector<std::size_t> per_owner(intervals.size(), 0);
    for (const auto& cell : mosaic.cells()) ++per_owner[cell.owner];
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      const auto t = intervals[i].type();
      ++out.structure.intervals_checked;
      if (per_owner[i] != interval_cell_total(t.v, t.g, t.u)) ++out.structure.cell_count_mismatches;
    }

    std::vector<std::size_t> order(intervals.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> picked;
    const auto want = std::min<std::size_t>(static_cast<std::size_t>(std::max(cfg.duality_samples, 0)),
                                            intervals.size());
    std::mt19937_64 pick_engine(splitmix64(out.summary.seed ^ 0xd1b54a32d192ed03ULL));
    std::sample(order.begin(), order.end(), std::back_inserter(picked), want, pick_engine);
    for (std::size_t i : picked) {
      const auto& iv = intervals[i];
      const CellKey expected = iv.upper_bound();
      const PointClass pc = classify_point(X, iv.sphere.center, cfg.k);
      ++out.structure.duality_checked;
      if (pc.signature != expected || pc.voronoi_dim != cfg.n - expected.dim()) {
        ++out.structure.duality_violations;
      }
    }
  }
  return out;
}

std::pair<double, double> mean_and_stderr(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

// Theory value and its uncertainty from the constants' standard errors. Every
// prediction is linear in the constants, so each partial derivative is the
// change from doubling one entry divided by that entry.
template <class F>
std::pair<double, double> propagate(const F& predict, const CTable& table) {
  const double base = predict(table);
  double var = 0.0;
  for (const auto& [key, entry] : table.entries()) {
    if (entry.stderr_ <= 0.0) continue;
    CTable bumped = table;
    CTableEntry e = entry;
    e.value *= 2.0;
    bumped.set(key.first, key.second, e);
    const double slope = (predict(bumped) - base) / entry.value;
    var += slope * slope * entry.stderr_ * entry.stderr_;
  }
  return {base, std::sqrt(var)};
}

nlohmann::json box_json(const Box& b, int n) {
  nlohmann::json lo = nlohmann::json::array(), hi = nlohmann::json::array();
  for (int a = 0; a < n; ++a) {
    lo.push_back(b.lo[a]);
    hi.push_back(b.hi[a]);
  }
  return {{"lo", lo}, {"hi", hi}};
}

nlohmann::json optional_number(const std::optional<double>& x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

nlohmann::json radius_json(double r) { return std::isinf(r) ? nlohmann::json("inf") : nlohmann::json(r); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(~stream));
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t replication) noexcept {
  return splitmix64(splitmix64(master) + static_cast<std::uint64_t>(replication));
}

PointSet sample_poisson(int n, double side, double rho, std::uint64_t seed) {
  if (n < 1 || n > 3) throw Error(ErrorKind::UnsupportedDimension, "sampling supports n = 1, 2, 3");
  if (!(side > 0.0) || !(rho > 0.0)) throw Error(ErrorKind::DomainError, "side and rho must be positive");
  std::mt19937_64 engine(seed);
  std::poisson_distribution<long long> count(rho * std::pow(side, n));
  std::uniform_real_distribution<double> coord(0.0, side);
  const long long N = count(engine);
  std::vector<Vec> points(static_cast<std::size_t>(N), Vec{});
  for (auto& p : points) {
    for (int a = 0; a < n; ++a) {
      p[a] = coord(engine);
      if (p[a] >= side) p[a] = 0.0;
    }
  }
  return PointSet(n, std::move(points), side);
}

std::string interval_quantity_name(const IntervalType& t) {
  return "interval_intensity_v" + std::to_string(t.v) + "_u" + std::to_string(t.u) + "_g" + std::to_string(t.g);
}

std::string cell_quantity_name(int j) { return "cell_intensity_d" + std::to_string(j); }

void ExperimentConfig::validate() const {
  if (n != 2 && n != 3) throw Error(ErrorKind::UnsupportedDimension, "experiments support n = 2 or 3");
  if (k < 1) throw Error(ErrorKind::DomainError, "order k must be positive");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(ErrorKind::DomainError, "rho must be positive");
  if (!(side > 0.0) || !std::isfinite(side)) throw Error(ErrorKind::DomainError, "side must be positive");
  if (replications < 2) throw Error(ErrorKind::DomainError, "at least 2 replications are needed");
  if (!(r0 >= 0.0)) throw Error(ErrorKind::DomainError, "r0 must be nonnegative");
  if (std::isfinite(r0) && !(side > 8.0 * r0)) {
    throw Error(ErrorKind::DomainError, "the box side must exceed 8 r0");
  }
  if (window) {
    for (int a = 0; a < n; ++a) {
      if (!(window->lo[a] >= 0.0 && window->hi[a] <= side && window->lo[a] < window->hi[a])) {
        throw Error(ErrorKind::DomainError, "window must be a nonempty sub-box of the torus");
      }
    }
  }
  if (r_max.kind == RMaxPolicy::Kind::Fixed && !(r_max.value > 0.0 && r_max.value < side / 4.0)) {
    throw Error(ErrorKind::PeriodicCutoffExceeded, "fixed r_max must lie in (0, L/4)");
  }
  if (duality_samples < 0) throw Error(ErrorKind::DomainError, "duality_samples must be nonnegative");
}

double ExperimentConfig::window_volume() const {
  return window ? window->volume(n) : std::pow(side, n);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["k"] = k;
  j["rho"] = rho;
  j["side"] = side;
  j["replications"] = replications;
  j["r0"] = radius_json(r0);
  j["window"] = window ? box_json(*window, n) : nlohmann::json("torus");
  j["seed"] = seed;
  if (r_max.kind == RMaxPolicy::Kind::Certified) {
    j["r_max"] = "certified";
  } else {
    j["r_max"] = r_max.value;
  }
  j["structural_checks"] = structural_checks;
  j["duality_samples"] = duality_samples;
  return j;
}

const QuantityEstimate* EstimateReport::find(const std::string& name) const {
  for (const auto& q : quantities) {
    if (q.name == name) return &q;
  }
  return nullptr;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const CTable* ctable) {
  config.validate();
  if (ctable && ctable->n() != config.n) {
    throw Error(ErrorKind::MissingConstant, "C-table dimension does not match the experiment");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto quantities = quantity_list(config);
  const auto R = static_cast<std::size_t>(config.replications);

  std::vector<ReplicationOutput> outputs(R);
  std::vector<std::exception_ptr> errors(R);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < R; r = next++) {
      try {
        outputs[r] = run_replication(config, quantities, r);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  unsigned threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, R));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentResult result;
  EstimateReport& report = result.report;
  report.config = config;
  ModelParams params;
  params.n = config.n;
  params.k = config.k;
  params.rho = config.rho;
  params.volume = 1.0;
  params.r0 = config.r0;

  for (std::size_t qi = 0; qi < quantities.size(); ++qi) {
    const auto& q = quantities[qi];
    std::vector<double> samples(R);
    for (std::size_t r = 0; r < R; ++r) samples[r] = outputs[r].values[qi];
    QuantityEstimate est;
    est.name = q.name;
    std::tie(est.mean, est.stderr_) = mean_and_stderr(samples);

    switch (q.source) {
      case Quantity::Source::VoronoiVertices:
        est.theory = expected_area(0, params);
        break;
      case Quantity::Source::EdgeLength:
        est.theory = expected_area(1, params);
        break;
      case Quantity::Source::Cells:
        if (q.j == 0 && config.k == 1) {
          est.theory = config.rho;
        } else if (ctable) {
          auto [t, se] = propagate([&](const CTable& c) { return expected_cell_count(q.j, params, c); }, *ctable);
          est.theory = t;
          est.theory_stderr = se;
        }
        break;
      case Quantity::Source::Intervals:
        if (q.type.u == 0) {
          est.theory = config.rho;
        } else if (ctable) {
          auto [t, se] = propagate(
              [&](const CTable& c) { return expected_interval_count(q.type, params, c); }, *ctable);
          est.theory = t;
          est.theory_stderr = se;
        }
        break;
    }
    if (est.theory) {
      const double se_t = est.theory_stderr.value_or(0.0);
      const double denom = std::sqrt(est.stderr_ * est.stderr_ + se_t * se_t);
      if (denom > 0.0) {
        est.z = (est.mean - *est.theory) / denom;
      } else {
        est.z = est.mean == *est.theory ? 0.0 : std::copysign(kInfiniteRadius, est.mean - *est.theory);
      }
    }
    report.quantities.push_back(std::move(est));
  }

  report.radius_histograms.assign(config.n + 1, RadiusHistogram{});
  for (auto& h : report.radius_histograms) {
    h.upper = histogram_upper(config);
    h.counts.assign(kHistogramBins, 0);
  }
  result.cell_radii.assign(config.n + 1, {});
  for (auto& out : outputs) {
    auto& s = report.structure;
    s.checked_pairs += out.structure.checked_pairs;
    s.closure_violations += out.structure.closure_violations;
    s.monotonicity_violations += out.structure.monotonicity_violations;
    s.euler_violations += out.structure.euler_violations;
    s.duality_checked += out.structure.duality_checked;
    s.duality_violations += out.structure.duality_violations;
    s.intervals_checked += out.structure.intervals_checked;
    s.cell_count_mismatches += out.structure.cell_count_mismatches;
    report.biased = report.biased || out.summary.biased;
    report.replications.push_back(out.summary);
    for (int j = 0; j <= config.n; ++j) {
      for (int b = 0; b < kHistogramBins; ++b) report.radius_histograms[j].counts[b] += out.histograms[j][b];
      report.radius_histograms[j].overflow += out.overflow[j];
      if (config.keep_radii) {
        auto& dst = result.cell_radii[j];
        dst.insert(dst.end(), out.radii[j].begin(), out.radii[j].end());
      }
    }
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (report.biased && config.fail_on_bias) {
    throw Error(ErrorKind::BiasFlag, "an interval radius came within 1% of the r_max cutoff");
  }
  return result;
}

CTable estimate_ctable(int n, const ExperimentConfig& config, EstimateReport* report) {
  if (n != 2 && n != 3) throw Error(ErrorKind::UnsupportedDimension, "constants are estimated for n = 2 or 3");
  ExperimentConfig cfg = config;
  cfg.n = n;
  cfg.k = 1;
  cfg.r0 = kInfiniteRadius;
  auto result = run_experiment(cfg);

  ModelParams params;
  params.n = n;
  params.k = 1;
  params.rho = cfg.rho;
  std::ostringstream run_id;
  run_id << "seed=" << cfg.seed << ",reps=" << cfg.replications << ",L=" << cfg.side << ",rho=" << cfg.rho;

  CTable table(n);
  for (int u = 1; u <= n; ++u) {
    for (int v = 1; v <= u; ++v) {
      const auto* q = result.report.find(interval_quantity_name({v, u, 1}));
      const double scale = interval_prefactor(u, 1, params) * cfg.rho;
      if (q == nullptr || !(q->mean > 0.0)) {
        throw Error(ErrorKind::DomainError, "no intervals of type " + IntervalType{v, u, 1}.str() +
                                                " observed; increase the box or the replications");
      }
      CTableEntry entry;
      entry.value = q->mean / scale;
      entry.stderr_ = q->stderr_ / scale;
      entry.provenance = {Provenance::Kind::Estimated, run_id.str()};
      table.set(v, u, entry);
    }
  }
  if (report) *report = std::move(result.report);
  return table;
}

nlohmann::json report_to_json(const EstimateReport& report) {
  nlohmann::json j;
  j["version"] = version_string();
  j["config"] = report.config.to_json();
  auto qs = nlohmann::json::array();
  for (const auto& q : report.quantities) {
    qs.push_back({{"name", q.name},
                  {"mean", q.mean},
                  {"stderr", q.stderr_},
                  {"theory", optional_number(q.theory)},
                  {"theory_stderr", optional_number(q.theory_stderr)},
                  {"z", optional_number(q.z)}});
  }
  j["quantities"] = std::move(qs);
  const auto& s = report.structure;
  j["structure"] = {{"checked_pairs", s.checked_pairs},
                    {"closure_violations", s.closure_violations},
                    {"monotonicity_violations", s.monotonicity_violations},
                    {"euler_violations", s.euler_violations},
                    {"duality_checked", s.duality_checked},
                    {"duality_violations", s.duality_violations},
                    {"intervals_checked", s.intervals_checked},
                    {"cell_count_mismatches", s.cell_count_mismatches}};
  auto reps = nlohmann::json::array();
  for (const auto& r : report.replications) {
    reps.push_back({{"seed", r.seed},
                    {"points", r.points},
                    {"r_max", r.r_max},
                    {"max_radius", r.max_radius},
                    {"biased", r.biased}});
  }
  j["replications"] = std::move(reps);
  auto hists = nlohmann::json::array();
  for (std::size_t d = 0; d < report.radius_histograms.size(); ++d) {
    const auto& h = report.radius_histograms[d];
    hists.push_back({{"dim", d}, {"upper", h.upper}, {"counts", h.counts}, {"overflow", h.overflow}});
  }
  j["radius_histograms"] = std::move(hists);
  j["biased"] = report.biased;
  return j;
}

std::string report_to_csv(const EstimateReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "# " << version_string() << "\n";
  out << "# config " << report.config.to_json().dump() << "\n";
  out << "name,mean,stderr,theory,z\n";
  for (const auto& q : report.quantities) {
    out << q.name << ',' << q.mean << ',' << q.stderr_ << ',';
    if (q.theory) out << *q.theory;
    out << ',';
    if (q.z) out << *q.z;
    out << '\n';
  }
  return out.str();
}

}  // namespace orderk
