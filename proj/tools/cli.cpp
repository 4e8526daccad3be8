#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "orderk/closed_form.hpp"
#include "orderk/io.hpp"
#include "orderk/mosaic.hpp"
#include "orderk/stochastic.hpp"

namespace orderk::cli {

namespace {

double parse_radius(const std::string& s) {
  if (s == "inf" || s == "infinity" || s == "Infinity") return kInfiniteRadius;
  std::size_t used = 0;
  double r = 0.0;
  try {
    r = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(r >= 0.0)) throw Error(ErrorKind::DomainError, "bad radius '" + s + "'");
  return r;
}

std::string fmt12(double x) {
  std::ostringstream s;
  s << std::setprecision(12) << x;
  return s.str();
}

struct SimFlags {
  int n = 2;
  int k = 1;
  double rho = 1.0;
  double side = 30.0;
  int reps = 50;
  std::string r0 = "inf";
  std::vector<double> window;
  std::uint64_t seed = 42;
  std::optional<double> r_max;
  unsigned threads = 0;
  std::string out;
  std::string csv;
  std::string ctable;
  bool strict = false;
  bool no_checks = false;
  int duality = 1000;

  void add_to(CLI::App* cmd, bool with_k) {
    cmd->add_option("--n", n, "Dimension (2 or 3)")->capture_default_str();
    if (with_k) cmd->add_option("--k", k, "Order")->capture_default_str();
    cmd->add_option("--rho", rho, "Intensity")->capture_default_str();
    cmd->add_option("--side,-L", side, "Side of the periodic box")->capture_default_str();
    cmd->add_option("--reps,-R", reps, "Replications")->capture_default_str();
    if (with_k) cmd->add_option("--r0", r0, "Radius threshold ('inf' for none)")->capture_default_str();
    if (with_k) cmd->add_option("--window", window, "Counting window lo..., hi... (default: whole torus)")->delimiter(',');
    cmd->add_option("--seed", seed, "Master seed (64-bit)")->capture_default_str();
    cmd->add_option("--r-max", r_max, "Fixed enumeration cutoff (default: certified per replication)");
    cmd->add_option("--threads", threads, "Worker cap (0: all cores)")->capture_default_str();
    cmd->add_option("--out", out, "Output JSON path");
    if (with_k) {
      cmd->add_option("--csv", csv, "Output CSV path");
      cmd->add_option("--ctable", ctable, "C-table JSON for per-type predictions");
      cmd->add_flag("--no-checks", no_checks, "Skip structural checks");
      cmd->add_option("--duality-samples", duality, "Interval centers checked per replication")
          ->capture_default_str();
    }
    cmd->add_flag("--strict", strict, "Nonzero exit on a bias flag or a failed comparison");
  }

  ExperimentConfig config() const {
    ExperimentConfig c;
    c.n = n;
    c.k = k;
    c.rho = rho;
    c.side = side;
    c.replications = reps;
    c.r0 = parse_radius(r0);
    c.seed = seed;
    c.threads = threads;
    c.structural_checks = !no_checks;
    c.duality_samples = duality;
    c.fail_on_bias = false;
    if (r_max) c.r_max = {RMaxPolicy::Kind::Fixed, *r_max};
    if (!window.empty()) {
      if (window.size() != static_cast<std::size_t>(2 * n)) {
        throw Error(ErrorKind::DomainError, "--window needs 2n numbers: lo coordinates then hi coordinates");
      }
      Box b;
      for (int a = 0; a < n; ++a) {
        b.lo[a] = window[a];
        b.hi[a] = window[n + a];
      }
      c.window = b;
    }
    return c;
  }
};

void print_table(std::ostream& out, const EstimateReport& report, bool verdicts) {
  out << std::left << std::setw(36) << "quantity" << std::right << std::setw(14) << "mean" << std::setw(12)
      << "stderr" << std::setw(14) << "theory" << std::setw(9) << "z";
  if (verdicts) out << "  verdict";
  out << "\n";
  for (const auto& q : report.quantities) {
    out << std::left << std::setw(36) << q.name << std::right << std::setw(14) << fmt12(q.mean).substr(0, 13)
        << std::setw(12) << fmt12(q.stderr_).substr(0, 11) << std::setw(14)
        << (q.theory ? fmt12(*q.theory).substr(0, 13) : "-") << std::setw(9)
        << (q.z ? fmt12(std::round(*q.z * 100.0) / 100.0) : "-");
    if (verdicts) out << "  " << (!q.theory ? "n/a" : q.within(3.0) ? "PASS" : "FAIL");
    out << "\n";
  }
  const auto& s = report.structure;
  out << "structure: " << s.checked_pairs << " face pairs, " << s.duality_checked << " duality probes, "
      << s.intervals_checked << " intervals, " << s.violations() << " violations\n";
}

int finish_experiment(const SimFlags& flags, const EstimateReport& report, bool verdicts, std::ostream& out,
                      std::ostream& err) {
  auto j = report_to_json(report);
  if (!flags.ctable.empty()) j["config"]["ctable"] = flags.ctable;
  if (!flags.out.empty()) write_text_file(flags.out, j.dump(2) + "\n");
  if (!flags.csv.empty()) write_text_file(flags.csv, report_to_csv(report));
  print_table(out, report, verdicts);
  out << "runtime: " << std::fixed << std::setprecision(2) << report.runtime_seconds << " s\n"
      << std::defaultfloat;

  bool failed = report.structure.violations() != 0;
  if (verdicts) {
    for (const auto& q : report.quantities) failed = failed || (q.theory && !q.within(3.0));
  }
  if (report.biased) err << "warning: an interval came within 1% of the r_max cutoff\n";
  if (flags.strict && report.biased) return kBias;
  if (flags.strict && failed) return kFail;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Order-k Delaunay mosaics and Poisson-Voronoi expectations"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  // expect
  auto* expect = app.add_subcommand("expect", "Closed-form expected values per unit volume");
  int e_n = 2, e_k = 1;
  std::optional<int> e_ell, e_j;
  double e_rho = 1.0;
  std::string e_r0 = "inf", e_ctable;
  std::vector<int> e_type;
  expect->add_option("--n", e_n, "Dimension")->capture_default_str();
  expect->add_option("--k", e_k, "Order")->capture_default_str();
  auto* ell_opt = expect->add_option("--ell", e_ell, "Skeleton dimension (Voronoi measure)");
  auto* j_opt = expect->add_option("--j", e_j, "Mosaic cell dimension");
  auto* type_opt = expect->add_option("--type", e_type, "Interval type v,u,g")->delimiter(',')->expected(3);
  ell_opt->excludes(j_opt)->excludes(type_opt);
  j_opt->excludes(type_opt);
  expect->add_option("--rho", e_rho, "Intensity")->capture_default_str();
  expect->add_option("--r0", e_r0, "Radius threshold for --j / --type")->capture_default_str();
  expect->add_option("--ctable", e_ctable, "C-table JSON");

  // simulate / compare
  SimFlags sim, cmp;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates on a periodic box");
  sim.add_to(simulate, true);
  auto* compare = app.add_subcommand("compare", "Monte Carlo against the closed form, PASS/FAIL per quantity");
  cmp.add_to(compare, true);

  // mosaic
  auto* mosaic = app.add_subcommand("mosaic", "Order-k Delaunay mosaic of a CSV point file as JSON");
  std::string m_input, m_out;
  int m_k = 1;
  std::optional<double> m_periodic, m_r_max, m_jitter;
  std::uint64_t m_seed = 42;
  unsigned m_threads = 0;
  mosaic->add_option("--input", m_input, "CSV points (x,y or x,y,z)")->required();
  mosaic->add_option("--k", m_k, "Order")->capture_default_str();
  mosaic->add_option("--periodic", m_periodic, "Treat points as living on a torus of this side");
  mosaic->add_option("--r-max", m_r_max, "Enumeration cutoff");
  mosaic->add_option("--jitter", m_jitter, "Gaussian jitter sigma applied before processing");
  mosaic->add_option("--seed", m_seed, "Jitter seed")->capture_default_str();
  mosaic->add_option("--threads", m_threads, "Worker cap (0: all cores)")->capture_default_str();
  mosaic->add_option("--out", m_out, "Output JSON path (default: stdout)");
  bool m_strict = false;
  mosaic->add_flag("--strict", m_strict, "Accepted for symmetry; mosaic output has no verdicts");

  // constants
  SimFlags cst;
  auto* constants = app.add_subcommand("constants", "Estimate the C-table from k = 1 simulations");
  cst.add_to(constants, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (expect->parsed()) {
      ModelParams params;
      params.n = e_n;
      params.k = e_k;
      params.rho = e_rho;
      params.volume = 1.0;
      params.r0 = parse_radius(e_r0);
      params.validate();
      CTable table(e_n);
      if (!e_ctable.empty()) table = read_ctable_file(e_ctable);
      double value = 0.0;
      if (e_ell) {
        value = expected_area(*e_ell, params);
      } else if (e_j) {
        value = expected_cell_count(*e_j, params, table);
      } else if (!e_type.empty()) {
        const IntervalType t{e_type[0], e_type[1], e_type[2]};
        if (t.u != 0 && !admissible(t.v, t.u, t.g, params.k)) {
          throw Error(ErrorKind::InvalidType, "type " + t.str() + " is not admissible at this order");
        }
        value = expected_interval_count(t, params, table);
      } else {
        throw Error(ErrorKind::DomainError, "expect needs one of --ell, --j, --type");
      }
      out << fmt12(value) << "\n";
      return kOk;
    }

    if (simulate->parsed() || compare->parsed()) {
      const bool is_compare = compare->parsed();
      const SimFlags& flags = is_compare ? cmp : sim;
      const auto config = flags.config();
      std::optional<CTable> table;
      if (!flags.ctable.empty()) table = read_ctable_file(flags.ctable);
      const auto result = run_experiment(config, table ? &*table : nullptr);
      return finish_experiment(flags, result.report, is_compare, out, err);
    }

    if (mosaic->parsed()) {
      PointSet X = read_points_csv_file(m_input, m_periodic);
      if (m_jitter) X = jitter(X, *m_jitter, m_seed);
      EnumerationOptions options;
      options.threads = m_threads;
      if (m_r_max) {
        options.r_max = *m_r_max;
      } else if (X.periodic()) {
        options.r_max = complete_torus_r_max(X, m_k);
      }
      const Mosaic built = build_mosaic(X, m_k, options);
      auto j = mosaic_to_json(built);
      j["version"] = version_string();
      j["config"] = {{"input", m_input},
                     {"k", m_k},
                     {"points", X.size()},
                     {"dim", X.dim()},
                     {"periodic", m_periodic ? nlohmann::json(*m_periodic) : nlohmann::json(nullptr)},
                     {"r_max", std::isinf(options.r_max) ? nlohmann::json("inf") : nlohmann::json(options.r_max)},
                     {"jitter", m_jitter ? nlohmann::json(*m_jitter) : nlohmann::json(nullptr)},
                     {"seed", m_seed}};
      const std::string text = j.dump(2) + "\n";
      if (m_out.empty()) {
        out << text;
      } else {
        write_text_file(m_out, text);
        const auto counts = built.count_by_dim();
        out << built.intervals().size() << " intervals, " << built.cells().size() << " cells (";
        for (int d = 0; d <= X.dim(); ++d) out << (d ? ", " : "") << counts[d] << " of dim " << d;
        out << ")\n";
      }
      return kOk;
    }

    if (constants->parsed()) {
      auto config = cst.config();
      EstimateReport report;
      const CTable table = estimate_ctable(config.n, config, &report);
      auto j = ctable_to_json(table);
      j["version"] = version_string();
      j["config"] = report.config.to_json();
      const std::string text = j.dump(2) + "\n";
      if (cst.out.empty()) {
        out << text;
      } else {
        write_text_file(cst.out, text);
        for (const auto& [key, e] : table.entries()) {
          out << "C_" << key.first << "^{" << key.second << "," << table.n() << "} = " << fmt12(e.value)
              << " +- " << fmt12(e.stderr_) << "\n";
        }
      }
      if (report.biased) {
        err << "warning: an interval came within 1% of the r_max cutoff\n";
        if (cst.strict) return kBias;
      }
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::MissingConstant:
        return kMissingConstant;
      case ErrorKind::BiasFlag:
        return kBias;
      default:
        return kUsage;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}

}  // namespace orderk::cli
