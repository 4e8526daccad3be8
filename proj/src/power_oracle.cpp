#include "orderk/power_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace orderk::oracle {

namespace {

double sq(double x) { return x * x; }

double dist2(const Vec& a, const Vec& b) { return sq(a[0] - b[0]) + sq(a[1] - b[1]); }

// Keeps the part of the polygon with a.p <= b.
std::vector<Vec> clip(const std::vector<Vec>& poly, double ax, double ay, double b) {
  std::vector<Vec> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& p = poly[i];
    const Vec& q = poly[(i + 1) % n];
    const double fp = ax * p[0] + ay * p[1] - b;
    const double fq = ax * q[0] + ay * q[1] - b;
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
      const double t = fp / (fp - fq);
      out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), 0.0});
    }
  }
  std::vector<Vec> dedup;
  for (const auto& p : out) {
    if (dedup.empty() || dist2(dedup.back(), p) > sq(kDedupEps)) dedup.push_back(p);
  }
  while (dedup.size() > 1 && dist2(dedup.front(), dedup.back()) <= sq(kDedupEps)) dedup.pop_back();
  return dedup;
}

double polygon_area(const std::vector<Vec>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec& p = poly[i];
    const Vec& q = poly[(i + 1) % poly.size()];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

bool on_boundary(const Box& w, const Vec& p) {
  return std::abs(p[0] - w.lo[0]) <= kDedupEps || std::abs(p[0] - w.hi[0]) <= kDedupEps ||
         std::abs(p[1] - w.lo[1]) <= kDedupEps || std::abs(p[1] - w.hi[1]) <= kDedupEps;
}

void subsets(int n, int k, int start, std::vector<Label>& cur, std::vector<std::vector<Label>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < n; ++i) {
    cur.push_back(static_cast<Label>(i));
    subsets(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

struct Accumulator {
  DualCell cell;
  void merge(bool clean) { cell.clean = cell.clean && clean; }
};

}  // namespace

double WeightedSite::power(const Vec& p) const { return dist2(p, x) - w; }

double Domain::area() const { return polygon_area(polygon); }

Tessellation order_k_voronoi(const std::vector<Vec>& points, int k, const Box& window) {
  if (points.size() > 14 || k > 3) {
    throw Error(ErrorKind::TooLarge, "oracle is limited to 14 points and k <= 3");
  }
  if (k < 1 || points.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::InsufficientPoints, "oracle needs at least k points");
  }
  Tessellation t;
  t.k = k;
  t.window = window;
  t.points = points;

  std::vector<std::vector<Label>> qs;
  std::vector<Label> cur;
  subsets(static_cast<int>(points.size()), k, 0, cur, qs);

  std::vector<WeightedSite> sites;
  std::vector<double> mean_sq;  // sum |q|^2 / k
  for (auto& Q : qs) {
    WeightedSite s;
    double m = 0.0;
    for (Label l : Q) {
      s.x[0] += points[l][0] / k;
      s.x[1] += points[l][1] / k;
      m += (sq(points[l][0]) + sq(points[l][1])) / k;
    }
    s.w = sq(s.x[0]) + sq(s.x[1]) - m;
    s.Q = std::move(Q);
    sites.push_back(std::move(s));
    mean_sq.push_back(m);
  }

  const std::vector<Vec> box{{window.lo[0], window.lo[1], 0.0},
                             {window.hi[0], window.lo[1], 0.0},
                             {window.hi[0], window.hi[1], 0.0},
                             {window.lo[0], window.hi[1], 0.0}};
  for (std::size_t i = 0; i < sites.size(); ++i) {
    std::vector<Vec> poly = box;
    // pi_i(p) <= pi_j(p)  <=>  2 p.(x_j - x_i) <= m_j - m_i
    for (std::size_t j = 0; j < sites.size() && poly.size() >= 3; ++j) {
      if (j == i) continue;
      poly = clip(poly, 2.0 * (sites[j].x[0] - sites[i].x[0]), 2.0 * (sites[j].x[1] - sites[i].x[1]),
                  mean_sq[j] - mean_sq[i]);
    }
    if (poly.size() < 3 || polygon_area(poly) <= 1e-14) continue;
    t.domains.push_back({sites[i], std::move(poly)});
  }
  return t;
}

std::vector<Label> owner_at(const Tessellation& t, const Vec& p) {
  const Domain* best = nullptr;
  double best_power = 0.0;
  for (const auto& d : t.domains) {
    const double pw = d.site.power(p);
    if (!best || pw < best_power) {
      best = &d;
      best_power = pw;
    }
  }
  return best ? best->site.Q : std::vector<Label>{};
}

Signature signature_at(const std::vector<Vec>& points, const Vec& p, int k) {
  std::vector<double> d(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d[i] = std::sqrt(dist2(points[i], p));
  std::vector<double> sorted = d;
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
  const double r = sorted[k - 1];
  Signature s;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (d[i] < r - kDedupEps) {
      s.inside.push_back(static_cast<Label>(i));
    } else if (d[i] <= r + kDedupEps) {
      s.on.push_back(static_cast<Label>(i));
    }
  }
  return s;
}

std::vector<DualCell> dual_complex(const Tessellation& t, BoundaryPolicy policy) {
  std::map<CellKey, Accumulator> features;
  auto add = [&](CellKey key, int dim, bool clean) {
    if (!clean && policy == BoundaryPolicy::Throw) {
      throw Error(ErrorKind::BoundaryContamination, "a Voronoi feature touches the window boundary");
    }
    auto [it, inserted] = features.try_emplace(key, Accumulator{DualCell{key, dim, clean}});
    if (!inserted) it->second.merge(clean);
  };

  for (const auto& dom : t.domains) {
    bool clean = true;
    for (const auto& p : dom.polygon) clean = clean && !on_boundary(t.window, p);
    add(CellKey{dom.site.Q, {}}, 0, clean);

    const std::size_t n = dom.polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec& a = dom.polygon[i];
      const Vec& b = dom.polygon[(i + 1) % n];
      const Vec mid{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.0};
      auto sig = signature_at(t.points, mid, t.k);
      // A genuine feature has more than k points at or inside the k-th distance.
      if (sig.on.size() == 2 && sig.inside.size() + 2 > static_cast<std::size_t>(t.k)) {
        add(CellKey{std::move(sig.inside), std::move(sig.on)}, 1,
            !on_boundary(t.window, a) && !on_boundary(t.window, b));
      }
      auto vsig = signature_at(t.points, a, t.k);
      if (vsig.on.size() >= 3 && vsig.inside.size() + vsig.on.size() > static_cast<std::size_t>(t.k)) {
        add(CellKey{std::move(vsig.inside), std::move(vsig.on)}, static_cast<int>(vsig.on.size()) - 1,
            !on_boundary(t.window, a));
      }
    }
  }

  std::vector<DualCell> out;
  out.reserve(features.size());
  for (auto& [key, acc] : features) out.push_back(std::move(acc.cell));
  return out;
}

Comparison compare(const Mosaic& mosaic, const Tessellation& t) {
  const int k = mosaic.k();
  const auto& cells = mosaic.cells();
  std::map<CellKey, bool> clean;

  std::map<CellKey, std::vector<bool>> cofaces;  // 1-cell -> clean flags of its 2-cells
  for (const auto& c : cells) {
    if (c.dim != 2) continue;
    const Vec& p = mosaic.intervals()[c.owner].sphere.center;
    const bool inside = p[0] > t.window.lo[0] + kDedupEps && p[0] < t.window.hi[0] - kDedupEps &&
                        p[1] > t.window.lo[1] + kDedupEps && p[1] < t.window.hi[1] - kDedupEps;
    clean[c.key] = inside;
    for (const auto& f : face_keys(c.key, k)) {
      if (f.dim() == 1) cofaces[f].push_back(inside);
    }
  }
  std::map<CellKey, std::vector<bool>> incident;  // 0-cell -> clean flags of its 1-cells
  for (const auto& c : cells) {
    if (c.dim != 1) continue;
    const auto it = cofaces.find(c.key);
    const bool ok = it != cofaces.end() && it->second.size() == 2 && it->second[0] && it->second[1];
    clean[c.key] = ok;
    for (const auto& f : face_keys(c.key, k)) {
      if (f.dim() == 0) incident[f].push_back(ok);
    }
  }
  for (const auto& c : cells) {
    if (c.dim != 0) continue;
    const auto it = incident.find(c.key);
    clean[c.key] = it != incident.end() && !it->second.empty() &&
                   std::all_of(it->second.begin(), it->second.end(), [](bool b) { return b; });
  }

  Comparison out;
  std::map<CellKey, bool> oracle;
  for (const auto& d : dual_complex(t)) oracle[d.key] = d.clean;
  out.oracle_cells = oracle.size();
  for (const auto& [key, is_clean] : oracle) {
    if (is_clean) ++out.oracle_clean;
    const auto it = clean.find(key);
    if (it == clean.end()) {
      out.missing_in_mosaic.push_back(key);
    } else if (is_clean && !it->second) {
      out.oracle_clean_not_clean_in_mosaic.push_back(key);
    }
  }
  for (const auto& [key, is_clean] : clean) {
    if (!is_clean) continue;
    ++out.mosaic_clean;
    if (!oracle.count(key)) out.clean_missing_in_oracle.push_back(key);
  }
  return out;
}

}  // namespace orderk::oracle
