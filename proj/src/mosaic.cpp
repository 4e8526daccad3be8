#include "orderk/mosaic.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "orderk/spatial_grid.hpp"

namespace orderk {

std::size_t CellKeyHash::operator()(const CellKey& key) const noexcept {
  std::size_t h = 0x9e3779b97f4a7c15ULL;
  auto mix = [&h](std::size_t x) { h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  for (Label l : key.inside) mix(l);
  mix(0xffffffffULL);
  for (Label l : key.on) mix(l);
  return h;
}

CellKey RelaxedInterval::upper_bound() const {
  if (vertex) {
    std::vector<Label> q = I;
    q.insert(q.end(), U.begin(), U.end());
    std::sort(q.begin(), q.end());
    return {std::move(q), {}};
  }
  return {I, U};
}

Mosaic::Mosaic(int k, int dim, std::vector<RelaxedInterval> intervals, std::vector<Cell> cells)
    : k_(k), dim_(dim), intervals_(std::move(intervals)), cells_(std::move(cells)) {
  index_.reserve(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto [it, inserted] = index_.emplace(cells_[c].key, c);
    if (!inserted) {
      throw Error(ErrorKind::DuplicateCellOwnership,
                  "cell claimed by intervals " + std::to_string(cells_[it->second].owner) +
                      " and " + std::to_string(cells_[c].owner));
    }
  }
}

const Cell* Mosaic::find(const CellKey& key) const {
  const auto it = index_.find(key);
  return it == index_.end() ? nullptr : &cells_[it->second];
}

std::array<std::size_t, 4> Mosaic::count_by_dim() const {
  std::array<std::size_t, 4> counts{};
  for (const auto& c : cells_) ++counts[c.dim];
  return counts;
}

namespace {

std::string tuple_name(std::span<const Label> U) {
  std::string s = "{";
  for (std::size_t i = 0; i < U.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(U[i]);
  }
  return s + "}";
}

struct Candidate {
  Label label;
  Vec disp;  // displacement from the tuple's first vertex
};

// Enumerates relaxed intervals whose tuples start at a given first label.
class TupleScanner {
 public:
  TupleScanner(const PointSet& X, int k, const EnumerationOptions& options, const SpatialGrid* grid)
      : X_(X), k_(k), options_(options), grid_(grid), max_size_(X.dim() + 1) {}

  void scan(Label first, std::vector<Candidate> candidates, std::vector<RelaxedInterval>& out) {
    first_ = first;
    candidates_ = std::move(candidates);
    labels_[0] = first;
    local_[0] = Vec{};
    out_ = &out;
    extend(1, 0);
  }

 private:
  // `size` vertices are fixed; candidates from index `from` on may be appended.
  void extend(std::size_t size, std::size_t from) {
    if (!process(size)) return;
    if (size == max_size_) return;
    const double reach = 2.0 * options_.r_max;
    for (std::size_t c = from; c < candidates_.size(); ++c) {
      const auto& cand = candidates_[c];
      bool close = true;
      for (std::size_t t = 1; t < size && close; ++t) {
        close = norm(cand.disp - local_[t]) <= reach;
      }
      if (!close) continue;
      labels_[size] = cand.label;
      local_[size] = cand.disp;
      extend(size + 1, c + 1);
    }
  }

  // Classifies the current tuple; returns false when supersets can be pruned.
  bool process(std::size_t size) {
    const std::span<const Label> U(labels_.data(), size);
    std::optional<LocalSimplex> simplex;
    try {
      simplex.emplace(std::span<const Vec>(local_.data(), size));
    } catch (const Error& e) {
      // Nearly flat tuples far beyond the cutoff cannot matter.
      if (circumradius_lower_bound(std::span<const Vec>(local_.data(), size)) > options_.r_max) return false;
      throw Error(e.kind(), "tuple " + tuple_name(U) + ": " + e.what());
    }
    const double r = simplex->circumradius();
    if (r > options_.r_max) return false;

    const int min_inside = std::max(0, k_ - static_cast<int>(size));
    if (size == 1 && min_inside > 0) return true;

    const Vec center = X_.wrap(X_[first_] + simplex->circumcenter());
    if (options_.window && !options_.window->contains(center, X_.dim())) return true;

    inside_.clear();
    bool too_many = false;
    auto visit = [&](Label l, double d) {
      if (std::find(U.begin(), U.end(), l) != U.end()) return true;
      if (on_sphere(d, r)) {
        throw Error(ErrorKind::DegenerateTuple,
                    "point " + std::to_string(l) + " is cospherical with tuple " + tuple_name(U));
      }
      if (d < r) {
        inside_.push_back(l);
        if (inside_.size() > static_cast<std::size_t>(k_ - 1)) {
          too_many = true;
          return false;
        }
      }
      return true;
    };
    if (grid_) {
      grid_->for_each_in_ball(center, r, visit);
    } else {
      for (Label l = 0; l < X_.size(); ++l) {
        if (!visit(l, X_.distance(center, X_[l]))) break;
      }
    }
    if (too_many) return true;
    const int m = static_cast<int>(inside_.size());
    if (m < min_inside) return true;

    const auto lambda = simplex->barycentric(simplex->circumcenter());
    RelaxedInterval iv;
    iv.U.assign(U.begin(), U.end());
    iv.sphere = Sphere{center, r};
    iv.I = inside_;
    std::sort(iv.I.begin(), iv.I.end());
    iv.m = m;
    const int u = static_cast<int>(size) - 1;
    if (m + u + 1 == k_) {
      for (std::size_t i = 0; i < size; ++i) {
        if (!(lambda[i] > kBarycentricEps)) return true;
      }
      iv.vertex = true;
      iv.critical = true;
      iv.g = u + 1;
      iv.V = iv.U;
      iv.v = u;
    } else {
      VisibilityReport vis;
      try {
        vis = visibility_from_barycentric(std::span<const double>(lambda.data(), size), U);
      } catch (const Error& e) {
        throw Error(e.kind(), std::string("while enumerating: ") + e.what());
      }
      iv.g = k_ - m;
      iv.V = std::move(vis.V);
      iv.v = vis.v;
      iv.critical = vis.visible_facets.empty();
    }
    out_->push_back(std::move(iv));
    return true;
  }

  const PointSet& X_;
  int k_;
  const EnumerationOptions& options_;
  const SpatialGrid* grid_;
  std::size_t max_size_;
  Label first_ = 0;
  std::vector<Candidate> candidates_;
  std::array<Label, 4> labels_{};
  std::array<Vec, 4> local_{};
  std::vector<Label> inside_;
  std::vector<RelaxedInterval>* out_ = nullptr;
};

double mean_spacing(const PointSet& X) {
  if (X.empty()) return 1.0;
  double volume = 1.0;
  if (X.periodic()) {
    volume = std::pow(X.side(), X.dim());
  } else {
    Vec lo = X[0], hi = X[0];
    for (const auto& p : X.points()) {
      for (int a = 0; a < X.dim(); ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
    }
    for (int a = 0; a < X.dim(); ++a) volume *= std::max(hi[a] - lo[a], 1e-12);
  }
  return std::pow(volume / static_cast<double>(X.size()), 1.0 / X.dim());
}

unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(chunk) for chunk in [0, chunks) on up to `threads` workers and
// rethrows the first failure in chunk order.
void parallel_chunks(std::size_t chunks, unsigned threads, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      try {
        body(c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  const unsigned n = std::min<std::size_t>(threads, std::max<std::size_t>(chunks, 1));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void require_geometric_dim(const PointSet& X) {
  if (X.dim() != 2 && X.dim() != 3) {
    throw Error(ErrorKind::UnsupportedDimension, "geometric operations support n = 2 or 3");
  }
}

}  // namespace

std::vector<RelaxedInterval> enumerate_intervals(const PointSet& X, int k,
                                                 const EnumerationOptions& options) {
  require_geometric_dim(X);
  if (k < 1) throw Error(ErrorKind::DomainError, "order k must be positive");
  if (!(options.r_max >= 0.0)) throw Error(ErrorKind::DomainError, "r_max must be nonnegative");
  if (X.periodic() && !(options.r_max < X.side() / 4.0)) {
    throw Error(ErrorKind::PeriodicCutoffExceeded, "r_max must stay below L/4 on a torus");
  }
  const bool bounded = std::isfinite(options.r_max);
  std::optional<SpatialGrid> grid;
  if (bounded) grid.emplace(X, std::max(options.r_max, mean_spacing(X)));

  const std::size_t n = X.size();
  const std::size_t chunk_size = 64;
  const std::size_t chunks = (n + chunk_size - 1) / chunk_size;
  std::vector<std::vector<RelaxedInterval>> results(chunks);

  parallel_chunks(chunks, resolve_threads(options.threads), [&](std::size_t chunk) {
    TupleScanner scanner(X, k, options, grid ? &*grid : nullptr);
    std::vector<Candidate> candidates;
    const std::size_t end = std::min(n, (chunk + 1) * chunk_size);
    for (std::size_t i = chunk * chunk_size; i < end; ++i) {
      const Label first = static_cast<Label>(i);
      candidates.clear();
      if (bounded) {
        grid->for_each_in_ball(X[first], 2.0 * options.r_max, [&](Label l, double) {
          if (l > first) candidates.push_back({l, X.displacement(X[first], X[l])});
          return true;
        });
        std::sort(candidates.begin(), candidates.end(),
                  [](const Candidate& a, const Candidate& b) { return a.label < b.label; });
      } else {
        for (Label l = first + 1; l < n; ++l) candidates.push_back({l, X[l] - X[first]});
      }
      scanner.scan(first, candidates, results[chunk]);
    }
  });

  std::vector<RelaxedInterval> all;
  for (auto& r : results) {
    all.insert(all.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  }
  return all;
}

std::vector<Cell> expand_interval(const PointSet& X, const RelaxedInterval& iv, int k, std::size_t owner) {
  const int s = static_cast<int>(iv.U.size());
  const int u = s - 1;
  const int g = iv.g;

  // Local coordinates of the tuple and the inside points around the center.
  auto unwrap = [&](Label l) { return iv.sphere.center + X.displacement(iv.sphere.center, X[l]); };
  Vec inside_sum{};
  for (Label l : iv.I) inside_sum = inside_sum + unwrap(l);
  std::array<Vec, 4> on_pos{};
  for (int i = 0; i < s; ++i) on_pos[i] = unwrap(iv.U[i]);

  unsigned v_mask = 0;
  for (int i = 0; i < s; ++i) {
    if (std::find(iv.V.begin(), iv.V.end(), iv.U[i]) != iv.V.end()) v_mask |= 1u << i;
  }

  auto average = [&](unsigned members) {
    Vec sum = inside_sum;
    for (int i = 0; i < s; ++i) {
      if (members & (1u << i)) sum = sum + on_pos[i];
    }
    return X.wrap((1.0 / k) * sum);
  };
  auto labels_of = [&](unsigned mask, std::vector<Label> base) {
    for (int i = 0; i < s; ++i) {
      if (mask & (1u << i)) base.push_back(iv.U[i]);
    }
    std::sort(base.begin(), base.end());
    return base;
  };

  std::vector<Cell> cells;
  std::array<std::uint64_t, 4> per_dim{};

  // Non-vertex cells: colorings of U into in / on / out.
  int colorings = 1;
  for (int i = 0; i < s; ++i) colorings *= 3;
  for (int code = 0; code < colorings; ++code) {
    unsigned in_mask = 0, on_mask = 0;
    for (int i = 0, c = code; i < s; ++i, c /= 3) {
      if (c % 3 == 1) in_mask |= 1u << i;
      if (c % 3 == 2) on_mask |= 1u << i;
    }
    const int j = std::popcount(on_mask) - 1;
    if (j < 1) continue;
    if (in_mask & ~v_mask) continue;
    if (v_mask & ~(in_mask | on_mask)) continue;
    const int t = std::popcount(in_mask);
    if (t < g - j || t > g - 1) continue;

    Cell cell;
    cell.key = CellKey{labels_of(in_mask, iv.I), labels_of(on_mask, {})};
    cell.dim = j;
    cell.generation = g - t;
    cell.radius = iv.sphere.radius;
    cell.owner = owner;
    for (unsigned w = on_mask;; w = (w - 1) & on_mask) {
      if (std::popcount(w) == cell.generation) cell.vertex_coords.push_back(average(in_mask | w));
      if (w == 0) break;
    }
    ++per_dim[j];
    cells.push_back(std::move(cell));
  }

  if (g == iv.v + 1) {
    Cell vertex;
    vertex.key = CellKey{labels_of(v_mask, iv.I), {}};
    vertex.dim = 0;
    vertex.generation = g;
    vertex.radius = iv.sphere.radius;
    vertex.owner = owner;
    vertex.vertex_coords.push_back(average(v_mask));
    ++per_dim[0];
    cells.push_back(std::move(vertex));
  }

  for (int j = 0; j <= u; ++j) {
    if (per_dim[j] != n_faces(iv.v, g, u, j)) {
      throw std::logic_error("interval " + tuple_name(iv.U) + " of type " + iv.type().str() +
                             " expanded to a wrong number of " + std::to_string(j) + "-cells");
    }
  }
  (void)k;
  return cells;
}

Mosaic build_mosaic(const PointSet& X, int k, const EnumerationOptions& options) {
  auto intervals = enumerate_intervals(X, k, options);
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    auto expanded = expand_interval(X, intervals[i], k, i);
    cells.insert(cells.end(), std::make_move_iterator(expanded.begin()),
                 std::make_move_iterator(expanded.end()));
  }
  return Mosaic(k, X.dim(), std::move(intervals), std::move(cells));
}

PointClass classify_point(const PointSet& X, const Vec& p, int k) {
  auto [sphere, cls] = delaunay_sphere(X, p, k);
  PointClass out;
  const std::size_t total = cls.inn() + cls.onn();
  if (total == static_cast<std::size_t>(k)) {
    out.voronoi_dim = X.dim();
    std::vector<Label> q = cls.inn_set;
    q.insert(q.end(), cls.onn_set.begin(), cls.onn_set.end());
    std::sort(q.begin(), q.end());
    out.signature = CellKey{std::move(q), {}};
  } else {
    out.voronoi_dim = X.dim() + 1 - static_cast<int>(cls.onn());
    out.signature = CellKey{cls.inn_set, cls.onn_set};
  }
  out.classification = std::move(cls);
  return out;
}

std::vector<CellKey> face_keys(const CellKey& cell, int k) {
  std::vector<CellKey> faces;
  if (cell.is_vertex()) return faces;
  const int s = static_cast<int>(cell.on.size());
  const int inside = static_cast<int>(cell.inside.size());
  const int g = k - inside;

  auto labels_of = [&](unsigned mask, std::vector<Label> base) {
    for (int i = 0; i < s; ++i) {
      if (mask & (1u << i)) base.push_back(cell.on[i]);
    }
    std::sort(base.begin(), base.end());
    return base;
  };

  int colorings = 1;
  for (int i = 0; i < s; ++i) colorings *= 3;
  for (int code = 0; code < colorings; ++code) {
    unsigned in_mask = 0, on_mask = 0;
    for (int i = 0, c = code; i < s; ++i, c /= 3) {
      if (c % 3 == 1) in_mask |= 1u << i;
      if (c % 3 == 2) on_mask |= 1u << i;
    }
    const int jf = std::popcount(on_mask) - 1;
    if (jf < 1 || jf >= s - 1) continue;
    const int total_inside = inside + std::popcount(in_mask);
    if (total_inside < k - jf || total_inside > k - 1) continue;
    faces.push_back(CellKey{labels_of(in_mask, cell.inside), labels_of(on_mask, {})});
  }
  const unsigned all = (1u << s) - 1;
  for (unsigned w = all;; w = (w - 1) & all) {
    if (std::popcount(w) == g) faces.push_back(CellKey{labels_of(w, cell.inside), {}});
    if (w == 0) break;
  }
  return faces;
}

StructuralReport check_structure(const Mosaic& mosaic) {
  StructuralReport report;
  for (const auto& cell : mosaic.cells()) {
    report.euler_sum += (cell.dim % 2 == 0) ? 1 : -1;
    for (const auto& face : face_keys(cell.key, mosaic.k())) {
      ++report.checked_pairs;
      const Cell* f = mosaic.find(face);
      if (!f) {
        ++report.closure_violations;
      } else if (f->radius > cell.radius) {
        ++report.monotonicity_violations;
      }
    }
  }
  return report;
}

double certified_radius_bound(const PointSet& X, int k, double spacing) {
  require_geometric_dim(X);
  if (!X.periodic()) {
    throw Error(ErrorKind::DomainError, "a certified radius bound needs a periodic box");
  }
  if (X.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::InsufficientPoints, "fewer points than the order");
  }
  const double L = X.side();
  const int per_axis = std::max(1, static_cast<int>(std::ceil(L / spacing)));
  const double h = L / per_axis;
  const SpatialGrid grid(X, mean_spacing(X));
  double worst = 0.0;
  const int nz = X.dim() == 3 ? per_axis : 1;
  for (int ix = 0; ix < per_axis; ++ix) {
    for (int iy = 0; iy < per_axis; ++iy) {
      for (int iz = 0; iz < nz; ++iz) {
        Vec probe{(ix + 0.5) * h, (iy + 0.5) * h, X.dim() == 3 ? (iz + 0.5) * h : 0.0};
        worst = std::max(worst, grid.kth_distance(probe, k));
      }
    }
  }
  return worst + 0.5 * h * std::sqrt(static_cast<double>(X.dim()));
}

double complete_torus_r_max(const PointSet& X, int k) {
  const double spacing = 0.25 * mean_spacing(X);
  const double r_max = 1.05 * certified_radius_bound(X, k, spacing);
  if (!(r_max < X.side() / 4.0)) {
    throw Error(ErrorKind::PeriodicCutoffExceeded,
                "certified radius bound " + std::to_string(r_max) + " reaches L/4; enlarge the box");
  }
  return r_max;
}

std::vector<VoronoiEdge> voronoi_edges(const PointSet& X, const Mosaic& mosaic) {
  if (X.dim() != 2) throw Error(ErrorKind::UnsupportedDimension, "Voronoi edges are planar only");
  const int k = mosaic.k();
  std::unordered_map<CellKey, VoronoiEdge, CellKeyHash> edges;
  for (const auto& cell : mosaic.cells()) {
    if (cell.dim != 2) continue;
    const Vec p = mosaic.intervals()[cell.owner].sphere.center;
    const auto& U = cell.U();
    const int m = static_cast<int>(cell.I().size());
    std::array<Vec, 3> rel{};
    for (int i = 0; i < 3; ++i) rel[i] = X.displacement(p, X[U[i]]);
    for (int z = 0; z < 3; ++z) {
      const int a = (z + 1) % 3;
      const int b = (z + 2) % 3;
      const Vec ab = rel[b] - rel[a];
      Vec dir{-ab[1], ab[0], 0.0};
      dir = (1.0 / norm(dir)) * dir;
      CellKey key;
      key.on = {std::min(U[a], U[b]), std::max(U[a], U[b])};
      key.inside = cell.I();
      const double side = dot(dir, rel[a] - rel[z]);
      if (m == k - 1) {
        // The third point leaves the sphere along the edge.
        if (side < 0.0) dir = -1.0 * dir;
      } else {
        key.inside.push_back(U[z]);
        std::sort(key.inside.begin(), key.inside.end());
        if (side > 0.0) dir = -1.0 * dir;
      }
      auto& edge = edges[key];
      edge.key = key;
      edge.endpoints.push_back(p);
      edge.directions.push_back(dir);
    }
  }
  std::vector<VoronoiEdge> out;
  out.reserve(edges.size());
  for (auto& [key, edge] : edges) {
    if (edge.endpoints.size() > 2) {
      throw std::logic_error("Voronoi edge with more than two endpoints");
    }
    out.push_back(std::move(edge));
  }
  std::sort(out.begin(), out.end(), [](const VoronoiEdge& a, const VoronoiEdge& b) { return a.key < b.key; });
  return out;
}

namespace {

// Length of the part of the parametric segment a + t d, t in [0, t_end], inside the box.
double clipped_length(const Vec& a, const Vec& d, double t_end, const Box& box) {
  double t0 = 0.0;
  double t1 = t_end;
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (a[axis] < box.lo[axis] || a[axis] > box.hi[axis]) return 0.0;
      continue;
    }
    double ta = (box.lo[axis] - a[axis]) / d[axis];
    double tb = (box.hi[axis] - a[axis]) / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 >= t1) return 0.0;
  }
  return (t1 - t0) * norm(d);
}

}  // namespace

double skeleton_measure(const PointSet& X, const Mosaic& mosaic, int ell, const std::optional<Box>& window) {
  if (X.dim() != 2) throw Error(ErrorKind::UnsupportedDimension, "skeleton measure is planar only");
  if (ell < 0 || ell > 2) throw Error(ErrorKind::DomainError, "skeleton dimension must be 0, 1 or 2");
  if (ell == 2) {
    if (window) return window->volume(2);
    if (X.periodic()) return X.side() * X.side();
    throw Error(ErrorKind::DomainError, "the plane has infinite area; give a window");
  }
  if (ell == 0) {
    std::size_t count = 0;
    for (const auto& cell : mosaic.cells()) {
      if (cell.dim != 2) continue;
      const Vec& c = mosaic.intervals()[cell.owner].sphere.center;
      if (!window || window->contains(c, 2)) ++count;
    }
    return static_cast<double>(count);
  }

  double total = 0.0;
  const double L = X.side();
  for (const auto& edge : voronoi_edges(X, mosaic)) {
    const Vec& a = edge.endpoints[0];
    Vec d;
    double t_end = 1.0;
    if (edge.endpoints.size() == 2) {
      d = X.displacement(a, edge.endpoints[1]);
    } else {
      if (X.periodic()) throw std::logic_error("open Voronoi edge on a torus");
      if (!window) throw Error(ErrorKind::DomainError, "unbounded Voronoi edge; give a window");
      d = edge.directions[0];
      t_end = std::numeric_limits<double>::infinity();
    }
    if (!window) {
      total += norm(d);
    } else if (X.periodic()) {
      for (int sx = -1; sx <= 1; ++sx) {
        for (int sy = -1; sy <= 1; ++sy) {
          const Vec shifted{a[0] + sx * L, a[1] + sy * L, 0.0};
          total += clipped_length(shifted, d, t_end, *window);
        }
      }
    } else {
      total += clipped_length(a, d, t_end, *window);
    }
  }
  return total;
}

double voronoi_skeleton_measure(const PointSet& X, int k, int ell, const std::optional<Box>& window) {
  if (X.dim() != 2) throw Error(ErrorKind::UnsupportedDimension, "skeleton measure is planar only");
  if (ell == 2) return skeleton_measure(X, Mosaic(k, 2, {}, {}), 2, window);
  EnumerationOptions options;
  options.r_max = X.periodic() ? complete_torus_r_max(X, k) : std::numeric_limits<double>::infinity();
  return skeleton_measure(X, build_mosaic(X, k, options), ell, window);
}

}  // namespace orderk
