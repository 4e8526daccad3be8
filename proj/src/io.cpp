#include "orderk/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace orderk {

#ifndef ORDERK_VERSION
#define ORDERK_VERSION "0.0.0"
#endif
#ifndef ORDERK_GIT_DESCRIBE
#define ORDERK_GIT_DESCRIBE "unknown"
#endif

std::string version_string() { return std::string("orderk ") + ORDERK_VERSION + " (" + ORDERK_GIT_DESCRIBE + ")"; }

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_row(const std::string& line, std::vector<double>& values) {
  values.clear();
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    field = trim(field);
    double x = 0.0;
    const auto* begin = field.data();
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, x);
    if (field.empty() || ec != std::errc() || ptr != end) return false;
    values.push_back(x);
  }
  return true;
}

nlohmann::json vec_json(const Vec& p, int dim) {
  auto arr = nlohmann::json::array();
  for (int a = 0; a < dim; ++a) arr.push_back(p[a]);
  return arr;
}

}  // namespace

PointSet read_points_csv(std::istream& in, std::optional<double> periodic_side) {
  std::vector<Vec> points;
  int dim = 0;
  std::string line;
  std::vector<double> values;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!parse_row(line, values)) {
      if (!seen_data && points.empty()) {
        seen_data = true;  // header
        continue;
      }
      throw Error(ErrorKind::InvalidInput, "line " + std::to_string(line_no) + " is not numeric");
    }
    seen_data = true;
    const int d = static_cast<int>(values.size());
    if (d != 2 && d != 3) {
      throw Error(ErrorKind::InvalidInput, "line " + std::to_string(line_no) + " needs 2 or 3 values");
    }
    if (dim == 0) dim = d;
    if (d != dim) throw Error(ErrorKind::InvalidInput, "mixed point dimensions in CSV input");
    Vec p{};
    for (int a = 0; a < d; ++a) p[a] = values[a];
    points.push_back(p);
  }
  if (points.empty()) throw Error(ErrorKind::InvalidInput, "no points in CSV input");
  return PointSet(dim, std::move(points), periodic_side);
}

PointSet read_points_csv_file(const std::string& path, std::optional<double> periodic_side) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path);
  return read_points_csv(in, periodic_side);
}

nlohmann::json mosaic_to_json(const Mosaic& mosaic) {
  nlohmann::json out;
  out["k"] = mosaic.k();
  auto intervals = nlohmann::json::array();
  for (const auto& iv : mosaic.intervals()) {
    const auto t = iv.type();
    intervals.push_back({{"U", iv.U},
                         {"center", vec_json(iv.sphere.center, mosaic.dim())},
                         {"radius", iv.sphere.radius},
                         {"m", iv.m},
                         {"type", {t.v, t.u, t.g}},
                         {"critical", iv.critical}});
  }
  out["intervals"] = std::move(intervals);
  auto cells = nlohmann::json::array();
  for (const auto& c : mosaic.cells()) {
    auto verts = nlohmann::json::array();
    for (const auto& p : c.vertex_coords) verts.push_back(vec_json(p, mosaic.dim()));
    cells.push_back({{"I", c.I()},
                     {"U", c.U()},
                     {"dim", c.dim},
                     {"generation", c.generation},
                     {"radius", c.radius},
                     {"verts", std::move(verts)}});
  }
  out["cells"] = std::move(cells);
  return out;
}

nlohmann::json ctable_to_json(const CTable& table) {
  nlohmann::json out;
  out["n"] = table.n();
  auto entries = nlohmann::json::array();
  for (const auto& [key, e] : table.entries()) {
    std::string provenance = "user";
    if (e.provenance.kind == Provenance::Kind::Estimated) provenance = "estimated:" + e.provenance.run_id;
    entries.push_back({{"v", key.first},
                       {"u", key.second},
                       {"C", e.value},
                       {"stderr", e.stderr_},
                       {"provenance", provenance}});
  }
  out["entries"] = std::move(entries);
  return out;
}

CTable ctable_from_json(const nlohmann::json& j) {
  try {
    CTable table(j.at("n").get<int>());
    for (const auto& e : j.at("entries")) {
      CTableEntry entry;
      entry.value = e.at("C").get<double>();
      entry.stderr_ = e.value("stderr", 0.0);
      const std::string prov = e.value("provenance", std::string("user"));
      if (prov.rfind("estimated", 0) == 0) {
        entry.provenance.kind = Provenance::Kind::Estimated;
        const auto colon = prov.find(':');
        if (colon != std::string::npos) entry.provenance.run_id = prov.substr(colon + 1);
      }
      table.set(e.at("v").get<int>(), e.at("u").get<int>(), std::move(entry));
    }
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("malformed C-table: ") + e.what());
  }
}

CTable read_ctable_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path);
  try {
    return ctable_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::InvalidInput, std::string("C-table is not JSON: ") + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
  out << contents;
}

}  // namespace orderk
