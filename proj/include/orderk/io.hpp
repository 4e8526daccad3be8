#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"
#include "orderk/closed_form.hpp"
#include "orderk/mosaic.hpp"
#include "orderk/point_set.hpp"

namespace orderk {

// Library version plus the git description captured at configure time.
std::string version_string();

// Points as CSV: one point per line, "x,y" or "x,y,z". Blank lines and lines
// starting with '#' are skipped, as is a non-numeric first line (header).
PointSet read_points_csv(std::istream& in, std::optional<double> periodic_side = std::nullopt);
PointSet read_points_csv_file(const std::string& path,
                              std::optional<double> periodic_side = std::nullopt);

nlohmann::json mosaic_to_json(const Mosaic& mosaic);

nlohmann::json ctable_to_json(const CTable& table);
CTable ctable_from_json(const nlohmann::json& j);
CTable read_ctable_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace orderk
