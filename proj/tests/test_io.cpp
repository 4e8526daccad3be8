#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "orderk/io.hpp"

using namespace orderk;

TEST_CASE("CSV points") {
  std::istringstream in("# comment\nx,y\n0,0\n\n1, 0\n0.5,0.8660254037844386\n");
  const auto X = read_points_csv(in);
  CHECK(X.dim() == 2);
  CHECK(X.size() == 3);
  CHECK(X[1][0] == 1.0);

  std::istringstream in3("1,2,3\n4,5,6\n");
  CHECK(read_points_csv(in3).dim() == 3);

  std::istringstream bad("0,0\nfoo,1\n");
  CHECK_THROWS_AS(read_points_csv(bad), Error);
  std::istringstream mixed("0,0\n1,2,3\n");
  CHECK_THROWS_AS(read_points_csv(mixed), Error);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(read_points_csv(empty), Error);
  std::istringstream one("5\n");
  CHECK_THROWS_AS(read_points_csv(one), Error);

  std::istringstream torus("0.5,0.5\n3.5,1\n");
  CHECK(read_points_csv(torus, 4.0).periodic());
  CHECK_THROWS_AS(read_points_csv_file("/nonexistent/points.csv"), Error);
}

TEST_CASE("mosaic JSON") {
  std::istringstream in("0,0\n1,0\n0.5,0.8660254037844386\n");
  const auto X = read_points_csv(in);
  const auto j = mosaic_to_json(build_mosaic(X, 2, {}));
  CHECK(j["k"] == 2);
  CHECK(j["intervals"].size() == 4);
  CHECK(j["cells"].size() == 7);
  const auto& iv = j["intervals"][0];
  for (const char* key : {"U", "center", "radius", "m", "type", "critical"}) CHECK(iv.contains(key));
  CHECK(iv["center"].size() == 2);
  const auto& cell = j["cells"][0];
  for (const char* key : {"I", "U", "dim", "generation", "radius", "verts"}) CHECK(cell.contains(key));
}

TEST_CASE("C-table round trip") {
  CTable t(2);
  t.set(1, 1, {2.01, 0.01, {Provenance::Kind::Estimated, "seed=1"}});
  t.set(1, 2, {0.99, 0.02, {}});
  const auto j = ctable_to_json(t);
  const auto back = ctable_from_json(j);
  CHECK(back.n() == 2);
  CHECK(back.at(1, 1) == 2.01);
  CHECK(back.entry(1, 1).stderr_ == 0.01);
  CHECK(back.entry(1, 1).provenance.kind == Provenance::Kind::Estimated);
  CHECK(back.entry(1, 1).provenance.run_id == "seed=1");
  CHECK(back.entry(1, 2).provenance.kind == Provenance::Kind::UserSupplied);
  CHECK_FALSE(back.contains(2, 2));

  CHECK_THROWS_AS(ctable_from_json(nlohmann::json::parse(R"({"entries": []})")), Error);
  CHECK_THROWS_AS(ctable_from_json(nlohmann::json::parse(R"({"n": 2, "entries": [{"v": 1, "u": 1, "C": -1}]})")), Error);

  const std::string path = "ctable_roundtrip.json";
  write_text_file(path, j.dump());
  CHECK(read_ctable_file(path).at(1, 2) == 0.99);
  std::remove(path.c_str());
}

TEST_CASE("version string") { CHECK(version_string().rfind("orderk ", 0) == 0); }
