#include "dqc/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dqc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dqc_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("FNV-1a test vectors") {
  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
  CHECK(hex64(fnv1a64("foobar")) == "85944171f73967e8");
}

TEST_CASE("CSV rows round-trip doubles") {
  const fs::path dir = scratch("csv");
  CsvWriter w(dir / "a.csv", {"step", "value", "tag"});
  w << 3 << 0.1 << std::string("x");
  w.end_row();
  w << 4 << 1.0 / 3.0 << std::string("y");
  w.end_row();
  w.close();
  std::istringstream in(slurp(dir / "a.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,value,tag");
  std::getline(in, line);
  CHECK(line == "3,0.10000000000000001,x");
  std::getline(in, line);
  CHECK(std::stod(line.substr(2, line.rfind(',') - 2)) == 1.0 / 3.0);
}

TEST_CASE("CSV rows must be complete") {
  const fs::path dir = scratch("csv_bad");
  CsvWriter w(dir / "b.csv", {"a", "b"});
  w << 1.0;
  CHECK_THROWS(w.end_row());
}

TEST_CASE("grid files and sidecar") {
  const fs::path dir = scratch("grid");
  const StripGeometry g(2.0, 1.0, 4, 4);
  Vector v(g.nodes());
  for (int m = 0; m < g.nodes(); ++m) v[m] = 0.25 * m - 1.0;
  const auto files = write_grid(dir, "rho_0001", g, v, 0.5, "rho");
  REQUIRE(files.size() == 2);
  CHECK(fs::file_size(dir / "rho_0001.bin") == sizeof(double) * g.nodes());
  const std::vector<double> back = read_raw_float64(dir / "rho_0001.bin");
  REQUIRE(back.size() == static_cast<std::size_t>(g.nodes()));
  for (int m = 0; m < g.nodes(); ++m) CHECK(back[m] == v[m]);
  const auto side = nlohmann::json::parse(slurp(dir / "rho_0001.json"));
  CHECK(side["dims"] == nlohmann::json::array({5, 4}));
  CHECK(side["dx"].get<double>() == 0.5);
  CHECK(side["time"].get<double>() == 0.5);
  CHECK(side["quantity"] == "rho");
}

TEST_CASE("manifest lists and hashes files") {
  const fs::path dir = scratch("manifest");
  write_text(dir / "x.txt", "foobar");
  RunManifest m("forward", "geometry.Nx = 4\n");
  m.add_file(dir / "x.txt");
  m.stage("solve", "ok");
  m.write(dir, 0);
  const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(j["command"] == "forward");
  CHECK(j["exit_code"] == 0);
  CHECK(j["config_hash"] == "fnv1a64:" + hex64(fnv1a64("geometry.Nx = 4\n")));
  CHECK(j["files"][0]["path"] == "x.txt");
  CHECK(j["files"][0]["fnv1a64"] == "85944171f73967e8");
  CHECK(j["files"][0]["bytes"] == 6);
  CHECK(j["stages"][0]["name"] == "solve");
  CHECK(j["version"] == version_string());
}

}
