#include "dqc/config.hpp"

#include <doctest.h>

#include <filesystem>

using namespace dqc;

namespace {

bool mentions(const ConfigValidationError& e, const std::string& tag) {
  for (const auto& v : e.violations())
    if (v.rfind(tag, 0) == 0) return true;
  return false;
}

ConfigValidationError validation_error(const std::string& text) {
  try {
    spec_from_table(parse_config_text(text)).validate();
  } catch (const ConfigValidationError& e) {
    return e;
  }
  FAIL("expected a validation error");
  return ConfigValidationError({});
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("minimal config gets the defaults") {
  const ProblemSpec s = spec_from_table(parse_config_text("# nothing\n"));
  const ProblemSpec d;
  CHECK(s.canonical() == d.canonical());
  CHECK(s.Nx == 32);
  CHECK(s.solver.newton_tol == 1e-11);
  CHECK(s.schedule.levels == 14);
  CHECK(s.violations().empty());
}

TEST_CASE("values of every kind") {
  const ConfigTable t = parse_config_text(
      "top = 1\n[geometry]\nNx = 24   # trailing comment\nLy = 3.5e0\n[solver]\nanchored = false\n"
      "[control]\nmode = \"shear\"\n[potential]\npi_coeffs = [0.0, -2, 0.5]\n");
  CHECK(std::get<double>(t.at("top").value) == 1.0);
  CHECK(std::get<double>(t.at("geometry.Nx").value) == 24.0);
  CHECK(std::get<double>(t.at("geometry.Ly").value) == 3.5);
  CHECK(std::get<bool>(t.at("solver.anchored").value) == false);
  CHECK(std::get<std::string>(t.at("control.mode").value) == "shear");
  CHECK(std::get<std::vector<double>>(t.at("potential.pi_coeffs").value) == std::vector<double>{0.0, -2.0, 0.5});
  CHECK(t.at("geometry.Ly").line == 4);
}

TEST_CASE("parse errors carry a position") {
  try {
    parse_config_text("[geometry]\nNx = 16\nNy = = 3\n");
    FAIL("expected a parse error");
  } catch (const ConfigParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.col() > 1);
  }
  CHECK_THROWS_AS(parse_config_text("[geometry\n"), ConfigParseError);
  CHECK_THROWS_AS(parse_config_text("[a]\nx = 1\nx = 2\n"), ConfigParseError);
  CHECK_THROWS_AS(parse_config_text("x = \"open\n"), ConfigParseError);
  CHECK_THROWS_AS(spec_from_table(parse_config_text("[geometry]\nNz = 3\n")), ConfigParseError);
  CHECK_THROWS_AS(spec_from_table(parse_config_text("[geometry]\nNx = 3.5\n")), ConfigParseError);
  CHECK_THROWS_AS(spec_from_table(parse_config_text("[cost]\nbeta = [1, 2]\n")), ConfigParseError);
}

TEST_CASE("tau = 0 names the positivity assumption") {
  const ConfigValidationError e = validation_error("[physics]\ntau = 0\n");
  CHECK(mentions(e, "A2"));
  CHECK(std::string(e.what()).find("tau_Omega>0 and tau_Gamma>0") != std::string::npos);
}

TEST_CASE("all beta zero names the cost assumption") {
  const ConfigValidationError e = validation_error("[cost]\nbeta = [0, 0, 0, 0, 0]\n");
  CHECK(mentions(e, "A4"));
  CHECK(std::string(e.what()).find("nonnegative but not all") != std::string::npos);
}

TEST_CASE("every violation is listed") {
  const ConfigValidationError e =
      validation_error("[physics]\ntau = 1\ntau_gamma = 2\n[initial]\nkind = \"constant\"\nvalue = 1.2\n"
                       "[cost]\nbeta = [0, 0, 0, 0, 0]\n[geometry]\nNx = 2\n");
  CHECK(mentions(e, "A1"));
  CHECK(mentions(e, "A4"));
  CHECK(mentions(e, "A6"));
  CHECK(mentions(e, "config"));
}

TEST_CASE("inadmissible fixed control") {
  ProblemSpec s = preset("gradcheck");
  s.control.amplitude = 3.0;
  CHECK_FALSE(s.violations().empty());
}

TEST_CASE("shipped config files equal the presets") {
  const std::filesystem::path dir = DQC_SOURCE_DIR "/configs";
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const ProblemSpec file = parse_config((dir / (name + ".toml")).string());
    CHECK(file.canonical() == preset(name).canonical());
  }
  CHECK_THROWS(preset("nope"));
}

TEST_CASE("missing config file") { CHECK_THROWS_AS(parse_config("/nonexistent/x.toml"), ConfigParseError); }

TEST_CASE("stripes") {
  const ProblemSpec s = preset("reference");
  CHECK(stripe_profile(s, 0.0) == doctest::Approx(s.initial.amplitude));
  CHECK(stripe_profile(s, s.Lx / 2) == doctest::Approx(-s.initial.amplitude));
  CHECK(std::abs(stripe_profile(s, s.Lx / 4)) < 1e-12);
}

}
