#pragma once

// Problem specification, the small TOML-style config reader, named presets,
// and the assembly of solver objects from a validated specification.

#include "dqc/optimize.hpp"

#include <array>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace dqc {

/// Syntax error with a 1-based position.
class ConfigParseError : public std::runtime_error {
public:
  ConfigParseError(const std::string& what, int line, int col);
  int line() const { return line_; }
  int col() const { return col_; }

private:
  int line_;
  int col_;
};

/// A specification that violates one or more model assumptions.
class ConfigValidationError : public std::runtime_error {
public:
  explicit ConfigValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

private:
  std::vector<std::string> violations_;
};

using ConfigValue = std::variant<double, bool, std::string, std::vector<double>>;

struct ConfigEntry {
  ConfigValue value;
  int line = 0;
  int col = 0;
};

/// "section.key" -> value. Keys before the first section header have no prefix.
using ConfigTable = std::map<std::string, ConfigEntry>;

ConfigTable parse_config_text(const std::string& text);

struct InitialSpec {
  /// "stripes", "constant" or "file"
  std::string kind = "stripes";
  double value = 0.0;
  double amplitude = 0.5;
  /// Width of the tanh transition relative to the stripe period.
  double width = 0.3;
  int waves = 1;
  /// Raw little-endian float64 node values, Nx*(Ny+1) of them (file kind).
  std::string file;
};

struct TargetSpec {
  /// "constant": every target equals `value`; "translated": the initial
  /// stripes moved in x with constant `speed`.
  std::string kind = "translated";
  double value = 0.0;
  double speed = 1.0;
};

struct ControlSpec {
  std::string mode = "shear";
  double u_bar = 2.0;
  double r0 = 50.0;
  /// Fixed shear used by forward/adjoint runs and as the probe control:
  /// "zero", "uniform" (f = amplitude) or "couette" (f = amplitude (2y/Ly - 1)).
  std::string initial = "couette";
  double amplitude = 0.5;
};

struct SolverSpec {
  double newton_tol = 1e-11;
  int newton_max_iter = 50;
  int pdas_max_sweeps = 50;
  int opt_max_iter = 100;
  double opt_tol = 1e-7;
  bool anchored = true;
  int gradcheck_directions = 5;
};

struct ProblemSpec {
  double Lx = 4.0 * 3.14159265358979323846;
  double Ly = 2.0 * 3.14159265358979323846;
  int Nx = 32;
  int Ny = 16;
  double T = 2.0;
  int steps = 50;
  double tau = 1.0;
  double tau_gamma = 1.0;
  InitialSpec initial;
  std::vector<double> pi_coeffs{0.0, -1.0};
  std::vector<double> pi_gamma_coeffs{0.0, -1.0};
  QuenchSchedule schedule;
  /// Single-alpha runs; defaults to the first schedule level.
  double alpha = 0.1;
  std::array<double, 5> beta{1.0, 0.0, 1.0, 0.0, 1.0};
  TargetSpec target;
  ControlSpec control;
  SolverSpec solver;
  std::string output_dir = "out";

  /// Every violated assumption, prefixed with its tag (A1..A6) or "config".
  std::vector<std::string> violations() const;
  void validate() const;
  /// Canonical "section.key = value" listing; used for hashing.
  std::string canonical() const;
};

ProblemSpec spec_from_table(const ConfigTable& table);
/// Reads, parses and validates a config file.
ProblemSpec parse_config(const std::string& path);

/// Named presets: "reference", "gradcheck", "zero", "contact".
ProblemSpec preset(const std::string& name);
std::vector<std::string> preset_names();

/// Solver objects built from a validated spec. Not copyable: the model keeps
/// a pointer to the operators.
class Setup {
public:
  explicit Setup(const ProblemSpec& spec);
  Setup(const Setup&) = delete;
  Setup& operator=(const Setup&) = delete;

  const ProblemSpec& spec() const { return spec_; }
  const StripGeometry& geom() const { return ops_.geom; }
  const GridOperators& ops() const { return ops_; }
  const StateModel& model() const { return model_; }
  const PhysParams& phys() const { return phys_; }
  const CostSpec& cost() const { return cost_; }
  /// The configured fixed control (also the probe of the quench sweep).
  const Control& fixed_control() const { return fixed_; }
  Control zero_control() const { return Control::zero_like(fixed_); }

  ReducedProblem reduced(const ForwardMode& mode) const;
  ForwardMode quench_mode(double alpha) const { return ForwardMode::quenched(QuenchParams(alpha, spec_.schedule.p_exponent)); }
  OptimizeOptions optimize_options() const;

private:
  ProblemSpec spec_;
  GridOperators ops_;
  StateModel model_;
  PhysParams phys_;
  CostSpec cost_;
  Control fixed_;
};

/// Stripe profile of the initial data at abscissa x.
double stripe_profile(const ProblemSpec& spec, double x);

}  // namespace dqc
