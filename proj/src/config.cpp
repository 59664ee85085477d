#include "dqc/config.hpp"

#include "dqc/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

namespace dqc {

namespace {

std::string with_position(const std::string& what, int line, int col) {
  std::ostringstream m;
  m << "line " << line << ", col " << col << ": " << what;
  return m.str();
}

std::string join_violations(const std::vector<std::string>& v) {
  std::string s = "configuration violates " + std::to_string(v.size()) + " requirement(s):";
  for (const auto& x : v) s += "\n  " + x;
  return s;
}

}  // namespace

ConfigParseError::ConfigParseError(const std::string& what, int line, int col)
    : std::runtime_error(with_position(what, line, col)), line_(line), col_(col) {}

ConfigValidationError::ConfigValidationError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

// ---------------------------------------------------------------------------
// Reader

namespace {

bool is_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

class LineReader {
public:
  LineReader(const std::string& s, int line) : s_(s), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  int col() const { return static_cast<int>(pos_) + 1; }
  [[noreturn]] void fail(const std::string& what) const { throw ConfigParseError(what, line_, col()); }

  std::string key() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && is_key_char(s_[pos_])) ++pos_;
    if (pos_ == start) fail("expected a key");
    return s_.substr(start, pos_ - start);
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  double number() {
    skip_ws();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    if (pos_ < s_.size() && (is_key_char(s_[pos_]) || s_[pos_] == '.')) fail("malformed number");
    return v;
  }

  ConfigValue value() {
    skip_ws();
    const char c = peek();
    if (c == '"') {
      ++pos_;
      std::string out;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
        out += s_[pos_++];
      }
      if (pos_ >= s_.size()) fail("unterminated string");
      ++pos_;
      return out;
    }
    if (c == '[') {
      ++pos_;
      std::vector<double> arr;
      skip_ws();
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      for (;;) {
        arr.push_back(number());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          skip_ws();
          if (peek() == ']') {
            ++pos_;
            return arr;
          }
          continue;
        }
        if (peek() == ']') {
          ++pos_;
          return arr;
        }
        fail("expected ',' or ']' in array");
      }
    }
    if (s_.compare(pos_, 4, "true") == 0 && (pos_ + 4 >= s_.size() || !is_key_char(s_[pos_ + 4]))) {
      pos_ += 4;
      return true;
    }
    if (s_.compare(pos_, 5, "false") == 0 && (pos_ + 5 >= s_.size() || !is_key_char(s_[pos_ + 5]))) {
      pos_ += 5;
      return false;
    }
    return number();
  }

private:
  const std::string& s_;
  int line_;
  std::size_t pos_ = 0;
};

}  // namespace

ConfigTable parse_config_text(const std::string& text) {
  ConfigTable table;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    LineReader r(line, lineno);
    if (r.at_end()) continue;
    if (r.peek() == '[') {
      r.expect('[');
      section = r.key();
      while (r.peek() == '.') {
        r.expect('.');
        section += "." + r.key();
      }
      r.expect(']');
      if (!r.at_end()) r.fail("unexpected text after section header");
      continue;
    }
    const int key_col = [&] {
      r.skip_ws();
      return r.col();
    }();
    const std::string key = r.key();
    r.expect('=');
    r.skip_ws();
    const int value_col = r.col();
    ConfigValue v = r.value();
    if (!r.at_end()) r.fail("unexpected text after value");
    const std::string full = section.empty() ? key : section + "." + key;
    if (table.count(full)) throw ConfigParseError("duplicate key '" + full + "'", lineno, key_col);
    table.emplace(full, ConfigEntry{std::move(v), lineno, value_col});
  }
  return table;
}

// ---------------------------------------------------------------------------
// Spec from table

namespace {

class Binder {
public:
  explicit Binder(const ConfigTable& t) : t_(t) {}

  void number(const std::string& key, double& out) {
    if (const ConfigEntry* e = find(key)) {
      if (const double* d = std::get_if<double>(&e->value))
        out = *d;
      else
        type_error(*e, key, "a number");
    }
  }
  void integer(const std::string& key, int& out) {
    if (const ConfigEntry* e = find(key)) {
      const double* d = std::get_if<double>(&e->value);
      if (d == nullptr || std::floor(*d) != *d || std::abs(*d) > 1e9) type_error(*e, key, "an integer");
      out = static_cast<int>(*d);
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const ConfigEntry* e = find(key)) {
      if (const bool* b = std::get_if<bool>(&e->value))
        out = *b;
      else
        type_error(*e, key, "true or false");
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const ConfigEntry* e = find(key)) {
      if (const std::string* s = std::get_if<std::string>(&e->value))
        out = *s;
      else
        type_error(*e, key, "a string");
    }
  }
  void array(const std::string& key, std::vector<double>& out) {
    if (const ConfigEntry* e = find(key)) {
      if (const auto* a = std::get_if<std::vector<double>>(&e->value))
        out = *a;
      else
        type_error(*e, key, "an array of numbers");
    }
  }
  bool has(const std::string& key) const { return t_.count(key) != 0; }

  void reject_unknown() const {
    for (const auto& [key, e] : t_)
      if (!used_.count(key)) throw ConfigParseError("unknown key '" + key + "'", e.line, 1);
  }

private:
  const ConfigEntry* find(const std::string& key) {
    used_.insert(key);
    auto it = t_.find(key);
    return it == t_.end() ? nullptr : &it->second;
  }
  [[noreturn]] static void type_error(const ConfigEntry& e, const std::string& key, const char* want) {
    throw ConfigParseError("'" + key + "' must be " + want, e.line, e.col);
  }

  const ConfigTable& t_;
  std::set<std::string> used_;
};

}  // namespace

ProblemSpec spec_from_table(const ConfigTable& table) {
  ProblemSpec s;
  Binder b(table);
  b.number("geometry.Lx", s.Lx);
  b.number("geometry.Ly", s.Ly);
  b.integer("geometry.Nx", s.Nx);
  b.integer("geometry.Ny", s.Ny);
  b.number("time.T", s.T);
  b.integer("time.steps", s.steps);
  b.number("physics.tau", s.tau);
  s.tau_gamma = s.tau;
  b.number("physics.tau_gamma", s.tau_gamma);
  b.string("initial.kind", s.initial.kind);
  b.number("initial.value", s.initial.value);
  b.number("initial.amplitude", s.initial.amplitude);
  b.number("initial.width", s.initial.width);
  b.integer("initial.waves", s.initial.waves);
  b.string("initial.file", s.initial.file);
  b.array("potential.pi_coeffs", s.pi_coeffs);
  b.array("potential.pi_gamma_coeffs", s.pi_gamma_coeffs);
  b.number("quench.alpha0", s.schedule.alpha0);
  b.number("quench.ratio", s.schedule.ratio);
  b.integer("quench.levels", s.schedule.levels);
  b.number("quench.p", s.schedule.p_exponent);
  s.alpha = s.schedule.alpha0;
  b.number("quench.alpha", s.alpha);
  std::vector<double> beta(s.beta.begin(), s.beta.end());
  b.array("cost.beta", beta);
  if (b.has("cost.beta") && beta.size() != 5) {
    const ConfigEntry& e = table.at("cost.beta");
    throw ConfigParseError("'cost.beta' needs exactly five entries", e.line, e.col);
  }
  std::copy(beta.begin(), beta.end(), s.beta.begin());
  for (int i = 0; i < 5; ++i) b.number("cost.beta" + std::to_string(i + 1), s.beta[i]);
  b.string("cost.target", s.target.kind);
  b.number("cost.target_value", s.target.value);
  b.number("cost.target_speed", s.target.speed);
  b.string("control.mode", s.control.mode);
  b.number("control.u_bar", s.control.u_bar);
  b.number("control.r0", s.control.r0);
  b.string("control.initial", s.control.initial);
  b.number("control.amplitude", s.control.amplitude);
  b.number("solver.newton_tol", s.solver.newton_tol);
  b.integer("solver.newton_max_iter", s.solver.newton_max_iter);
  b.integer("solver.pdas_max_sweeps", s.solver.pdas_max_sweeps);
  b.integer("solver.opt_max_iter", s.solver.opt_max_iter);
  b.number("solver.opt_tol", s.solver.opt_tol);
  b.boolean("solver.anchored", s.solver.anchored);
  b.integer("solver.gradcheck_directions", s.solver.gradcheck_directions);
  b.string("output.dir", s.output_dir);
  b.reject_unknown();
  return s;
}

ProblemSpec parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigParseError("cannot open config file '" + path + "'", 0, 0);
  std::stringstream buf;
  buf << in.rdbuf();
  ProblemSpec s = spec_from_table(parse_config_text(buf.str()));
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Validation

namespace {


std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

}  // namespace

double stripe_profile(const ProblemSpec& spec, double x) {
  const double k = 2.0 * 3.14159265358979323846 * spec.initial.waves / spec.Lx;
  const double w = spec.initial.width;
  return spec.initial.value + spec.initial.amplitude * std::tanh(std::cos(k * x) / w) / std::tanh(1.0 / w);
}

std::vector<std::string> ProblemSpec::violations() const {
  std::vector<std::string> v;
  auto bad = [&](const std::string& s) { v.push_back(s); };
  if (!(Lx > 0.0) || !(Ly > 0.0)) bad("config: geometry.Lx and geometry.Ly must be positive");
  if (Nx < 4 || Ny < 4) bad("config: geometry.Nx and geometry.Ny must be at least 4");
  if (!(T > 0.0)) bad("config: time.T must be positive (got " + fmt(T) + ")");
  if (steps < 1) bad("config: time.steps must be at least 1");
  if (!(schedule.alpha0 > 0.0 && schedule.alpha0 <= 1.0))
    bad("config: quench.alpha0 must lie in (0, 1] (got " + fmt(schedule.alpha0) + ")");
  if (!(schedule.ratio > 0.0 && schedule.ratio < 1.0))
    bad("config: quench.ratio must lie in (0, 1) so the schedule decreases (got " + fmt(schedule.ratio) + ")");
  if (schedule.levels < 1) bad("config: quench.levels must be at least 1");
  if (!(schedule.p_exponent > 0.0)) bad("config: quench.p must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) bad("config: quench.alpha must lie in (0, 1] (got " + fmt(alpha) + ")");

  // A1: initial data strictly inside (-1, 1)
  if (initial.kind == "constant") {
    if (!(std::abs(initial.value) < 1.0)) bad("A1: initial.value must satisfy -1 < rho0 < 1 (got " + fmt(initial.value) + ")");
  } else if (initial.kind == "stripes") {
    if (!(initial.width > 0.0)) bad("config: initial.width must be positive");
    if (initial.waves < 1) bad("config: initial.waves must be at least 1");
    if (!(std::abs(initial.value) + std::abs(initial.amplitude) < 1.0))
      bad("A1: stripe data |initial.value| + |initial.amplitude| must be < 1 so that -1 < rho0 < 1 (got " +
          fmt(std::abs(initial.value) + std::abs(initial.amplitude)) + ")");
  } else if (initial.kind == "file") {
    try {
      const auto vals = read_raw_float64(initial.file);
      if (static_cast<long>(vals.size()) != static_cast<long>(Nx) * (Ny + 1))
        bad("config: initial.file holds " + std::to_string(vals.size()) + " values, expected Nx*(Ny+1) = " +
            std::to_string(Nx * (Ny + 1)));
      else if (std::any_of(vals.begin(), vals.end(), [](double x) { return !(std::abs(x) < 1.0); }))
        bad("A1: initial.file has values outside -1 < rho0 < 1");
    } catch (const std::exception& e) {
      bad(std::string("config: initial.file: ") + e.what());
    }
  } else {
    bad("config: initial.kind must be \"stripes\", \"constant\" or \"file\" (got \"" + initial.kind + "\")");
  }

  // A2 / A6
  if (!(tau > 0.0) || !(tau_gamma > 0.0))
    bad("A2: tau_Omega>0 and tau_Gamma>0 required (got tau = " + fmt(tau) + ", tau_gamma = " + fmt(tau_gamma) + ")");
  if (tau != tau_gamma)
    bad("A6: tau_Omega = tau_Gamma required (got tau = " + fmt(tau) + ", tau_gamma = " + fmt(tau_gamma) + ")");

  // A3
  auto poly_ok = [](const std::vector<double>& c) {
    return !c.empty() && std::all_of(c.begin(), c.end(), [](double x) { return std::isfinite(x); });
  };
  if (!poly_ok(pi_coeffs)) bad("A3: potential.pi_coeffs must be a nonempty list of finite coefficients (pi in C2[-1,1])");
  if (!poly_ok(pi_gamma_coeffs))
    bad("A3: potential.pi_gamma_coeffs must be a nonempty list of finite coefficients (pi_Gamma in C2[-1,1])");

  // A4
  bool any = false;
  for (int i = 0; i < 5; ++i) {
    if (!(beta[i] >= 0.0) || !std::isfinite(beta[i]))
      bad("A4: cost.beta" + std::to_string(i + 1) + " must be nonnegative (got " + fmt(beta[i]) + ")");
    any = any || beta[i] > 0.0;
  }
  if (!any) bad("A4: cost weights beta1..beta5 must be nonnegative but not all zero");
  if (target.kind != "constant" && target.kind != "translated")
    bad("config: cost.target must be \"constant\" or \"translated\" (got \"" + target.kind + "\")");
  if (target.kind == "translated" && initial.kind != "stripes")
    bad("config: cost.target = \"translated\" needs stripe initial data");

  // A5
  if (!(control.u_bar > 0.0)) bad("A5: control.u_bar must be positive (got " + fmt(control.u_bar) + ")");
  if (!(control.r0 > 0.0)) bad("A5: control.r0 must be positive (got " + fmt(control.r0) + ")");
  if (control.mode != "shear" && control.mode != "streamfunction")
    bad("config: control.mode must be \"shear\" or \"streamfunction\" (got \"" + control.mode + "\")");
  if (control.initial != "zero" && control.initial != "uniform" && control.initial != "couette")
    bad("config: control.initial must be \"zero\", \"uniform\" or \"couette\" (got \"" + control.initial + "\")");
  if (control.initial != "zero" && std::abs(control.amplitude) > control.u_bar)
    bad("A5: fixed control exceeds the pointwise bound (|control.amplitude| = " + fmt(std::abs(control.amplitude)) +
        " > u_bar = " + fmt(control.u_bar) + ")");

  if (!(solver.newton_tol > 0.0) || solver.newton_max_iter < 1) bad("config: solver Newton settings must be positive");
  if (solver.pdas_max_sweeps < 1) bad("config: solver.pdas_max_sweeps must be at least 1");
  if (solver.opt_max_iter < 0 || !(solver.opt_tol > 0.0)) bad("config: solver optimizer settings are invalid");
  if (solver.gradcheck_directions < 1) bad("config: solver.gradcheck_directions must be at least 1");
  return v;
}

void ProblemSpec::validate() const {
  auto v = violations();
  if (!v.empty()) throw ConfigValidationError(std::move(v));
}

std::string ProblemSpec::canonical() const {
  std::ostringstream o;
  auto arr = [](const std::vector<double>& a) {
    std::string s = "[";
    for (std::size_t i = 0; i < a.size(); ++i) s += (i ? ", " : "") + fmt(a[i]);
    return s + "]";
  };
  o << "geometry.Lx = " << fmt(Lx) << "\ngeometry.Ly = " << fmt(Ly) << "\ngeometry.Nx = " << Nx
    << "\ngeometry.Ny = " << Ny << "\ntime.T = " << fmt(T) << "\ntime.steps = " << steps
    << "\nphysics.tau = " << fmt(tau) << "\nphysics.tau_gamma = " << fmt(tau_gamma) << "\ninitial.kind = \""
    << initial.kind << "\"\ninitial.value = " << fmt(initial.value) << "\ninitial.amplitude = "
    << fmt(initial.amplitude) << "\ninitial.width = " << fmt(initial.width) << "\ninitial.waves = " << initial.waves
    << "\ninitial.file = \"" << initial.file << "\"\npotential.pi_coeffs = " << arr(pi_coeffs)
    << "\npotential.pi_gamma_coeffs = " << arr(pi_gamma_coeffs) << "\nquench.alpha0 = " << fmt(schedule.alpha0)
    << "\nquench.ratio = " << fmt(schedule.ratio) << "\nquench.levels = " << schedule.levels
    << "\nquench.p = " << fmt(schedule.p_exponent) << "\nquench.alpha = " << fmt(alpha)
    << "\ncost.beta = " << arr({beta.begin(), beta.end()}) << "\ncost.target = \"" << target.kind
    << "\"\ncost.target_value = " << fmt(target.value) << "\ncost.target_speed = " << fmt(target.speed)
    << "\ncontrol.mode = \"" << control.mode << "\"\ncontrol.u_bar = " << fmt(control.u_bar)
    << "\ncontrol.r0 = " << fmt(control.r0) << "\ncontrol.initial = \"" << control.initial
    << "\"\ncontrol.amplitude = " << fmt(control.amplitude) << "\nsolver.newton_tol = " << fmt(solver.newton_tol)
    << "\nsolver.newton_max_iter = " << solver.newton_max_iter << "\nsolver.pdas_max_sweeps = "
    << solver.pdas_max_sweeps << "\nsolver.opt_max_iter = " << solver.opt_max_iter
    << "\nsolver.opt_tol = " << fmt(solver.opt_tol) << "\nsolver.anchored = " << (solver.anchored ? "true" : "false")
    << "\nsolver.gradcheck_directions = " << solver.gradcheck_directions << "\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// Presets

ProblemSpec preset(const std::string& name) {
  ProblemSpec s;
  if (name == "reference") return s;
  if (name == "gradcheck") {
    s.Nx = 16;
    s.Ny = 8;
    s.T = 0.4;
    s.steps = 10;
    s.beta = {1.0, 0.5, 1.0, 0.5, 0.1};
    return s;
  }
  if (name == "zero") {
    s.Nx = 16;
    s.Ny = 8;
    s.T = 0.4;
    s.steps = 10;
    s.initial.kind = "constant";
    s.initial.value = 0.2;
    s.target.kind = "constant";
    s.target.value = 0.2;
    s.beta = {1.0, 1.0, 1.0, 1.0, 0.1};
    s.control.initial = "zero";
    return s;
  }
  if (name == "contact") {
    s.Nx = 16;
    s.Ny = 8;
    s.T = 0.4;
    s.steps = 20;
    s.initial.amplitude = 0.95;
    s.initial.width = 0.1;
    s.pi_coeffs = {0.0, -4.0};
    s.pi_gamma_coeffs = {0.0, -4.0};
    return s;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"reference", "gradcheck", "zero", "contact"}; }

// ---------------------------------------------------------------------------
// Setup

namespace {

Vector initial_nodes(const ProblemSpec& s, const StripGeometry& g) {
  if (s.initial.kind == "constant") return Vector::Constant(g.nodes(), s.initial.value);
  if (s.initial.kind == "file") {
    const auto v = read_raw_float64(s.initial.file);
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return FieldPaird::sample(g, [&](double x, double) { return stripe_profile(s, x); }).bulk;
}

}  // namespace

Setup::Setup(const ProblemSpec& spec)
    : spec_((spec.validate(), spec)), ops_(StripGeometry(spec.Lx, spec.Ly, spec.Nx, spec.Ny)) {
  const StripGeometry& g = ops_.geom;
  model_.ops = &ops_;
  model_.tau = spec.tau;
  model_.pi = SmoothPotential(spec.pi_coeffs);
  model_.pi_gamma = SmoothPotential(spec.pi_gamma_coeffs);
  model_.options.newton.tol = spec.solver.newton_tol;
  model_.options.newton.max_iterations = spec.solver.newton_max_iter;
  model_.options.pdas_max_sweeps = spec.solver.pdas_max_sweeps;

  phys_.tau = spec.tau;
  phys_.time = TimeGrid{spec.T, spec.steps};
  phys_.rho0 = FieldPaird::from_nodes(g, initial_nodes(spec, g));

  if (spec.target.kind == "constant") {
    cost_ = CostSpec::constant_targets(g, spec.beta, spec.target.value);
  } else {
    cost_.beta = spec.beta;
    auto shifted = [&](double t) {
      return FieldPaird::sample(g, [&](double x, double) { return stripe_profile(spec, x - spec.target.speed * t); })
          .bulk;
    };
    for (int k = 1; k <= spec.steps; ++k) cost_.rho_Q.push_back(shifted(phys_.time.time(k)));
    cost_.rho_Sigma = cost_.rho_Q;
    cost_.rho_Omega = shifted(spec.T);
    cost_.rho_Gamma = cost_.rho_Omega;
  }
  cost_.validate(g, spec.steps);

  const ControlMode mode = spec.control.mode == "shear" ? ControlMode::shear : ControlMode::streamfunction;
  fixed_ = Control(mode, g, phys_.time, spec.control.u_bar, spec.control.r0);
  if (spec.control.initial != "zero") {
    const double a = spec.control.amplitude;
    auto profile = [&](double y) { return spec.control.initial == "uniform" ? a : a * (2.0 * y / spec.Ly - 1.0); };
    for (int k = 0; k < fixed_.levels(); ++k) {
      if (mode == ControlMode::shear) {
        for (int j = 0; j <= g.Ny(); ++j) fixed_.shear(j, k) = profile(g.y(j));
      } else {
        // psi with Dy psi = f: accumulate the trapezoidal antiderivative.
        auto lvl = fixed_.level(k);
        double psi = 0.0;
        for (int j = 1; j <= g.Ny(); ++j) {
          psi += 0.5 * g.hy() * (profile(g.y(j - 1)) + profile(g.y(j)));
          if (j < g.Ny())
            lvl.segment((j - 1) * g.Nx(), g.Nx()).setConstant(psi);
          else
            lvl[g.Nx() * (g.Ny() - 1)] = psi;
        }
      }
    }
  }
  const AdmissibilityReport adm = check_admissible(ops_, fixed_, 1e-10);
  if (!adm.admissible) {
    std::vector<std::string> v;
    if (adm.max_speed > spec.control.u_bar * (1.0 + 1e-10))
      v.push_back("A5: fixed control speed " + fmt(adm.max_speed) + " exceeds u_bar = " + fmt(spec.control.u_bar));
    if (adm.norm.combined > spec.control.r0 * (1.0 + 1e-10))
      v.push_back("A5: fixed control norm " + fmt(adm.norm.combined) + " exceeds r0 = " + fmt(spec.control.r0));
    if (v.empty()) v.push_back("A5: fixed control is not admissible");
    throw ConfigValidationError(v);
  }
}

ReducedProblem Setup::reduced(const ForwardMode& mode) const {
  ReducedProblem r;
  r.model = &model_;
  r.phys = phys_;
  r.cost = cost_;
  r.mode = mode;
  return r;
}

OptimizeOptions Setup::optimize_options() const {
  OptimizeOptions o;
  o.max_iterations = spec_.solver.opt_max_iter;
  o.stationarity_tol = spec_.solver.opt_tol;
  return o;
}

}  // namespace dqc
