// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include "dqc/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace dqc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Outcome operator_identities() {
  const Setup setup(preset("reference"));
  double sym = 0.0, id = 0.0, sbp = 0.0;
  for (const NOperatorSample& s : noperator_check(setup.ops(), 20240601, 10)) {
    sym = std::max(sym, s.symmetry);
    id = std::max(id, s.identity);
    sbp = std::max(sbp, s.sbp);
  }
  return {sym <= 1e-10 && id <= 1e-10 && sbp <= 1e-12,
          "sbp " + sci(sbp) + ", symmetry " + sci(sym) + ", identity " + sci(id)};
}

Outcome conservation() {
  double worst = 0.0;
  int runs = 0;
  for (const std::string& name : preset_names()) {
    const Setup setup(preset(name));
    std::vector<ForwardMode> modes{ForwardMode::obstacle()};
    // Contact data drives the quench state within exp(-xi/alpha) of +-1, below
    // double resolution for alpha <= 0.2; quench runs there use mild alphas.
    const std::vector<double> alphas =
        name == "contact" ? std::vector<double>{1.0, 0.5} : setup.spec().schedule.alphas();
    for (double a : alphas) modes.push_back(setup.quench_mode(a));
    for (const Control& u : {setup.fixed_control(), setup.zero_control()}) {
      for (const ForwardMode& m : modes) {
        worst = std::max(worst, solve_forward(setup.model(), setup.phys(), u, m).max_mean_drift());
        ++runs;
      }
    }
  }
  return {worst <= 1e-10, "max drift " + sci(worst) + " over " + std::to_string(runs) +
                              " runs (contact preset: quench at alpha 1 and 0.5 only)"};
}

Outcome separation(const AlphaStudy& ref) {
  double min_gap = 1.0;
  for (const auto& e : ref.entries) min_gap = std::min(min_gap, e.separation_gap);
  int violations = 0, active = 0;
  double max_abs = 0.0;
  for (const std::string& name : {"reference", "contact"}) {
    const Setup setup(preset(name));
    const ComplementarityReport c = obstacle_complementarity(
        solve_forward(setup.model(), setup.phys(), setup.fixed_control(), ForwardMode::obstacle()));
    violations += c.violations;
    active += c.active_upper + c.active_lower;
    max_abs = std::max(max_abs, c.max_abs_rho);
  }
  return {min_gap > 0.0 && violations == 0 && max_abs <= 1.0 && active > 0,
          "min quench gap " + sci(min_gap) + "; obstacle max|rho| " + sci(max_abs) + ", " + std::to_string(active) +
              " active node-levels, " + std::to_string(violations) + " sign violations"};
}

Outcome state_convergence(const AlphaStudy& ref) {
  bool strict = true;
  for (std::size_t n = 1; n < ref.entries.size(); ++n)
    strict = strict && ref.entries[n].dist_to_obstacle < ref.entries[n - 1].dist_to_obstacle;
  const double first = ref.entries.front().dist_to_obstacle, last = ref.entries.back().dist_to_obstacle;
  return {strict && last <= 0.1 * first,
          std::string(strict ? "strictly decreasing" : "NOT monotone") + ", " + sci(first) + " -> " + sci(last)};
}

Outcome cost_continuity(const AlphaStudy& ref) {
  bool dec = true;
  for (std::size_t n = 1; n < ref.entries.size(); ++n)
    dec = dec && ref.entries[n].probe_cost_gap < ref.entries[n - 1].probe_cost_gap;
  const double first = ref.entries.front().probe_cost_gap, last = ref.entries.back().probe_cost_gap;
  return {dec && last <= 0.1 * first,
          std::string(dec ? "decreasing" : "NOT monotone") + ", " + sci(first) + " -> " + sci(last)};
}

Outcome gradient_exactness() {
  const Setup setup(preset("gradcheck"));
  const int dirs = setup.spec().solver.gradcheck_directions;
  double worst = 0.0;
  std::ostringstream d;
  for (const ForwardMode& mode : {setup.quench_mode(setup.spec().alpha), ForwardMode::obstacle()}) {
    ReducedProblem plain = setup.reduced(mode);
    ReducedProblem adapted = plain;
    adapted.anchor = setup.fixed_control();
    const double p = gradcheck(setup, plain, 7, dirs).max_rel_err;
    const double a = gradcheck(setup, adapted, 8, dirs).max_rel_err;
    worst = std::max({worst, p, a});
    d << (mode.kind == StateMode::quench ? "quench" : "obstacle") << " plain " << sci(p) << " adapted " << sci(a)
      << "; ";
  }
  d << dirs << " directions";
  return {worst <= 1e-6, d.str()};
}

Outcome adjoint_structure_check() {
  double stiff = 0.0, mean_q = 0.0, rep = 0.0;
  for (const std::string& name : {"gradcheck", "reference"}) {
    const Setup setup(preset(name));
    for (const ForwardMode& mode : {setup.quench_mode(0.1), setup.quench_mode(1e-4), ForwardMode::obstacle()}) {
      const AdjointStructure s = adjoint_structure(setup, setup.reduced(mode), setup.fixed_control());
      stiff = std::max(stiff, s.max_stiffness_residual);
      mean_q = std::max(mean_q, s.max_abs_mean_q);
      rep = std::max(rep, s.max_representation_error);
    }
  }
  return {stiff <= 1e-10 && mean_q <= 1e-10 && rep <= 1e-9,
          "K p = M q residual " + sci(stiff) + ", |mean q| " + sci(mean_q) + ", p - mean p - N q " + sci(rep)};
}

Outcome optimizer_soundness() {
  bool monotone = true;
  double min_vi = 0.0;
  std::ostringstream d;
  for (const std::string& name : {"gradcheck", "reference"}) {
    const Setup setup(preset(name));
    const ReducedProblem prob = setup.reduced(setup.quench_mode(setup.spec().alpha));
    const OptimizeResult r = optimize(prob, setup.fixed_control(), setup.optimize_options());
    for (std::size_t i = 1; i < r.history.size(); ++i) monotone = monotone && r.history[i].cost <= r.history[i - 1].cost;
    const VIReport vi = vi_residual(setup.ops(), r.u, evaluate_with_gradient(prob, r.u).gradient);
    min_vi = std::min(min_vi, vi.min_pairing);
    d << name << ": " << r.history.size() - 1 << " iterations, " << r.stop_reason << "; ";
  }
  const Setup zero(preset("zero"));
  const OptimizeResult z =
      optimize(zero.reduced(zero.quench_mode(zero.spec().alpha)), zero.zero_control(), zero.optimize_options());
  const double zero_norm = z.u.coeffs().lpNorm<Eigen::Infinity>();
  d << "min VI pairing " << sci(min_vi) << ", zero preset |u| " << sci(zero_norm);
  return {monotone && min_vi >= -1e-6 && zero_norm == 0.0, d.str()};
}

Outcome control_trend() {
  const Setup setup(preset("reference"));
  const ProblemSpec& spec = setup.spec();
  DriveOptions o;
  o.anchored = spec.solver.anchored;
  o.optimize = setup.optimize_options();
  const Control& v = setup.fixed_control();
  const DriveReport rep =
      deep_quench_drive(setup.reduced(setup.quench_mode(spec.schedule.alpha0)), v, v, spec.schedule, o);
  bool ok = true;
  for (const auto& l : rep.levels) ok = ok && l.ok;
  if (!ok || rep.increments.empty()) return {false, "sweep incomplete"};
  const double first = rep.increments.front(), last = rep.increments.back();
  const double factor = first / last;
  return {factor >= 5.0, "increments " + sci(first) + " -> " + sci(last) + " (factor " + sci(factor) + "), anchor: " +
                             rep.anchor_source};
}

Outcome self_convergence() {
  const TimeConvergence tc = time_convergence(preset("reference"), 0.1);
  return {std::abs(tc.rate - 1.0) <= 0.3, "errors " + sci(tc.errors[0]) + ", " + sci(tc.errors[1]) + ", rate " +
                                               sci(tc.rate)};
}

}  // namespace

int main() {
  const Setup reference(preset("reference"));
  std::optional<AlphaStudy> study;
  auto ref_study = [&]() -> const AlphaStudy& {
    if (!study) study = alpha_study(reference, reference.spec().schedule.alphas());
    return *study;
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"operator identities", operator_identities},
      {"mean conservation", conservation},
      {"separation and complementarity", [&] { return separation(ref_study()); }},
      {"deep-quench state convergence", [&] { return state_convergence(ref_study()); }},
      {"probe cost continuity", [&] { return cost_continuity(ref_study()); }},
      {"adjoint gradient vs finite differences", gradient_exactness},
      {"adjoint structure", adjoint_structure_check},
      {"optimizer soundness", optimizer_soundness},
      {"control increments along the anchored sweep", control_trend},
      {"first-order time convergence", self_convergence},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!r.pass) ++failed;
    std::printf("%s %2zu %s: %s [%.1fs]\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                r.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed;
}
