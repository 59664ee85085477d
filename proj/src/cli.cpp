#include "dqc/cli.hpp"

#include "dqc/config.hpp"
#include "dqc/experiments.hpp"
#include "dqc/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>

namespace dqc {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Thresholds for the checks that turn a finished run into exit code 4.
constexpr double kMeanDriftTol = 1e-10;
constexpr double kGradcheckTol = 1e-6;
constexpr double kAdjointStructureTol = 1e-10;
constexpr double kViTol = -1e-6;
constexpr double kSymmetryTol = 1e-10;
constexpr double kSbpTol = 1e-12;
constexpr double kIncrementReduction = 5.0;

struct Options {
  std::string config;
  std::string preset;
  std::string out;
  std::string mode = "quench";
  std::optional<double> alpha;
  std::uint64_t seed = 1;
};

struct ConfigProblem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Collects check outcomes; any failure makes the run exit with 4.
struct Checks {
  json list = json::array();
  bool ok = true;

  void add(const std::string& name, bool pass, double value) {
    list.push_back({{"name", name}, {"pass", pass}, {"value", value}});
    ok = ok && pass;
  }
};

ProblemSpec load_spec(const Options& o) {
  if (!o.config.empty() && !o.preset.empty()) throw ConfigProblem("--config and --preset are exclusive");
  ProblemSpec spec = o.config.empty() ? preset(o.preset.empty() ? "reference" : o.preset) : parse_config(o.config);
  if (o.alpha) spec.alpha = *o.alpha;
  if (o.mode != "quench" && o.mode != "obstacle") throw ConfigProblem("--mode must be quench or obstacle, got " + o.mode);
  spec.validate();
  return spec;
}

fs::path output_dir(const Options& o, const ProblemSpec& spec) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return spec.output_dir;
}

ForwardMode forward_mode(const Options& o, const Setup& setup) {
  return o.mode == "obstacle" ? ForwardMode::obstacle() : setup.quench_mode(setup.spec().alpha);
}

json alpha_json(const Options& o, const Setup& setup) {
  return o.mode == "obstacle" ? json(nullptr) : json(setup.spec().alpha);
}

std::string level_stem(const std::string& name, int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04d", name.c_str(), k);
  return buf;
}

void write_json(RunManifest& man, const fs::path& p, const json& j) {
  write_text(p, j.dump(2) + "\n");
  man.add_file(p);
}

void write_control(RunManifest& man, const fs::path& dir, const std::string& stem, const Control& u) {
  const fs::path bin = dir / (stem + ".bin");
  write_raw_float64(bin, u.coeffs());
  man.add_file(bin);
  json side{{"quantity", "control"},
            {"mode", u.mode() == ControlMode::shear ? "shear" : "streamfunction"},
            {"dims", {u.levels(), u.dofs_per_level()}},
            {"layout", "row-major, level-major"},
            {"dtype", "float64-le"},
            {"dt", u.time().dt()},
            {"u_bar", u.u_bar()},
            {"r0", u.r0()},
            {"file", bin.filename().string()}};
  write_json(man, dir / (stem + ".json"), side);
}

void add_history_row(CsvWriter& csv, const HistoryEntry& h) {
  csv << h.iter << h.cost << h.step_len << h.stationarity << h.x_norm.l2 << h.x_norm.linf << h.x_norm.h1l3
      << h.x_norm.combined << h.backtracks << h.failed_trials;
  csv.end_row();
}

const std::vector<std::string> kHistoryHeader{"iter",       "cost",        "step_len",        "stationarity",
                                              "x_norm_l2",  "x_norm_linf", "x_norm_h1l3",     "x_norm_combined",
                                              "backtracks", "failed_trials"};

// --- subcommands --------------------------------------------------------

int cmd_forward(const Options& o, const Setup& setup, const fs::path& dir, RunManifest& man) {
  const ForwardMode mode = forward_mode(o, setup);
  const StateSolution sol = solve_forward(setup.model(), setup.phys(), setup.fixed_control(), mode);
  man.stage("solve_forward", "ok", std::to_string(sol.levels() - 1) + " steps");

  CsvWriter ts(dir / "timeseries.csv", {"step", "time", "mean", "min_rho", "max_rho", "newton_iters"});
  for (int k = 0; k < sol.levels(); ++k) {
    const StepDiagnostics& d = sol.diagnostics[k];
    ts << k << sol.time.time(k) << d.mean << d.min_rho << d.max_rho << d.newton_iterations;
    ts.end_row();
  }
  man.add_file(ts.close());

  const fs::path fields = dir / "fields";
  fs::create_directories(fields);
  for (int k = 0; k < sol.levels(); ++k)
    man.add_files(write_grid(fields, level_stem("rho", k), setup.geom(), sol.rho[k], sol.time.time(k), "rho"));
  const int K = sol.levels() - 1;
  man.add_files(write_grid(fields, level_stem("mu", K), setup.geom(), sol.mu[K], sol.time.time(K), "mu"));

  Checks checks;
  checks.add("mean_drift", sol.max_mean_drift() <= kMeanDriftTol, sol.max_mean_drift());
  json summary{{"mode", o.mode},
               {"alpha", alpha_json(o, setup)},
               {"steps", K},
               {"dt", sol.time.dt()},
               {"conserved_mean", sol.conserved_mean},
               {"max_mean_drift", sol.max_mean_drift()},
               {"max_abs_rho", sol.max_abs_rho()},
               {"separation_gap", sol.separation_gap()},
               {"cost", evaluate_cost(setup.ops(), sol, setup.fixed_control(), setup.cost())}};
  if (mode.kind == StateMode::quench) {
    checks.add("separation_gap", sol.separation_gap() > 0.0, sol.separation_gap());
  } else {
    CsvWriter ob(dir / "obstacle.csv", {"step", "pdas_sweeps", "active_upper", "active_lower", "residual"});
    for (int k = 1; k < sol.levels(); ++k) {
      const StepDiagnostics& d = sol.diagnostics[k];
      ob << k << d.pdas_sweeps << d.active_upper << d.active_lower << d.residual;
      ob.end_row();
    }
    man.add_file(ob.close());
    const ComplementarityReport c = obstacle_complementarity(sol);
    summary["complementarity"] = {{"nodes_checked", c.nodes_checked},
                                  {"violations", c.violations},
                                  {"active_upper", c.active_upper},
                                  {"active_lower", c.active_lower}};
    checks.add("box", c.max_abs_rho <= 1.0, c.max_abs_rho);
    checks.add("complementarity", c.violations == 0, c.violations);
  }
  summary["checks"] = checks.list;
  write_json(man, dir / "summary.json", summary);
  return checks.ok ? exit_ok : exit_check_failed;
}

int cmd_adjoint(const Options& o, const Setup& setup, const fs::path& dir, RunManifest& man) {
  const ReducedProblem prob = setup.reduced(forward_mode(o, setup));
  const Control& u = setup.fixed_control();
  GradientEvaluation ge = evaluate_with_gradient(prob, u);
  man.stage("forward_backward", "ok");
  const NOperator N(setup.ops());
  AdjointSolution& adj = ge.adjoint;
  adjoint_diagnostics(N, setup.model(), ge.eval.state, adj);

  CsvWriter csv(dir / "adjoint_diagnostics.csv",
                {"step", "mean_q", "norm_q", "norm_Nq", "curvature_norm", "stiffness_residual"});
  double max_stiff = 0.0, max_mean_q = 0.0;
  for (int k = 1; k < adj.levels(); ++k) {
    const AdjointDiagnostics& d = adj.diagnostics[k];
    csv << k << d.mean_q << d.norm_q << d.norm_Nq << d.curvature_norm << d.stiffness_residual;
    csv.end_row();
    max_stiff = std::max(max_stiff, d.stiffness_residual);
    max_mean_q = std::max(max_mean_q, std::abs(d.mean_q));
  }
  man.add_file(csv.close());

  const fs::path fields = dir / "fields";
  fs::create_directories(fields);
  const TimeGrid& time = ge.eval.state.time;
  for (int k = 1; k < adj.levels(); ++k) {
    man.add_files(write_grid(fields, level_stem("p", k), setup.geom(), adj.p[k], time.time(k), "p"));
    man.add_files(write_grid(fields, level_stem("q", k), setup.geom(), adj.q[k], time.time(k), "q"));
  }
  write_control(man, dir, "gradient", ge.gradient);

  Checks checks;
  checks.add("stiffness_residual", max_stiff <= kAdjointStructureTol, max_stiff);
  checks.add("mean_q", max_mean_q <= kAdjointStructureTol, max_mean_q);
  json summary{{"mode", o.mode},
               {"alpha", alpha_json(o, setup)},
               {"cost", ge.eval.cost},
               {"gradient_norm", control_norm(ge.gradient)},
               {"max_stiffness_residual", max_stiff},
               {"max_abs_mean_q", max_mean_q},
               {"checks", checks.list}};
  if (adj.mode == StateMode::quench) summary["curvature_norm"] = quench_curvature_norm(N, ge.eval.state, adj);
  write_json(man, dir / "summary.json", summary);
  return checks.ok ? exit_ok : exit_check_failed;
}

int cmd_gradcheck(const Options& o, const Setup& setup, const fs::path& dir, RunManifest& man) {
  ReducedProblem plain = setup.reduced(forward_mode(o, setup));
  ReducedProblem adapted = plain;
  adapted.anchor = setup.fixed_control();
  const int dirs = setup.spec().solver.gradcheck_directions;

  CsvWriter csv(dir / "gradcheck.csv", {"variant", "direction", "adjoint", "fd", "best_step", "rel_err"});
  json summary{{"mode", o.mode}, {"alpha", alpha_json(o, setup)}, {"seed", o.seed}, {"directions", dirs}};
  Checks checks;
  for (const auto& [name, prob] : {std::pair<std::string, const ReducedProblem*>{"plain", &plain},
                                   std::pair<std::string, const ReducedProblem*>{"adapted", &adapted}}) {
    const GradcheckReport rep = gradcheck(setup, *prob, o.seed, dirs);
    man.stage("gradcheck_" + name, "ok");
    for (const GradcheckEntry& e : rep.entries) {
      csv << name << e.direction << e.adjoint << e.fd << e.best_step << e.rel_err;
      csv.end_row();
    }
    summary[name] = {{"cost", rep.cost}, {"max_rel_err", rep.max_rel_err}};
    checks.add(name + "_max_rel_err", rep.max_rel_err <= kGradcheckTol, rep.max_rel_err);
  }
  man.add_file(csv.close());
  summary["checks"] = checks.list;
  write_json(man, dir / "gradcheck.json", summary);
  return checks.ok ? exit_ok : exit_check_failed;
}

int cmd_optimize(const Options& o, const Setup& setup, const fs::path& dir, RunManifest& man) {
  const ReducedProblem prob = setup.reduced(forward_mode(o, setup));
  const OptimizeResult res = optimize(prob, project_Uad(setup.ops(), setup.fixed_control()), setup.optimize_options());
  man.stage("optimize", "ok", res.stop_reason);

  CsvWriter csv(dir / "history.csv", kHistoryHeader);
  bool monotone = true;
  for (std::size_t i = 0; i < res.history.size(); ++i) {
    add_history_row(csv, res.history[i]);
    if (i > 0 && res.history[i].cost > res.history[i - 1].cost) monotone = false;
  }
  man.add_file(csv.close());
  write_control(man, dir, "control", res.u);

  const GradientEvaluation ge = evaluate_with_gradient(prob, res.u);
  const VIReport vi = vi_residual(setup.ops(), res.u, ge.gradient);
  double dist = 0.0;
  if (prob.mode.kind == StateMode::quench) {
    const Evaluation obst = evaluate(setup.reduced(ForwardMode::obstacle()), res.u);
    dist = l2Q_distance(setup.ops(), setup.phys().time, res.final.state.rho, obst.state.rho);
  }
  man.stage("post", "ok");

  Checks checks;
  checks.add("cost_nonincreasing", monotone, res.history.empty() ? 0.0 : res.history.back().cost);
  checks.add("vi_residual", vi.min_pairing >= kViTol, vi.min_pairing);
  json summary{{"mode", o.mode},
               {"alpha", alpha_json(o, setup)},
               {"final_cost", res.final.cost},
               {"vi_residual", vi.min_pairing},
               {"dist_to_obstacle_state", dist},
               {"iterations", res.history.empty() ? 0 : res.history.back().iter},
               {"stationarity", res.history.empty() ? 0.0 : res.history.back().stationarity},
               {"converged", res.converged},
               {"stop_reason", res.stop_reason},
               {"control_norm", control_norm(res.u)},
               {"checks", checks.list}};
  write_json(man, dir / "summary.json", summary);
  return checks.ok ? exit_ok : exit_check_failed;
}

int cmd_quench_sweep(const Options&, const Setup& setup, const fs::path& dir, RunManifest& man) {
  const ProblemSpec& spec = setup.spec();
  const std::vector<double> alphas = spec.schedule.alphas();
  const ReducedProblem base = setup.reduced(setup.quench_mode(alphas.front()));
  DriveOptions opts;
  opts.anchored = spec.solver.anchored;
  opts.optimize = setup.optimize_options();
  const Control& probe = setup.fixed_control();
  const DriveReport rep = deep_quench_drive(base, project_Uad(setup.ops(), probe), probe, spec.schedule, opts);
  man.stage("deep_quench_drive", "ok", std::to_string(rep.levels.size()) + " levels");

  CsvWriter csv(dir / "sweep.csv", {"level", "alpha", "ok", "final_cost", "iterations", "stationarity",
                                    "vi_residual", "dist_to_obstacle_state", "probe_cost_gap", "separation_gap",
                                    "curvature_norm", "increment"});
  Checks checks;
  bool all_ok = true;
  double min_vi = 0.0, min_gap = 1.0;
  for (std::size_t n = 0; n < rep.levels.size(); ++n) {
    const QuenchLevelResult& L = rep.levels[n];
    const double inc = n < rep.increments.size() ? rep.increments[n] : std::nan("");
    csv << static_cast<int>(n) << L.alpha << static_cast<int>(L.ok) << L.final_cost << L.iterations
        << L.stationarity << L.vi_residual << L.dist_to_obstacle_state << L.probe_cost_gap << L.separation_gap
        << L.curvature_norm << inc;
    csv.end_row();
    all_ok = all_ok && L.ok;
    if (L.ok) {
      min_vi = std::min(min_vi, L.vi_residual);
      min_gap = std::min(min_gap, L.separation_gap);
    }
    char name[32];
    std::snprintf(name, sizeof name, "alpha_%02zu.json", n);
    json lj{{"alpha", L.alpha},
            {"ok", L.ok},
            {"final_cost", L.final_cost},
            {"vi_residual", L.vi_residual},
            {"dist_to_obstacle_state", L.dist_to_obstacle_state},
            {"probe_cost_gap", L.probe_cost_gap},
            {"separation_gap", L.separation_gap},
            {"iterations", L.iterations},
            {"stationarity", L.stationarity}};
    if (!L.ok) lj["error"] = L.error;
    write_json(man, dir / name, lj);
  }
  man.add_file(csv.close());
  if (!rep.levels.empty() && rep.levels.back().ok) write_control(man, dir, "control_final", rep.levels.back().u);

  const double first = rep.increments.empty() ? 0.0 : rep.increments.front();
  const double last = rep.increments.empty() ? 0.0 : rep.increments.back();
  const double reduction = last > 0.0 ? first / last : std::numeric_limits<double>::infinity();
  checks.add("all_levels_ok", all_ok, all_ok ? 1.0 : 0.0);
  checks.add("separation_gap", min_gap > 0.0, min_gap);
  checks.add("vi_residual", min_vi >= kViTol, min_vi);
  checks.add("increment_reduction", reduction >= kIncrementReduction, reduction);
  json report{{"anchored", opts.anchored},
              {"anchor_source", rep.anchor_source},
              {"alphas", alphas},
              {"increments", rep.increments},
              {"increment_reduction", reduction},
              {"checks", checks.list}};
  write_json(man, dir / "limit_report.json", report);
  if (!all_ok) return exit_solver;
  return checks.ok ? exit_ok : exit_check_failed;
}

int cmd_noperator(const Options& o, const Setup& setup, const fs::path& dir, RunManifest& man) {
  const std::vector<NOperatorSample> samples = noperator_check(setup.ops(), o.seed, 10);
  man.stage("noperator_check", "ok");
  CsvWriter csv(dir / "noperator.csv", {"sample", "symmetry", "identity", "sbp"});
  double sym = 0.0, id = 0.0, sbp = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    csv << static_cast<int>(s) << samples[s].symmetry << samples[s].identity << samples[s].sbp;
    csv.end_row();
    sym = std::max(sym, samples[s].symmetry);
    id = std::max(id, samples[s].identity);
    sbp = std::max(sbp, samples[s].sbp);
  }
  man.add_file(csv.close());
  Checks checks;
  checks.add("symmetry", sym <= kSymmetryTol, sym);
  checks.add("identity", id <= kSymmetryTol, id);
  checks.add("sbp", sbp <= kSbpTol, sbp);
  write_json(man, dir / "noperator.json", {{"seed", o.seed}, {"samples", samples.size()}, {"checks", checks.list}});
  return checks.ok ? exit_ok : exit_check_failed;
}

using Command = std::function<int(const Options&, const Setup&, const fs::path&, RunManifest&)>;

int execute(const std::string& name, const Command& cmd, const Options& o) {
  ProblemSpec spec;
  try {
    spec = load_spec(o);
  } catch (const ConfigParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const ConfigValidationError& e) {
    std::cerr << "invalid config:\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  }

  const fs::path dir = output_dir(o, spec);
  RunManifest man(name, spec.canonical());
  std::unique_ptr<Setup> setup;
  try {
    fs::create_directories(dir);
    setup = std::make_unique<Setup>(spec);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  }
  man.stage("setup", "ok");

  int code = exit_ok;
  try {
    code = cmd(o, *setup, dir, man);
  } catch (const StepFailure& e) {
    std::cerr << "solver failure at step " << e.step() << ": " << e.what() << "\n";
    man.stage(name, "failed", e.what());
    code = exit_solver;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    man.stage(name, "failed", e.what());
    code = exit_solver;
  }
  if (code == exit_check_failed) man.stage("checks", "failed");
  man.write(dir, code);
  std::cout << name << ": " << (code == exit_ok ? "ok" : "exit " + std::to_string(code)) << " -> " << dir.string()
            << "\n";
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Velocity control of a convective Cahn-Hilliard system with dynamic boundary conditions"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  Options o;
  const std::vector<std::pair<std::string, Command>> commands{
      {"forward", cmd_forward},     {"adjoint", cmd_adjoint},         {"gradcheck", cmd_gradcheck},
      {"optimize", cmd_optimize},   {"quench-sweep", cmd_quench_sweep}, {"noperator-check", cmd_noperator},
  };
  const std::map<std::string, std::string> help{
      {"forward", "one state solve"},
      {"adjoint", "state solve, adjoint sweep and diagnostics"},
      {"gradcheck", "adjoint gradient against central differences"},
      {"optimize", "projected-gradient optimization at one alpha"},
      {"quench-sweep", "optimization along the deep-quench schedule"},
      {"noperator-check", "identities of the inverse Neumann operator"},
  };
  std::string chosen;
  std::map<std::string, Command> table;
  for (const auto& [name, cmd] : commands) {
    table[name] = cmd;
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", o.config, "config file")->check(CLI::ExistingFile);
    sub->add_option("--preset", o.preset, "built-in configuration")
        ->check(CLI::IsMember(preset_names()));
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--mode", o.mode, "state model")->check(CLI::IsMember({"quench", "obstacle"}));
    sub->add_option("--alpha", o.alpha, "quench parameter in (0, 1]");
    sub->add_option("--seed", o.seed, "seed for random probes");
    sub->callback([&chosen, name = name] { chosen = name; });
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }
  return execute(chosen, table.at(chosen), o);
}

}  // namespace dqc
