#pragma once

// Reduced cost, its gradient through the discrete adjoint, projected-gradient
// optimization and the deep-quench continuation driver.

#include "dqc/adjoint.hpp"
#include "dqc/cost.hpp"
#include "dqc/state.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dqc {

/// Everything that turns a control into a cost value.
struct ReducedProblem {
  const StateModel* model = nullptr;
  PhysParams phys;
  CostSpec cost;
  ForwardMode mode;
  /// Anchor of the adapted cost; absent for the plain cost.
  std::optional<Control> anchor;

  const GridOperators& ops() const { return *model->ops; }
};

/// Riesz representer of dJ/du in the control metric, built from the full
/// field rho grad p + beta5 u (+ u - anchor).
Control assemble_gradient(const GridOperators& ops, const StateSolution& state, const AdjointSolution& adj,
                          const Control& u, const CostSpec& cost, const std::optional<Control>& anchor = std::nullopt);

struct Evaluation {
  StateSolution state;
  double cost = 0.0;
};

Evaluation evaluate(const ReducedProblem& prob, const Control& u);

struct GradientEvaluation {
  Evaluation eval;
  AdjointSolution adjoint;
  Control gradient;
};

GradientEvaluation evaluate_with_gradient(const ReducedProblem& prob, const Control& u);

struct OptimizeOptions {
  int max_iterations = 100;
  /// Stop when ||u - P(u - g)|| falls below this.
  double stationarity_tol = 1e-7;
  double initial_step = 1.0;
  double backtrack_factor = 0.5;
  double armijo_sigma = 1e-4;
  int max_backtracks = 30;
  /// Trial steps whose predicted decrease is below this fraction of the cost
  /// end the run instead of being evaluated.
  double rounding_floor = 1e-14;
};

struct HistoryEntry {
  int iter = 0;
  double cost = 0.0;
  double step_len = 0.0;
  double stationarity = 0.0;
  XNorm x_norm;
  int backtracks = 0;
  /// Trial steps whose forward solve failed and were treated as rejections.
  int failed_trials = 0;
};

struct OptimizeResult {
  Control u;
  Evaluation final;
  std::vector<HistoryEntry> history;
  bool converged = false;
  std::string stop_reason;
};

/// ||u - P(u - g)|| in the control metric.
double stationarity(const GridOperators& ops, const Control& u, const Control& g);

OptimizeResult optimize(const ReducedProblem& prob, const Control& u0, const OptimizeOptions& opts = {});

struct VIReport {
  /// min over probes of <g, v - u>; the variational inequality asks for >= 0.
  double min_pairing = 0.0;
  int probes = 0;
  int skipped = 0;
};

/// Tests <g(u), v - u> over the 2*dim probes that move one coefficient of u to
/// +u_bar or -u_bar. Probes outside the admissible set are skipped.
VIReport vi_residual(const GridOperators& ops, const Control& u, const Control& g);

struct QuenchLevelResult {
  double alpha = 0.0;
  bool ok = false;
  std::string error;
  Control u;
  double final_cost = 0.0;
  int iterations = 0;
  double stationarity = 0.0;
  double vi_residual = 0.0;
  /// ||rho^alpha(u) - rho^0(u)||_L2(Q), the obstacle solve as oracle.
  double dist_to_obstacle_state = 0.0;
  /// |J(S_alpha(v), v) - J(S_0(v), v)| for the fixed probe v.
  double probe_cost_gap = 0.0;
  double separation_gap = 0.0;
  double curvature_norm = 0.0;
  std::vector<HistoryEntry> history;
};

struct QuenchSchedule {
  double alpha0 = 0.1;
  double ratio = 0.5;
  int levels = 14;
  double p_exponent = 1.0;

  std::vector<double> alphas() const;
};

struct DriveOptions {
  bool anchored = false;
  OptimizeOptions optimize;
};

struct DriveReport {
  std::vector<QuenchLevelResult> levels;
  /// ||u^{alpha_n} - u^{alpha_{n+1}}||_L2(Q), n = 0..N-1
  std::vector<double> increments;
  std::optional<Control> anchor;
  std::string anchor_source;
};

/// Optimizes along the schedule with warm starts. `base` supplies model,
/// data and cost; its mode and anchor are overwritten per level.
DriveReport deep_quench_drive(const ReducedProblem& base, const Control& u0, const Control& probe,
                              const QuenchSchedule& schedule, const DriveOptions& opts);

}  // namespace dqc
