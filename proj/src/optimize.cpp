#include "dqc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dqc {

Control assemble_gradient(const GridOperators& ops, const StateSolution& state, const AdjointSolution& adj,
                          const Control& u, const CostSpec& cost, const std::optional<Control>& anchor) {
  const int K = u.levels();
  if (state.levels() != K + 1 || adj.levels() != K + 1)
    throw std::invalid_argument("assemble_gradient: state, adjoint and control do not match");
  if (anchor && !anchor->same_space(u)) throw std::invalid_argument("assemble_gradient: anchor space mismatch");
  const double dt = u.time().dt();
  const Vector& W = ops.weights.bulk;
  std::vector<VelocityField> cov(K);
  for (int k = 0; k < K; ++k) {
    const Vector& rho = state.rho[k + 1];
    const Vector wp = W.cwiseProduct(adj.p[k + 1]);
    const VelocityField v = u.velocity(ops, k);
    // Pairing with the convection term, then the control penalties.
    cov[k].ux = -dt * rho.cwiseProduct(ops.dx.transpose() * wp) + dt * cost.beta[4] * W.cwiseProduct(v.ux);
    cov[k].uy = -dt * rho.cwiseProduct(ops.dy.transpose() * wp) + dt * cost.beta[4] * W.cwiseProduct(v.uy);
    if (anchor) {
      const VelocityField a = anchor->velocity(ops, k);
      cov[k].ux += dt * W.cwiseProduct(v.ux - a.ux);
      cov[k].uy += dt * W.cwiseProduct(v.uy - a.uy);
    }
  }
  Control g = Control::zero_like(u);
  g.coeffs() = u.pull_back(ops, cov).cwiseQuotient(u.metric_weights());
  return g;
}

Evaluation evaluate(const ReducedProblem& prob, const Control& u) {
  Evaluation e;
  e.state = solve_forward(*prob.model, prob.phys, u, prob.mode);
  e.cost = evaluate_cost(prob.ops(), e.state, u, prob.cost, prob.anchor);
  return e;
}

GradientEvaluation evaluate_with_gradient(const ReducedProblem& prob, const Control& u) {
  GradientEvaluation out{evaluate(prob, u), {}, {}};
  out.adjoint = solve_adjoint(*prob.model, out.eval.state, prob.cost, u);
  out.gradient = assemble_gradient(prob.ops(), out.eval.state, out.adjoint, u, prob.cost, prob.anchor);
  return out;
}

double stationarity(const GridOperators& ops, const Control& u, const Control& g) {
  Control trial = u;
  trial.coeffs() -= g.coeffs();
  Control d = project_Uad(ops, trial);
  d.coeffs() -= u.coeffs();
  return control_norm(d);
}

OptimizeResult optimize(const ReducedProblem& prob, const Control& u0, const OptimizeOptions& opts) {
  const GridOperators& ops = prob.ops();
  const AdmissibilityReport adm = check_admissible(ops, u0, 1e-10);
  if (!adm.admissible) throw std::invalid_argument("optimize: initial control is not admissible");

  OptimizeResult res;
  res.u = u0;
  GradientEvaluation cur = evaluate_with_gradient(prob, res.u);
  for (int it = 0;; ++it) {
    HistoryEntry h;
    h.iter = it;
    h.cost = cur.eval.cost;
    h.stationarity = stationarity(ops, res.u, cur.gradient);
    h.x_norm = x_norm(ops, res.u);
    if (h.stationarity <= opts.stationarity_tol) {
      res.history.push_back(h);
      res.converged = true;
      res.stop_reason = "stationary";
      break;
    }
    if (it >= opts.max_iterations) {
      res.history.push_back(h);
      res.stop_reason = "iteration limit";
      break;
    }

    bool accepted = false;
    bool rounding = false;
    std::optional<GradientEvaluation> next;
    Control trial_u;
    double s = opts.initial_step;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt, s *= opts.backtrack_factor) {
      Control trial = res.u;
      trial.coeffs() -= s * cur.gradient.coeffs();
      trial_u = project_Uad(ops, trial);
      Control d = trial_u;
      d.coeffs() -= res.u.coeffs();
      const double slope = control_inner(cur.gradient, d);
      if (!(slope < 0.0)) {
        h.backtracks = bt + 1;
        continue;
      }
      // Below this the cost change cannot be resolved in floating point.
      if (-slope <= opts.rounding_floor * std::max(1.0, std::abs(cur.eval.cost))) {
        rounding = true;
        break;
      }
      try {
        Evaluation e = evaluate(prob, trial_u);
        if (e.cost <= cur.eval.cost + opts.armijo_sigma * slope) {
          accepted = true;
          h.step_len = s;
          h.backtracks = bt;
          next.emplace(GradientEvaluation{std::move(e), {}, {}});
          break;
        }
      } catch (const StepFailure&) {
        ++h.failed_trials;
      }
      h.backtracks = bt + 1;
    }
    res.history.push_back(h);
    if (!accepted) {
      res.stop_reason = rounding ? "cost decrease below rounding level" : "line search failed";
      break;
    }
    res.u = trial_u;
    next->adjoint = solve_adjoint(*prob.model, next->eval.state, prob.cost, res.u);
    next->gradient = assemble_gradient(ops, next->eval.state, next->adjoint, res.u, prob.cost, prob.anchor);
    cur = std::move(*next);
  }
  res.final = std::move(cur.eval);
  return res;
}

VIReport vi_residual(const GridOperators& ops, const Control& u, const Control& g) {
  if (!u.same_space(g)) throw std::invalid_argument("vi_residual: gradient space mismatch");
  VIReport r;
  r.min_pairing = std::numeric_limits<double>::infinity();
  const Vector w = u.metric_weights();
  Control v = u;
  for (Eigen::Index d = 0; d < u.coeffs().size(); ++d) {
    for (double target : {u.u_bar(), -u.u_bar()}) {
      const double old = v.coeffs()[d];
      v.coeffs()[d] = target;
      ++r.probes;
      if (check_admissible(ops, v, 1e-10).admissible)
        r.min_pairing = std::min(r.min_pairing, w[d] * g.coeffs()[d] * (target - old));
      else
        ++r.skipped;
      v.coeffs()[d] = old;
    }
  }
  if (r.probes == r.skipped) r.min_pairing = 0.0;
  return r;
}

std::vector<double> QuenchSchedule::alphas() const {
  if (!(alpha0 > 0.0 && alpha0 <= 1.0) || !(ratio > 0.0 && ratio < 1.0) || levels < 1)
    throw std::invalid_argument("QuenchSchedule: need alpha0 in (0, 1], ratio in (0, 1), levels >= 1");
  std::vector<double> a(levels);
  for (int n = 0; n < levels; ++n) a[n] = alpha0 * std::pow(ratio, n);
  return a;
}

namespace {

double velocity_distance(const GridOperators& ops, const Control& a, const Control& b) {
  Control d = a;
  d.coeffs() -= b.coeffs();
  return std::sqrt(velocity_l2Q_squared(ops, d));
}

}  // namespace

DriveReport deep_quench_drive(const ReducedProblem& base, const Control& u0, const Control& probe,
                              const QuenchSchedule& schedule, const DriveOptions& opts) {
  const GridOperators& ops = base.ops();
  const std::vector<double> alphas = schedule.alphas();
  DriveReport rep;
  NOperator N(ops);

  ReducedProblem limit = base;
  limit.mode = ForwardMode::obstacle();
  limit.anchor.reset();
  const Evaluation probe_limit = evaluate(limit, probe);

  if (opts.anchored) {
    try {
      OptimizeResult r = optimize(limit, u0, opts.optimize);
      rep.anchor = r.u;
      rep.anchor_source = "obstacle-mode optimizer";
    } catch (const std::exception&) {
      rep.anchor_source = "previous level optimizer";
    }
  }

  Control warm = u0;
  std::optional<Control> previous;
  for (double alpha : alphas) {
    QuenchLevelResult lvl;
    lvl.alpha = alpha;
    ReducedProblem prob = base;
    prob.mode = ForwardMode::quenched(QuenchParams(alpha, schedule.p_exponent));
    prob.anchor.reset();
    if (opts.anchored) prob.anchor = rep.anchor ? rep.anchor : previous;
    try {
      OptimizeResult r = optimize(prob, warm, opts.optimize);
      lvl.u = r.u;
      lvl.final_cost = r.final.cost;
      lvl.iterations = static_cast<int>(r.history.size()) - 1;
      lvl.stationarity = r.history.back().stationarity;
      lvl.history = r.history;
      lvl.separation_gap = r.final.state.separation_gap();

      const AdjointSolution adj = solve_adjoint(*prob.model, r.final.state, prob.cost, r.u);
      const Control g = assemble_gradient(ops, r.final.state, adj, r.u, prob.cost, prob.anchor);
      lvl.vi_residual = vi_residual(ops, r.u, g).min_pairing;
      lvl.curvature_norm = quench_curvature_norm(N, r.final.state, adj);

      const StateSolution obst = solve_forward(*base.model, base.phys, r.u, ForwardMode::obstacle());
      lvl.dist_to_obstacle_state = l2Q_distance(ops, base.phys.time, r.final.state.rho, obst.rho);

      ReducedProblem plain = prob;
      plain.anchor.reset();
      lvl.probe_cost_gap = std::abs(evaluate(plain, probe).cost - probe_limit.cost);
      lvl.ok = true;
      warm = r.u;
      previous = r.u;
    } catch (const std::exception& e) {
      lvl.error = e.what();
      lvl.u = warm;
    }
    rep.levels.push_back(std::move(lvl));
  }
  for (std::size_t n = 0; n + 1 < rep.levels.size(); ++n)
    rep.increments.push_back(velocity_distance(ops, rep.levels[n].u, rep.levels[n + 1].u));
  return rep;
}

}  // namespace dqc
