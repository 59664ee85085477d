#include "dqc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dqc {

Vector random_nodes(const StripGeometry& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  Vector v(g.nodes());
  for (auto& x : v) x = ud(rng);
  return v;
}

FieldPaird random_pair(const StripGeometry& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  FieldPaird v(g);
  for (auto& x : v.bulk) x = ud(rng);
  for (auto& x : v.bottom) x = ud(rng);
  for (auto& x : v.top) x = ud(rng);
  return v;
}

FieldPaird remove_mean(const StripGeometry& g, FieldPaird v) {
  const double m = generalized_mean(g, v);
  v.bulk.array() -= m;
  v.bottom.array() -= m;
  v.top.array() -= m;
  return v;
}

double sbp_residual(const StripGeometry& g, const FieldPaird& v, const FieldPaird& w) {
  const Vector lap = laplacian_bulk(g, v);
  const auto [dn_bottom, dn_top] = normal_derivative(g, v);
  const Vector lb_bottom = laplace_beltrami(g, v.bottom);
  const Vector lb_top = laplace_beltrami(g, v.top);
  const Vector prod = lap.cwiseProduct(w.bulk);
  const double bulk = integrate_bulk(g, prod);
  const double surface = ((dn_bottom - lb_bottom).dot(w.bottom) + (dn_top - lb_top).dot(w.top)) * g.hx();
  const double form = inner_product_V0(g, v, w);
  const double scale = std::max({std::abs(bulk), std::abs(surface), std::abs(form), 1e-300});
  return std::abs(bulk - surface + form) / scale;
}

std::vector<NOperatorSample> noperator_check(const GridOperators& ops, std::uint64_t seed, int samples) {
  const NOperator N(ops);
  const StripGeometry& g = ops.geom;
  std::vector<NOperatorSample> out;
  for (int s = 0; s < samples; ++s) {
    const FieldPaird g1 = remove_mean(g, random_pair(g, seed + 3 * s));
    const FieldPaird g2 = remove_mean(g, random_pair(g, seed + 3 * s + 1));
    const FieldPaird n1 = N.apply(g1).solution;
    const FieldPaird n2 = N.apply(g2).solution;
    NOperatorSample r;
    const double a = inner_product_H(g, g1, n2), b = inner_product_H(g, n1, g2);
    r.symmetry = std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
    const double c = inner_product_H(g, g1, n1), d = inner_product_V0(g, n1, n1);
    r.identity = std::abs(c - d) / std::max({std::abs(c), std::abs(d), 1e-300});
    const FieldPaird v = FieldPaird::from_nodes(g, random_nodes(g, seed + 3 * s + 2));
    r.sbp = sbp_residual(g, v, FieldPaird::from_nodes(g, random_nodes(g, seed + 3 * s + 7919)));
    out.push_back(r);
  }
  return out;
}

namespace {

Control random_control(const Setup& setup, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> nd;
  Control u = setup.fixed_control();
  for (auto& c : u.coeffs()) c += scale * nd(rng);
  return project_Uad(setup.ops(), u);
}

}  // namespace

GradcheckReport gradcheck(const Setup& setup, const ReducedProblem& prob, std::uint64_t seed, int directions) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const Control u = random_control(setup, rng, 0.2);
  const GradientEvaluation ge = evaluate_with_gradient(prob, u);
  GradcheckReport rep;
  rep.cost = ge.eval.cost;
  for (int d = 0; d < directions; ++d) {
    Control dir = Control::zero_like(u);
    for (auto& c : dir.coeffs()) c = nd(rng);
    GradcheckEntry e;
    e.direction = d;
    e.adjoint = control_inner(ge.gradient, dir);
    e.rel_err = std::numeric_limits<double>::infinity();
    for (double h : fd_steps()) {
      Control up = u, um = u;
      up.coeffs() += h * dir.coeffs();
      um.coeffs() -= h * dir.coeffs();
      const double fd = (evaluate(prob, up).cost - evaluate(prob, um).cost) / (2.0 * h);
      const double err = std::abs(fd - e.adjoint) / std::max(std::abs(e.adjoint), 1e-300);
      if (err < e.rel_err) {
        e.rel_err = err;
        e.fd = fd;
        e.best_step = h;
      }
    }
    rep.max_rel_err = std::max(rep.max_rel_err, e.rel_err);
    rep.entries.push_back(e);
  }
  return rep;
}

AdjointStructure adjoint_structure(const Setup& setup, const ReducedProblem& prob, const Control& u) {
  const GridOperators& ops = setup.ops();
  const NOperator N(ops);
  const GradientEvaluation ge = evaluate_with_gradient(prob, u);
  const AdjointSolution& adj = ge.adjoint;
  AdjointStructure r;
  for (int k = 1; k < adj.levels(); ++k) {
    r.max_stiffness_residual = std::max(r.max_stiffness_residual, adj.diagnostics[k].stiffness_residual);
    r.max_abs_mean_q = std::max(r.max_abs_mean_q, std::abs(ops.mean_of_nodes(adj.q[k])));
    if (adj.mode == StateMode::quench) {
      const Representation rep = representation_p_from_q(N, adj.q[k], &adj.p[k]);
      const Vector centred = (adj.p[k].array() - *rep.mean_p).matrix();
      const double scale = std::max(centred.lpNorm<Eigen::Infinity>(), 1e-300);
      r.max_representation_error =
          std::max(r.max_representation_error, (centred - rep.Nq.bulk).lpNorm<Eigen::Infinity>() / scale);
    }
  }
  AdjointSolution shifted = adj;
  for (int k = 1; k < shifted.levels(); ++k) shifted.p[k].array() += 3.7;
  const Control g2 = assemble_gradient(ops, ge.eval.state, shifted, u, prob.cost, prob.anchor);
  r.shift_invariance = (g2.coeffs() - ge.gradient.coeffs()).lpNorm<Eigen::Infinity>() /
                       std::max(ge.gradient.coeffs().lpNorm<Eigen::Infinity>(), 1e-300);
  return r;
}

AlphaStudy alpha_study(const Setup& setup, const std::vector<double>& alphas) {
  AlphaStudy st;
  const Control& v = setup.fixed_control();
  const Evaluation obst = evaluate(setup.reduced(ForwardMode::obstacle()), v);
  st.obstacle_max_abs = obst.state.max_abs_rho();
  st.obstacle_cost = obst.cost;
  for (double a : alphas) {
    const Evaluation e = evaluate(setup.reduced(setup.quench_mode(a)), v);
    AlphaStudyEntry en;
    en.alpha = a;
    en.dist_to_obstacle = l2Q_distance(setup.ops(), setup.phys().time, e.state.rho, obst.state.rho);
    en.probe_cost_gap = std::abs(e.cost - obst.cost);
    en.separation_gap = e.state.separation_gap();
    en.max_mean_drift = e.state.max_mean_drift();
    st.entries.push_back(en);
  }
  return st;
}

ComplementarityReport obstacle_complementarity(const StateSolution& s) {
  ComplementarityReport r;
  r.max_abs_rho = s.max_abs_rho();
  for (std::size_t k = 1; k < s.rho.size(); ++k) {
    const Vector& rho = s.rho[k];
    const Vector& xi = s.multiplier[k];
    for (Eigen::Index m = 0; m < rho.size(); ++m) {
      ++r.nodes_checked;
      bool ok = std::abs(rho[m]) <= 1.0;
      if (rho[m] == 1.0) {
        ++r.active_upper;
        ok = ok && xi[m] >= 0.0;
      } else if (rho[m] == -1.0) {
        ++r.active_lower;
        ok = ok && xi[m] <= 0.0;
      } else {
        ok = ok && xi[m] == 0.0;
      }
      if (!ok) ++r.violations;
    }
  }
  return r;
}

TimeConvergence time_convergence(const ProblemSpec& spec, double alpha) {
  auto terminal = [&](int steps) {
    ProblemSpec s = spec;
    s.steps = steps;
    const Setup setup(s);
    const StateSolution sol =
        solve_forward(setup.model(), setup.phys(), setup.fixed_control(), setup.quench_mode(alpha));
    return sol.rho.back();
  };
  TimeConvergence tc;
  const int K = spec.steps;
  const Vector ref = terminal(8 * K);
  const Setup base(spec);
  const Vector& W = base.ops().weights.bulk;
  for (int steps : {K, 2 * K}) {
    const Vector d = terminal(steps) - ref;
    tc.steps.push_back(steps);
    tc.errors.push_back(std::sqrt(W.dot(d.cwiseAbs2())));
  }
  tc.rate = std::log2(tc.errors[0] / tc.errors[1]);
  return tc;
}

}  // namespace dqc
