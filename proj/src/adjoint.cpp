#include "dqc/adjoint.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dqc {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

double h_norm(const GridOperators& ops, const Vector& v) { return std::sqrt(ops.weights.lumped.dot(v.cwiseAbs2())); }

void check_inputs(const StateModel& model, const StateSolution& state, const CostSpec& cost, const Control& u) {
  const GridOperators& ops = *model.ops;
  const int K = state.levels() - 1;
  if (K < 1 || K != u.levels() || !(u.geometry() == ops.geom))
    throw std::invalid_argument("solve_adjoint: state, control and grid do not match");
  for (const auto& r : state.rho)
    if (r.size() != ops.geom.nodes()) throw std::invalid_argument("solve_adjoint: state has the wrong shape");
  cost.validate(ops.geom, K);
}

AdjointSolution sweep(const StateModel& model, const StateSolution& state, const CostSpec& cost, const Control& u,
                      double eps) {
  check_inputs(model, state, cost, u);
  const GridOperators& ops = *model.ops;
  const int n = ops.geom.nodes();
  const int K = state.levels() - 1;
  const double dt = state.time.dt();
  const double tau = model.tau;
  const Vector& M = ops.weights.lumped;
  const bool limit = state.mode == StateMode::obstacle;
  const double phi = limit ? 0.0 : state.quench.phi();

  AdjointSolution adj;
  adj.mode = state.mode;
  adj.quench = state.quench;
  adj.epsilon = eps;
  adj.p.assign(K + 1, Vector::Zero(n));
  adj.q.assign(K + 1, Vector::Zero(n));
  adj.eta_x.assign(K + 1, Vector::Zero(n));
  adj.eta_y.assign(K + 1, Vector::Zero(n));
  adj.diagnostics.assign(K + 1, AdjointDiagnostics{});
  adj.terminal.phi_Omega = cost.beta[2] * (state.rho[K] - cost.rho_Omega);
  adj.terminal.phi_Gamma = cost.beta[3] * (state.rho[K] - cost.rho_Gamma);
  for (int m = 0; m < n; ++m)
    if (!ops.geom.on_boundary(m)) adj.terminal.phi_Gamma[m] = 0.0;

  // Second block, identical at every step: (eps M + dt K) p - dt M q.
  Triplets lower;
  for (int c = 0; c < ops.stiffness.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(ops.stiffness, c); it; ++it)
      lower.emplace_back(n + it.row(), it.col(), dt * it.value());
  for (int m = 0; m < n; ++m) {
    if (eps != 0.0) lower.emplace_back(n + m, m, eps * M[m]);
    lower.emplace_back(n + m, n + m, -dt * M[m]);
  }

  const double k_norm = [&] {
    double s = 0.0;
    for (int c = 0; c < ops.stiffness.outerSize(); ++c) {
      double col = 0.0;
      for (SparseMatrix::InnerIterator it(ops.stiffness, c); it; ++it) col += std::abs(it.value());
      s = std::max(s, col);
    }
    return s;
  }();

  Vector p_next = Vector::Zero(n), q_next = Vector::Zero(n);
  Eigen::SparseLU<SparseMatrix> lu;
  for (int k = K; k >= 1; --k) {
    const SparseMatrix At = SparseMatrix(convection_matrix(ops, u.velocity(ops, k - 1)).transpose());
    const std::vector<signed char>* active =
        limit && static_cast<int>(state.active[k].size()) == n ? &state.active[k] : nullptr;
    auto is_active = [&](int m) { return active != nullptr && (*active)[m] != 0; };

    Triplets t = lower;
    for (int c = 0; c < At.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(At, c); it; ++it)
        if (!is_active(static_cast<int>(it.row()))) t.emplace_back(it.row(), it.col(), dt * it.value());
    for (int c = 0; c < ops.stiffness.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(ops.stiffness, c); it; ++it)
        if (!is_active(static_cast<int>(it.row()))) t.emplace_back(it.row(), n + it.col(), dt * it.value());

    Vector rhs(2 * n);
    Vector g = cost_state_derivative(ops, state, cost, k);
    // At k = K the terminal load sits in g, which is tau M q(T) for the
    // eps-variant as well.
    rhs.head(n) = g + M.cwiseProduct(p_next + tau * q_next) -
                  dt * model.potential_load_derivative(state.rho[k]).cwiseProduct(q_next);
    rhs.tail(n) = eps * M.cwiseProduct(p_next);

    for (int m = 0; m < n; ++m) {
      if (is_active(m)) {
        t.emplace_back(m, n + m, 1.0);
        rhs[m] = 0.0;
        continue;
      }
      t.emplace_back(m, m, M[m]);
      const double curv = phi != 0.0 ? phi * h_second(state.rho[k][m]) : 0.0;
      t.emplace_back(m, n + m, tau * M[m] + dt * M[m] * curv);
    }

    SparseMatrix S(2 * n, 2 * n);
    S.setFromTriplets(t.begin(), t.end());
    lu.compute(S);
    if (lu.info() != Eigen::Success)
      throw SolveError("solve_adjoint: factorisation failed at step " + std::to_string(k), std::numeric_limits<double>::infinity());
    const Vector x = lu.solve(rhs);
    const double res = (S * x - rhs).lpNorm<Eigen::Infinity>();
    const double scale = rhs.lpNorm<Eigen::Infinity>() + 1e-300;
    if (!std::isfinite(res) || res > 1e-8 * scale)
      throw SolveError("solve_adjoint: linear solve inaccurate at step " + std::to_string(k), res / scale);

    adj.p[k] = x.head(n);
    adj.q[k] = x.tail(n);
    adj.eta_x[k] = ops.dx * adj.p[k];
    adj.eta_y[k] = -(ops.dy.transpose() * ops.weights.bulk.cwiseProduct(adj.p[k]))
                        .cwiseQuotient(ops.weights.bulk);

    AdjointDiagnostics& d = adj.diagnostics[k];
    d.mean_q = ops.mean_of_nodes(adj.q[k]);
    d.norm_q = h_norm(ops, adj.q[k]);
    const Vector r = ops.stiffness * adj.p[k] - M.cwiseProduct(adj.q[k]);
    const double denom = k_norm * adj.p[k].lpNorm<Eigen::Infinity>() +
                         M.maxCoeff() * adj.q[k].lpNorm<Eigen::Infinity>();
    d.stiffness_residual = denom > 0.0 ? r.lpNorm<Eigen::Infinity>() / denom : 0.0;

    p_next = adj.p[k];
    q_next = adj.q[k];
  }
  return adj;
}

}  // namespace

AdjointSolution solve_adjoint(const StateModel& model, const StateSolution& state, const CostSpec& cost,
                              const Control& u) {
  return sweep(model, state, cost, u, 0.0);
}

AdjointSolution solve_adjoint_eps(const StateModel& model, const StateSolution& state, const CostSpec& cost,
                                  const Control& u, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("solve_adjoint_eps: eps must lie in (0, 1]");
  return sweep(model, state, cost, u, eps);
}

Representation representation_p_from_q(const NOperator& N, const Vector& q, const Vector* p) {
  const GridOperators& ops = N.ops();
  const Vector load = ops.weights.lumped.cwiseProduct(q);
  if (std::abs(load.sum()) > 1e-10 * (load.cwiseAbs().sum() + 1e-300))
    throw std::invalid_argument("representation_p_from_q: q must have zero mean");
  Representation out;
  out.Nq = FieldPaird::from_nodes(ops.geom, N.apply_load(load));
  if (p != nullptr) out.mean_p = ops.mean_of_nodes(*p);
  return out;
}

void adjoint_diagnostics(const NOperator& N, const StateModel& model, const StateSolution& state,
                         AdjointSolution& adj) {
  const GridOperators& ops = N.ops();
  const Vector& M = ops.weights.lumped;
  const double phi = adj.mode == StateMode::quench ? adj.quench.phi() : 0.0;
  for (int k = 1; k < adj.levels(); ++k) {
    AdjointDiagnostics& d = adj.diagnostics[k];
    const Vector load = M.cwiseProduct(adj.q[k]);
    Vector nq = Vector::Zero(ops.geom.nodes());
    if (std::abs(load.sum()) <= 1e-10 * (load.cwiseAbs().sum() + 1e-300)) {
      nq = N.apply_load(load - Vector(M * (load.sum() / M.sum())));
      d.norm_Nq = std::sqrt(std::max(0.0, nq.dot(ops.stiffness * nq)));
    }
    d.norm_Nq_tau_q = h_norm(ops, nq + model.tau * adj.q[k]);
    if (phi != 0.0) {
      Vector lam(ops.geom.nodes());
      for (int m = 0; m < lam.size(); ++m) lam[m] = phi * h_second(state.rho[k][m]) * adj.q[k][m];
      const double mean = ops.mean_of_nodes(lam);
      const Vector centred = (lam.array() - mean).matrix();
      const Vector xi = N.apply_load(M.cwiseProduct(centred));
      d.curvature_norm = std::sqrt(std::max(0.0, xi.dot(ops.stiffness * xi)) +
                                   (ops.geom.area() + ops.geom.boundary_length()) * mean * mean);
    }
  }
}

double quench_curvature_norm(const NOperator& N, const StateSolution& state, const AdjointSolution& adj) {
  if (adj.mode != StateMode::quench || state.mode != StateMode::quench)
    throw std::invalid_argument("quench_curvature_norm: needs quench-mode state and adjoint");
  if (adj.levels() != state.levels()) throw std::invalid_argument("quench_curvature_norm: level mismatch");
  AdjointSolution tmp = adj;
  StateModel model;
  model.ops = &N.ops();
  adjoint_diagnostics(N, model, state, tmp);
  double s = 0.0;
  for (int k = 1; k < tmp.levels(); ++k) {
    const double c = tmp.diagnostics[k].curvature_norm;
    s += state.time.dt() * c * c;
  }
  return std::sqrt(s);
}

double adjoint_l2Q_distance(const GridOperators& ops, const TimeGrid& time, const AdjointSolution& a,
                            const AdjointSolution& b) {
  if (a.levels() != b.levels()) throw std::invalid_argument("adjoint_l2Q_distance: level mismatch");
  double s = 0.0;
  for (int k = 1; k < a.levels(); ++k) {
    const double dp = h_norm(ops, a.p[k] - b.p[k]);
    const double dq = h_norm(ops, a.q[k] - b.q[k]);
    s += time.dt() * (dp * dp + dq * dq);
  }
  return std::sqrt(s);
}

}  // namespace dqc
