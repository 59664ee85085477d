#include "dqc/state.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dqc {

Vector StateModel::potential_load(const Vector& rho) const {
  Vector out(rho.size());
  for (Eigen::Index m = 0; m < rho.size(); ++m) {
    out[m] = ops->weights.bulk[m] * pi.eval(rho[m]).value;
    if (ops->weights.surface[m] != 0.0) out[m] += ops->weights.surface[m] * pi_gamma.eval(rho[m]).value;
  }
  return out;
}

Vector StateModel::potential_load_derivative(const Vector& rho) const {
  Vector out(rho.size());
  for (Eigen::Index m = 0; m < rho.size(); ++m) {
    out[m] = ops->weights.bulk[m] * pi.eval(rho[m]).derivative;
    if (ops->weights.surface[m] != 0.0) out[m] += ops->weights.surface[m] * pi_gamma.eval(rho[m]).derivative;
  }
  return out;
}

SparseMatrix convection_matrix(const GridOperators& ops, const VelocityField& u) {
  SparseMatrix a = ops.dx * u.ux.asDiagonal();
  if (u.uy.size() > 0 && u.uy.lpNorm<Eigen::Infinity>() > 0.0) a += ops.dy * u.uy.asDiagonal();
  return ops.weights.bulk.asDiagonal() * a;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void append(Triplets& t, const SparseMatrix& a, int row0, int col0, double scale = 1.0) {
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
      t.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
}

void fill_range(StepDiagnostics& d, const GridOperators& ops, const Vector& rho) {
  d.min_rho = rho.minCoeff();
  d.max_rho = rho.maxCoeff();
  d.mean = ops.mean_of_nodes(rho);
}

}  // namespace

StepResult step_quench(const StateModel& model, const Vector& rho_prev, const Vector& mu_prev,
                       const VelocityField& u, const QuenchParams& q, double dt) {
  const GridOperators& ops = *model.ops;
  const int n = ops.geom.nodes();
  const Vector minv = ops.weights.lumped.cwiseInverse();
  const SparseMatrix A = convection_matrix(ops, u);
  const SparseMatrix MinvA = minv.asDiagonal() * A;
  const SparseMatrix MinvK = minv.asDiagonal() * ops.stiffness;
  const Vector explicit_part = minv.cwiseProduct(model.potential_load(rho_prev));
  const double tau = model.tau;
  const double phi = q.phi();

  auto residual = [&](const Vector& x) {
    const auto rho = x.head(n);
    const auto mu = x.tail(n);
    Vector f(2 * n);
    f.head(n) = (rho - rho_prev) / dt + MinvA * rho + MinvK * mu;
    Vector hp(n);
    for (int m = 0; m < n; ++m) hp[m] = phi * h_prime(rho[m]);
    f.tail(n) = tau * (rho - rho_prev) / dt + MinvK * rho + hp + explicit_part - mu;
    return f;
  };

  Triplets base;
  base.reserve(static_cast<std::size_t>(4 * MinvK.nonZeros() + 2 * MinvA.nonZeros() + 4 * n));
  for (int m = 0; m < n; ++m) {
    base.emplace_back(m, m, 1.0 / dt);
    base.emplace_back(n + m, n + m, -1.0);
  }
  append(base, MinvA, 0, 0);
  append(base, MinvK, 0, n);
  append(base, MinvK, n, 0);
  auto jacobian = [&](const Vector& x) {
    Triplets t = base;
    for (int m = 0; m < n; ++m) t.emplace_back(n + m, m, tau / dt + phi * h_second(x[m]));
    SparseMatrix J(2 * n, 2 * n);
    J.setFromTriplets(t.begin(), t.end());
    return J;
  };

  const double bound = 1.0 - model.options.box_guard;
  Vector lower(2 * n), upper(2 * n);
  lower.head(n).setConstant(-bound);
  upper.head(n).setConstant(bound);
  lower.tail(n).setConstant(-std::numeric_limits<double>::infinity());
  upper.tail(n).setConstant(std::numeric_limits<double>::infinity());

  Vector x0(2 * n);
  x0.head(n) = rho_prev;
  x0.tail(n) = mu_prev;

  NewtonResult nr = newton_damped(residual, jacobian, x0, lower, upper, model.options.newton);

  StepResult out;
  out.rho = nr.x.head(n);
  out.mu = nr.x.tail(n);
  out.multiplier.resize(n);
  for (int m = 0; m < n; ++m) out.multiplier[m] = phi * h_prime(out.rho[m]);
  out.diag.newton_iterations = nr.iterations;
  out.diag.residual = nr.residual;
  fill_range(out.diag, ops, out.rho);
  return out;
}

StepResult step_obstacle(const StateModel& model, const Vector& rho_prev, const Vector& mu_prev,
                         const Vector& xi_prev, const std::vector<signed char>& active_prev, const VelocityField& u,
                         double dt) {
  (void)mu_prev;
  const GridOperators& ops = *model.ops;
  const int n = ops.geom.nodes();
  const Vector minv = ops.weights.lumped.cwiseInverse();
  const SparseMatrix MinvA = minv.asDiagonal() * convection_matrix(ops, u);
  const SparseMatrix MinvK = minv.asDiagonal() * ops.stiffness;
  const Vector explicit_part = minv.cwiseProduct(model.potential_load(rho_prev));
  const double tau = model.tau;
  const double c = model.options.pdas_c;

  Triplets base;
  for (int m = 0; m < n; ++m) {
    base.emplace_back(m, m, 1.0 / dt);
    base.emplace_back(n + m, m, tau / dt);
    base.emplace_back(n + m, n + m, -1.0);
    base.emplace_back(n + m, 2 * n + m, 1.0);
  }
  append(base, MinvA, 0, 0);
  append(base, MinvK, 0, n);
  append(base, MinvK, n, 0);

  Vector rhs(3 * n);
  rhs.head(n) = rho_prev / dt;
  rhs.segment(n, n) = tau * rho_prev / dt - explicit_part;

  std::vector<signed char> active = active_prev;
  if (static_cast<int>(active.size()) != n) active.assign(n, 0);
  for (int m = 0; m < n; ++m) {
    if (xi_prev[m] + c * (rho_prev[m] - 1.0) >= 0.0)
      active[m] = 1;
    else if (xi_prev[m] + c * (rho_prev[m] + 1.0) <= 0.0)
      active[m] = -1;
    else
      active[m] = 0;
  }

  StepResult out;
  Eigen::SparseLU<SparseMatrix> lu;
  for (int sweep = 1;; ++sweep) {
    if (sweep > model.options.pdas_max_sweeps) {
      std::ostringstream msg;
      msg << "step_obstacle: active sets did not settle within " << model.options.pdas_max_sweeps << " sweeps";
      throw std::runtime_error(msg.str());
    }
    Triplets t = base;
    for (int m = 0; m < n; ++m) {
      if (active[m] != 0) {
        t.emplace_back(2 * n + m, m, 1.0);
        rhs[2 * n + m] = active[m];
      } else {
        t.emplace_back(2 * n + m, 2 * n + m, 1.0);
        rhs[2 * n + m] = 0.0;
      }
    }
    SparseMatrix S(3 * n, 3 * n);
    S.setFromTriplets(t.begin(), t.end());
    lu.compute(S);
    if (lu.info() != Eigen::Success) throw std::runtime_error("step_obstacle: singular active-set system");
    const Vector x = lu.solve(rhs);
    out.rho = x.head(n);
    out.mu = x.segment(n, n);
    out.multiplier = x.tail(n);
    for (int m = 0; m < n; ++m) {
      if (active[m] != 0)
        out.rho[m] = active[m];
      else
        out.multiplier[m] = 0.0;
    }

    std::vector<signed char> next(n, 0);
    for (int m = 0; m < n; ++m) {
      if (out.multiplier[m] + c * (out.rho[m] - 1.0) >= 0.0)
        next[m] = 1;
      else if (out.multiplier[m] + c * (out.rho[m] + 1.0) <= 0.0)
        next[m] = -1;
    }
    out.diag.pdas_sweeps = sweep;
    if (next == active) break;
    active = std::move(next);
  }
  out.active = active;
  out.diag.residual = 0.0;
  for (int m = 0; m < n; ++m) {
    if (active[m] > 0) ++out.diag.active_upper;
    if (active[m] < 0) ++out.diag.active_lower;
  }
  fill_range(out.diag, ops, out.rho);
  return out;
}

double StateSolution::max_abs_rho() const {
  double m = 0.0;
  for (const auto& r : rho) m = std::max(m, r.lpNorm<Eigen::Infinity>());
  return m;
}

double StateSolution::max_mean_drift() const {
  double d = 0.0;
  for (const auto& s : diagnostics) d = std::max(d, std::abs(s.mean - conserved_mean));
  return d;
}

StateSolution solve_forward(const StateModel& model, const PhysParams& phys, const Control& u, const ForwardMode& mode) {
  const GridOperators& ops = *model.ops;
  const int n = ops.geom.nodes();
  if (!phys.rho0.matches(ops.geom)) throw std::invalid_argument("solve_forward: initial data shape mismatch");
  if (!(u.geometry() == ops.geom) || u.levels() != phys.time.steps)
    throw std::invalid_argument("solve_forward: control does not match the discretization");
  const Vector rho0 = phys.rho0.bulk;
  const double lim = rho0.lpNorm<Eigen::Infinity>();
  if (mode.kind == StateMode::quench && !(lim < 1.0))
    throw std::invalid_argument("solve_forward: initial data must lie strictly inside (-1, 1)");
  if (mode.kind == StateMode::obstacle && !(lim <= 1.0))
    throw std::invalid_argument("solve_forward: initial data must lie in [-1, 1]");

  StateSolution sol;
  sol.mode = mode.kind;
  sol.quench = mode.quench;
  sol.time = phys.time;
  sol.conserved_mean = ops.mean_of_nodes(rho0);

  const Vector minv = ops.weights.lumped.cwiseInverse();
  Vector xi0 = Vector::Zero(n);
  if (mode.kind == StateMode::quench)
    for (int m = 0; m < n; ++m) xi0[m] = mode.quench.phi() * h_prime(rho0[m]);
  Vector mu0 = minv.cwiseProduct(ops.stiffness * rho0 + model.potential_load(rho0)) + xi0;

  sol.rho.push_back(rho0);
  sol.mu.push_back(mu0);
  sol.multiplier.push_back(xi0);
  sol.active.emplace_back(n, 0);
  StepDiagnostics d0;
  fill_range(d0, ops, rho0);
  sol.diagnostics.push_back(d0);

  const double dt = phys.time.dt();
  for (int k = 0; k < phys.time.steps; ++k) {
    const VelocityField vel = u.velocity(ops, k);
    StepResult step;
    try {
      if (mode.kind == StateMode::quench)
        step = step_quench(model, sol.rho.back(), sol.mu.back(), vel, mode.quench, dt);
      else
        step = step_obstacle(model, sol.rho.back(), sol.mu.back(), sol.multiplier.back(), sol.active.back(), vel, dt);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "forward step " << k + 1 << " failed";
      if (mode.kind == StateMode::quench)
        msg << " (alpha " << mode.quench.alpha << ", dt " << dt << ", gap to +-1 "
            << 1.0 - sol.rho.back().lpNorm<Eigen::Infinity>() << ")";
      msg << ": " << e.what();
      throw StepFailure(msg.str(), k + 1);
    }
    sol.rho.push_back(std::move(step.rho));
    sol.mu.push_back(std::move(step.mu));
    sol.multiplier.push_back(std::move(step.multiplier));
    sol.active.push_back(std::move(step.active));
    sol.diagnostics.push_back(step.diag);
  }
  return sol;
}

double l2Q_distance(const GridOperators& ops, const TimeGrid& time, const std::vector<Vector>& a,
                    const std::vector<Vector>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("l2Q_distance: trajectory lengths differ");
  double s = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    const Vector d = a[k] - b[k];
    s += time.dt() * ops.weights.bulk.dot(d.cwiseProduct(d));
  }
  return std::sqrt(s);
}

}  // namespace dqc
