#include "dqc/cost.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dqc {

CostSpec CostSpec::constant_targets(const StripGeometry& g, std::array<double, 5> beta, double c) {
  CostSpec s;
  s.beta = beta;
  const Vector t = Vector::Constant(g.nodes(), c);
  s.rho_Q = {t};
  s.rho_Sigma = {t};
  s.rho_Omega = t;
  s.rho_Gamma = t;
  return s;
}

std::vector<std::string> CostSpec::violations(const StripGeometry& g, int steps) const {
  std::vector<std::string> out;
  bool any = false;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (!(beta[i] >= 0.0) || !std::isfinite(beta[i])) {
      std::ostringstream m;
      m << "A4: beta" << i + 1 << " must be nonnegative (got " << beta[i] << ")";
      out.push_back(m.str());
    }
    any = any || beta[i] > 0.0;
  }
  if (!any) out.push_back("A4: cost weights must be nonnegative but not all zero");
  auto check_series = [&](const std::vector<Vector>& s, const char* name) {
    if (s.size() != 1 && static_cast<int>(s.size()) != steps) {
      out.push_back(std::string("A4: target ") + name + " needs 1 or " + std::to_string(steps) + " levels");
      return;
    }
    for (const auto& v : s)
      if (v.size() != g.nodes() || !v.allFinite()) {
        out.push_back(std::string("A4: target ") + name + " has the wrong shape or non-finite values");
        return;
      }
  };
  check_series(rho_Q, "rho_Q");
  check_series(rho_Sigma, "rho_Sigma");
  if (rho_Omega.size() != g.nodes() || !rho_Omega.allFinite())
    out.push_back("A4: target rho_Omega has the wrong shape or non-finite values");
  if (rho_Gamma.size() != g.nodes() || !rho_Gamma.allFinite())
    out.push_back("A4: target rho_Gamma has the wrong shape or non-finite values");
  return out;
}

void CostSpec::validate(const StripGeometry& g, int steps) const {
  const auto v = violations(g, steps);
  if (v.empty()) return;
  std::string msg = "invalid cost specification:";
  for (const auto& s : v) msg += "\n  " + s;
  throw std::invalid_argument(msg);
}

double velocity_l2Q_squared(const GridOperators& ops, const Control& u) {
  const double dt = u.time().dt();
  double s = 0.0;
  for (int k = 0; k < u.levels(); ++k) {
    const VelocityField v = u.velocity(ops, k);
    s += dt * (ops.weights.bulk.dot(v.ux.cwiseAbs2()) + ops.weights.bulk.dot(v.uy.cwiseAbs2()));
  }
  return s;
}

double evaluate_cost(const GridOperators& ops, const StateSolution& state, const Control& u, const CostSpec& cost,
                     const std::optional<Control>& anchor) {
  const int K = state.levels() - 1;
  if (K != u.levels()) throw std::invalid_argument("evaluate_cost: state and control have different step counts");
  const auto& W = ops.weights.bulk;
  const auto& S = ops.weights.surface;
  const auto& b = cost.beta;
  const double dt = state.time.dt();
  double j = 0.0;
  for (int k = 1; k <= K; ++k) {
    if (b[0] != 0.0) j += 0.5 * dt * b[0] * W.dot((state.rho[k] - cost.target_Q(k)).cwiseAbs2());
    if (b[1] != 0.0) j += 0.5 * dt * b[1] * S.dot((state.rho[k] - cost.target_Sigma(k)).cwiseAbs2());
  }
  if (b[2] != 0.0) j += 0.5 * b[2] * W.dot((state.rho[K] - cost.rho_Omega).cwiseAbs2());
  if (b[3] != 0.0) j += 0.5 * b[3] * S.dot((state.rho[K] - cost.rho_Gamma).cwiseAbs2());
  if (b[4] != 0.0) j += 0.5 * b[4] * velocity_l2Q_squared(ops, u);
  if (anchor) {
    if (!anchor->same_space(u)) throw std::invalid_argument("evaluate_cost: anchor lives in a different space");
    Control d = u;
    d.coeffs() -= anchor->coeffs();
    j += 0.5 * velocity_l2Q_squared(ops, d);
  }
  return j;
}

Vector cost_state_derivative(const GridOperators& ops, const StateSolution& state, const CostSpec& cost, int k) {
  const auto& W = ops.weights.bulk;
  const auto& S = ops.weights.surface;
  const auto& b = cost.beta;
  const double dt = state.time.dt();
  Vector g = dt * (b[0] * W.cwiseProduct(state.rho[k] - cost.target_Q(k)) +
                   b[1] * S.cwiseProduct(state.rho[k] - cost.target_Sigma(k)));
  if (k == state.levels() - 1) g += terminal_load(ops, state, cost);
  return g;
}

Vector terminal_load(const GridOperators& ops, const StateSolution& state, const CostSpec& cost) {
  const Vector& r = state.rho.back();
  return cost.beta[2] * ops.weights.bulk.cwiseProduct(r - cost.rho_Omega) +
         cost.beta[3] * ops.weights.surface.cwiseProduct(r - cost.rho_Gamma);
}

}  // namespace dqc
