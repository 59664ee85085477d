#pragma once

// Tracking-type cost with a quadratic control penalty, and its adapted
// variant with an extra proximity term to an anchor control.

#include "dqc/control.hpp"
#include "dqc/state.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace dqc {

struct CostSpec {
  /// beta1..beta5: space-time bulk, space-time boundary, final bulk, final
  /// boundary, control penalty.
  std::array<double, 5> beta{1.0, 0.0, 0.0, 0.0, 1e-3};
  /// Node vectors. The space-time targets hold either one vector (constant in
  /// time) or one per level 1..K. Boundary targets only use the wall rows.
  std::vector<Vector> rho_Q;
  std::vector<Vector> rho_Sigma;
  Vector rho_Omega;
  Vector rho_Gamma;

  /// All targets set to the constant c.
  static CostSpec constant_targets(const StripGeometry& g, std::array<double, 5> beta, double c);

  const Vector& target_Q(int level) const { return rho_Q.size() == 1 ? rho_Q[0] : rho_Q[level - 1]; }
  const Vector& target_Sigma(int level) const {
    return rho_Sigma.size() == 1 ? rho_Sigma[0] : rho_Sigma[level - 1];
  }

  /// Names of violated requirements; empty when valid.
  std::vector<std::string> violations(const StripGeometry& g, int steps) const;
  void validate(const StripGeometry& g, int steps) const;
};

/// L2(Q) norm of the nodal velocities, sum_k dt sum W |u_k|^2.
double velocity_l2Q_squared(const GridOperators& ops, const Control& u);

double evaluate_cost(const GridOperators& ops, const StateSolution& state, const Control& u, const CostSpec& cost,
                     const std::optional<Control>& anchor = std::nullopt);

/// dJ/drho^k for level k in 1..K, as a node covector.
Vector cost_state_derivative(const GridOperators& ops, const StateSolution& state, const CostSpec& cost, int k);

/// Terminal loads W beta3 (rho^K - target) + S beta4 (rho^K - target).
Vector terminal_load(const GridOperators& ops, const StateSolution& state, const CostSpec& cost);

}  // namespace dqc
