#pragma once

// Backward sweep for the exact discrete adjoint of the forward scheme in
// state.hpp. With p, q the multipliers of the two step equations (sign
// flipped), step k solves
//
//   (M + dt A_k^T) p_k + (tau M + dt K + dt M c_k) q_k
//       = dJ/drho^k + M (p_{k+1} + tau q_{k+1}) - dt diag(P_pi'(rho^k)) q_{k+1}
//   K p_k = M q_k
//
// with c_k = phi(alpha) h''(rho^k) and p_{K+1} = q_{K+1} = 0. In limit mode
// the first row is replaced by q = 0 on the contact nodes of step k.

#include "dqc/cost.hpp"
#include "dqc/linops.hpp"
#include "dqc/state.hpp"

#include <optional>
#include <vector>

namespace dqc {

struct AdjointDiagnostics {
  double mean_q = 0.0;
  double norm_q = 0.0;         // H norm
  double norm_Nq = 0.0;        // V0 norm of N q
  double norm_Nq_tau_q = 0.0;  // H norm of N q + tau q
  double curvature_norm = 0.0;
  /// max |K p - M q| / (|K| |p| + |M| |q|)
  double stiffness_residual = 0.0;
};

struct TerminalData {
  Vector phi_Omega;  // beta3 (rho^K - target), node vector
  Vector phi_Gamma;  // beta4 (rho^K - target), wall rows only
};

struct AdjointSolution {
  StateMode mode = StateMode::quench;
  QuenchParams quench;
  double epsilon = 0.0;
  /// Levels 0..K; level 0 is unused and left at zero.
  std::vector<Vector> p;
  std::vector<Vector> q;
  /// Discrete bulk gradient of p per level: (Dx p, -W^-1 Dy^T W p).
  std::vector<Vector> eta_x;
  std::vector<Vector> eta_y;
  TerminalData terminal;
  std::vector<AdjointDiagnostics> diagnostics;

  int levels() const { return static_cast<int>(p.size()); }
};

AdjointSolution solve_adjoint(const StateModel& model, const StateSolution& state, const CostSpec& cost,
                              const Control& u);

/// Backward sweep with an extra eps dt-derivative of p in the second equation,
/// p(T) = 0 and tau M q(T) equal to the terminal load. Requires eps in (0, 1].
AdjointSolution solve_adjoint_eps(const StateModel& model, const StateSolution& state, const CostSpec& cost,
                                  const Control& u, double eps);

struct Representation {
  FieldPaird Nq;
  /// Mean of p (quench mode only); p = N q + mean.
  std::optional<double> mean_p;
};

/// Recovers N q for one level and, given the stored p in quench mode, its mean.
Representation representation_p_from_q(const NOperator& N, const Vector& q, const Vector* p = nullptr);

/// Fills the N-based entries of adj.diagnostics.
void adjoint_diagnostics(const NOperator& N, const StateModel& model, const StateSolution& state,
                         AdjointSolution& adj);

/// sqrt(sum_k dt ||phi h''(rho^k) q^k||_*^2) with the dual norm taken as
/// ||N(g - mean g)||_V0^2 + (|Omega| + |Gamma|) mean(g)^2.
double quench_curvature_norm(const NOperator& N, const StateSolution& state, const AdjointSolution& adj);

/// sqrt(sum_k dt (|p_k - p'_k|_H^2 + |q_k - q'_k|_H^2))
double adjoint_l2Q_distance(const GridOperators& ops, const TimeGrid& time, const AdjointSolution& a,
                            const AdjointSolution& b);

}  // namespace dqc
