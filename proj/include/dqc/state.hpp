#pragma once

// Implicit Euler stepping of the convective viscous Cahn-Hilliard system with
// dynamic boundary conditions. All equations are posed on the node vector in
// mass-lumped weak form
//
//   M (rho' - rho)/dt + A(u) rho' + K mu' = 0
//   tau M (rho' - rho)/dt + K rho' + M xi' + P_pi(rho) = M mu'
//
// with xi' = phi(alpha) h'(rho') (quench) or xi' in dI_[-1,1](rho') (obstacle).

#include "dqc/control.hpp"
#include "dqc/linops.hpp"
#include "dqc/potentials.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace dqc {

struct PhysParams {
  double tau = 1.0;
  TimeGrid time;
  FieldPaird rho0;
};

struct StateOptions {
  NewtonOptions newton;
  int pdas_max_sweeps = 50;
  /// Active-set parameter c in xi + c (rho -+ 1).
  double pdas_c = 1.0;
  /// Half-width of the Newton feasibility box is 1 - box_guard.
  double box_guard = 1e-12;
};

/// Everything the step solvers need besides the data of one step.
struct StateModel {
  const GridOperators* ops = nullptr;
  double tau = 1.0;
  SmoothPotential pi = SmoothPotential::classical();
  SmoothPotential pi_gamma = SmoothPotential::classical();
  StateOptions options;

  /// W pi(rho) + S pi_Gamma(rho) with W, S the bulk and surface weights.
  Vector potential_load(const Vector& rho) const;
  /// W pi'(rho) + S pi_Gamma'(rho)
  Vector potential_load_derivative(const Vector& rho) const;
};

enum class StateMode { quench, obstacle };

struct ForwardMode {
  StateMode kind = StateMode::quench;
  QuenchParams quench;

  static ForwardMode quenched(const QuenchParams& q) { return {StateMode::quench, q}; }
  static ForwardMode obstacle() { return {StateMode::obstacle, QuenchParams{}}; }
};

/// diag(W) (Dx diag(ux) + Dy diag(uy)): the flux-form convection operator.
SparseMatrix convection_matrix(const GridOperators& ops, const VelocityField& u);

struct StepDiagnostics {
  int newton_iterations = 0;
  int pdas_sweeps = 0;
  double residual = 0.0;
  double min_rho = 0.0;
  double max_rho = 0.0;
  double mean = 0.0;
  int active_upper = 0;
  int active_lower = 0;
};

struct StepResult {
  Vector rho;
  Vector mu;
  Vector multiplier;
  std::vector<signed char> active;  // -1, 0, +1 per node (obstacle mode)
  StepDiagnostics diag;
};

class StepFailure : public std::runtime_error {
public:
  StepFailure(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

private:
  int step_;
};

StepResult step_quench(const StateModel& model, const Vector& rho_prev, const Vector& mu_prev,
                       const VelocityField& u, const QuenchParams& q, double dt);

StepResult step_obstacle(const StateModel& model, const Vector& rho_prev, const Vector& mu_prev,
                         const Vector& xi_prev, const std::vector<signed char>& active_prev, const VelocityField& u,
                         double dt);

struct StateSolution {
  StateMode mode = StateMode::quench;
  QuenchParams quench;
  TimeGrid time;
  std::vector<Vector> rho;         // levels 0..K
  std::vector<Vector> mu;          // levels 0..K
  std::vector<Vector> multiplier;  // levels 0..K
  std::vector<std::vector<signed char>> active;
  std::vector<StepDiagnostics> diagnostics;  // levels 0..K
  double conserved_mean = 0.0;

  int levels() const { return static_cast<int>(rho.size()); }
  double max_abs_rho() const;
  double max_mean_drift() const;
  /// 1 - max |rho| over the trajectory.
  double separation_gap() const { return 1.0 - max_abs_rho(); }
};

StateSolution solve_forward(const StateModel& model, const PhysParams& phys, const Control& u, const ForwardMode& mode);

/// sqrt(sum_k dt int_Omega |a_k - b_k|^2) over levels 1..K.
double l2Q_distance(const GridOperators& ops, const TimeGrid& time, const std::vector<Vector>& a,
                    const std::vector<Vector>& b);

}  // namespace dqc
