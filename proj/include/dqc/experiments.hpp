#pragma once

// Checks and studies shared by the command line tool and the acceptance
// suite. Each returns plain numbers; pass/fail thresholds live with callers.

#include "dqc/config.hpp"

#include <cstdint>
#include <vector>

namespace dqc {

/// Random node vector with entries uniform in (-1, 1).
Vector random_nodes(const StripGeometry& g, std::uint64_t seed);
/// Random pair whose traces are drawn independently of the bulk.
FieldPaird random_pair(const StripGeometry& g, std::uint64_t seed);
/// Shifts a pair to generalized mean zero.
FieldPaird remove_mean(const StripGeometry& g, FieldPaird v);

/// |sum W Lap(v) w - sum_Gamma hx (dnu v - Lap_Gamma v) w + a(v, w)| relative
/// to the size of the three terms.
double sbp_residual(const StripGeometry& g, const FieldPaird& v, const FieldPaird& w);

struct NOperatorSample {
  double symmetry = 0.0;  // |<g1, N g2> - <N g1, g2>| / scale
  double identity = 0.0;  // |<g, N g> - |N g|_V0^2| / scale
  double sbp = 0.0;
};

std::vector<NOperatorSample> noperator_check(const GridOperators& ops, std::uint64_t seed, int samples = 10);

struct GradcheckEntry {
  int direction = 0;
  double adjoint = 0.0;
  double fd = 0.0;
  double best_step = 0.0;
  double rel_err = 0.0;
};

struct GradcheckReport {
  double cost = 0.0;
  std::vector<GradcheckEntry> entries;
  double max_rel_err = 0.0;
};

inline const std::vector<double>& fd_steps() {
  static const std::vector<double> s{1e-4, 1e-5, 1e-6, 1e-7};
  return s;
}

/// Adjoint directional derivatives against central differences along random
/// directions, at a random admissible control. Each direction keeps the best
/// step of fd_steps().
GradcheckReport gradcheck(const Setup& setup, const ReducedProblem& prob, std::uint64_t seed, int directions);

struct AdjointStructure {
  double max_stiffness_residual = 0.0;
  double max_abs_mean_q = 0.0;
  /// max over levels of |p - mean p - N q|_inf / |p - mean p|_inf (quench mode)
  double max_representation_error = 0.0;
  /// Gradient change when a constant is added to every p level, relative.
  double shift_invariance = 0.0;
};

AdjointStructure adjoint_structure(const Setup& setup, const ReducedProblem& prob, const Control& u);

struct AlphaStudyEntry {
  double alpha = 0.0;
  double dist_to_obstacle = 0.0;
  double probe_cost_gap = 0.0;
  double separation_gap = 0.0;
  double max_mean_drift = 0.0;
};

struct AlphaStudy {
  double obstacle_max_abs = 0.0;
  double obstacle_cost = 0.0;
  std::vector<AlphaStudyEntry> entries;
};

/// Quench solves for the fixed control along the schedule against the
/// obstacle solve for the same control.
AlphaStudy alpha_study(const Setup& setup, const std::vector<double>& alphas);

struct ComplementarityReport {
  int nodes_checked = 0;
  int violations = 0;
  int active_upper = 0;
  int active_lower = 0;
  double max_abs_rho = 0.0;
};

ComplementarityReport obstacle_complementarity(const StateSolution& s);

struct TimeConvergence {
  std::vector<int> steps;       // K, 2K
  std::vector<double> errors;   // terminal L2 error vs the 8K reference
  double rate = 0.0;
};

TimeConvergence time_convergence(const ProblemSpec& spec, double alpha);

}  // namespace dqc
