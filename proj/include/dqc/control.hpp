#pragma once

// Admissible velocity controls: parameterisation, discrete X-norm and the
// projection onto the admissible set.

#include "dqc/grid.hpp"

#include <vector>

namespace dqc {

struct TimeGrid {
  double T = 1.0;
  int steps = 10;

  double dt() const { return T / steps; }
  double time(int k) const { return k * dt(); }
};

enum class ControlMode { shear, streamfunction };

/// Nodal velocity at one time level.
struct VelocityField {
  Vector ux;
  Vector uy;
};

/// A velocity control on `steps` time levels; level k (0-based) drives the
/// implicit step from t_k to t_{k+1}.
///
/// Shear mode stores f(y_j, t) so that u = (f, 0). Streamfunction mode stores
/// psi on the interior rows plus the constant value on the top wall (psi = 0
/// on the bottom wall) and sets u = (Dy psi, -Dx psi).
class Control {
public:
  Control() = default;
  Control(ControlMode mode, const StripGeometry& geom, const TimeGrid& time, double u_bar, double r0);

  static Control zero_like(const Control& c) {
    Control z = c;
    z.coeffs_.setZero();
    return z;
  }

  ControlMode mode() const { return mode_; }
  const StripGeometry& geometry() const { return geom_; }
  const TimeGrid& time() const { return time_; }
  double u_bar() const { return u_bar_; }
  double r0() const { return r0_; }
  bool approximate_projection() const { return approximate_; }
  void set_approximate_projection(bool a) { approximate_ = a; }

  int dofs_per_level() const;
  int levels() const { return time_.steps; }
  Vector& coeffs() { return coeffs_; }
  const Vector& coeffs() const { return coeffs_; }
  Eigen::Map<Vector> level(int k) { return {coeffs_.data() + k * dofs_per_level(), dofs_per_level()}; }
  Eigen::Map<const Vector> level(int k) const { return {coeffs_.data() + k * dofs_per_level(), dofs_per_level()}; }

  /// Shear profile value f(y_j) at level k.
  double& shear(int j, int k) { return coeffs_[k * dofs_per_level() + j]; }
  double shear(int j, int k) const { return coeffs_[k * dofs_per_level() + j]; }

  /// Node vector of psi at level k (streamfunction mode).
  Vector streamfunction(int k) const;

  VelocityField velocity(const GridOperators& ops, int k) const;
  std::vector<VelocityField> velocities(const GridOperators& ops) const;

  /// Per-dof weights w with <a, b> = sum w a b. In shear mode this is the
  /// exact L2(Q) inner product of the velocities.
  Vector metric_weights() const;

  /// Pulls a nodal covector (dJ/du_x, dJ/du_y per level) back to dJ/dcoeffs.
  Vector pull_back(const GridOperators& ops, const std::vector<VelocityField>& covector) const;

  bool same_space(const Control& o) const {
    return mode_ == o.mode_ && geom_ == o.geom_ && time_.steps == o.time_.steps && time_.T == o.time_.T;
  }

private:
  ControlMode mode_ = ControlMode::shear;
  StripGeometry geom_;
  TimeGrid time_;
  double u_bar_ = 1.0;
  double r0_ = 1.0;
  bool approximate_ = false;
  Vector coeffs_;
};

double control_inner(const Control& a, const Control& b);
double control_norm(const Control& a);

struct XNorm {
  double l2 = 0.0;
  double linf = 0.0;
  double h1l3 = 0.0;
  double combined = 0.0;
};

/// Discrete norms of L2(0,T;L2), L-infinity and H1(0,T;L3). Time difference
/// quotients start at the second level (u at t = 0 is taken equal to the
/// first level).
XNorm x_norm(const GridOperators& ops, const Control& u);

/// Projection onto the admissible set. Exact clip-and-scale in shear mode;
/// streamfunction mode rescales levels and is flagged approximate.
Control project_Uad(const GridOperators& ops, const Control& u_trial);

struct AdmissibilityReport {
  double max_divergence = 0.0;
  double max_normal_trace = 0.0;
  double max_speed = 0.0;
  XNorm norm;
  bool admissible = false;
};

AdmissibilityReport check_admissible(const GridOperators& ops, const Control& u, double tol = 1e-12);

}  // namespace dqc
