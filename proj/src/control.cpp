#include "dqc/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dqc {

Control::Control(ControlMode mode, const StripGeometry& geom, const TimeGrid& time, double u_bar, double r0)
    : mode_(mode), geom_(geom), time_(time), u_bar_(u_bar), r0_(r0) {
  if (time.steps < 1 || !(time.T > 0.0)) throw std::invalid_argument("Control: invalid time grid");
  if (!(u_bar > 0.0) || !(r0 > 0.0)) throw std::invalid_argument("Control: bounds must be positive");
  coeffs_ = Vector::Zero(static_cast<Eigen::Index>(dofs_per_level()) * time.steps);
}

int Control::dofs_per_level() const {
  return mode_ == ControlMode::shear ? geom_.Ny() + 1 : geom_.Nx() * (geom_.Ny() - 1) + 1;
}

Vector Control::streamfunction(int k) const {
  if (mode_ != ControlMode::streamfunction) throw std::logic_error("Control: not a streamfunction control");
  const auto c = level(k);
  const int nx = geom_.Nx(), ny = geom_.Ny();
  Vector psi = Vector::Zero(geom_.nodes());
  psi.segment(nx, nx * (ny - 1)) = c.head(nx * (ny - 1));
  psi.tail(nx).setConstant(c[nx * (ny - 1)]);
  return psi;
}

VelocityField Control::velocity(const GridOperators& ops, int k) const {
  VelocityField u;
  const int nx = geom_.Nx();
  if (mode_ == ControlMode::shear) {
    u.ux.resize(geom_.nodes());
    for (int j = 0; j <= geom_.Ny(); ++j) u.ux.segment(j * nx, nx).setConstant(shear(j, k));
    u.uy = Vector::Zero(geom_.nodes());
  } else {
    const Vector psi = streamfunction(k);
    u.ux = ops.dy * psi;
    u.uy = -(ops.dx * psi);
  }
  return u;
}

std::vector<VelocityField> Control::velocities(const GridOperators& ops) const {
  std::vector<VelocityField> out;
  out.reserve(levels());
  for (int k = 0; k < levels(); ++k) out.push_back(velocity(ops, k));
  return out;
}

Vector Control::metric_weights() const {
  Vector w(coeffs_.size());
  const double dt = time_.dt();
  const int d = dofs_per_level();
  for (int k = 0; k < levels(); ++k) {
    if (mode_ == ControlMode::shear) {
      for (int j = 0; j <= geom_.Ny(); ++j) {
        const double c = (j == 0 || j == geom_.Ny()) ? 0.5 : 1.0;
        w[k * d + j] = dt * geom_.Lx() * geom_.hy() * c;
      }
    } else {
      w.segment(k * d, d).setConstant(dt * geom_.hx() * geom_.hy());
    }
  }
  return w;
}

Vector Control::pull_back(const GridOperators& ops, const std::vector<VelocityField>& cov) const {
  if (static_cast<int>(cov.size()) != levels()) throw std::invalid_argument("pull_back: wrong number of levels");
  Vector out(coeffs_.size());
  const int d = dofs_per_level();
  const int nx = geom_.Nx(), ny = geom_.Ny();
  for (int k = 0; k < levels(); ++k) {
    if (mode_ == ControlMode::shear) {
      for (int j = 0; j <= ny; ++j) out[k * d + j] = cov[k].ux.segment(j * nx, nx).sum();
    } else {
      const Vector gpsi = ops.dy.transpose() * cov[k].ux - ops.dx.transpose() * cov[k].uy;
      out.segment(k * d, nx * (ny - 1)) = gpsi.segment(nx, nx * (ny - 1));
      out[k * d + nx * (ny - 1)] = gpsi.tail(nx).sum();
    }
  }
  return out;
}

double control_inner(const Control& a, const Control& b) {
  if (!a.same_space(b)) throw std::invalid_argument("control_inner: controls live in different spaces");
  return a.metric_weights().dot(a.coeffs().cwiseProduct(b.coeffs()));
}

double control_norm(const Control& a) { return std::sqrt(std::max(0.0, control_inner(a, a))); }

namespace {

double l3_norm(const QuadratureWeights& w, const Vector& ux, const Vector& uy) {
  double s = 0.0;
  for (Eigen::Index m = 0; m < ux.size(); ++m) {
    const double speed = std::hypot(ux[m], uy[m]);
    s += w.bulk[m] * speed * speed * speed;
  }
  return std::cbrt(s);
}

}  // namespace

namespace {

// Shear velocities are constant along rows, so every norm reduces to sums
// over rows with weights Lx hy c_j.
XNorm shear_x_norm(const Control& u) {
  XNorm out;
  const StripGeometry& g = u.geometry();
  const double dt = u.time().dt();
  const int ny = g.Ny();
  double l2 = 0.0, l3sq = 0.0, dl3sq = 0.0;
  for (int k = 0; k < u.levels(); ++k) {
    double l3 = 0.0, d3 = 0.0;
    for (int j = 0; j <= ny; ++j) {
      const double w = g.Lx() * g.hy() * ((j == 0 || j == ny) ? 0.5 : 1.0);
      const double f = std::abs(u.shear(j, k));
      l2 += dt * w * f * f;
      l3 += w * f * f * f;
      out.linf = std::max(out.linf, f);
      if (k > 0) {
        const double d = std::abs(u.shear(j, k) - u.shear(j, k - 1)) / dt;
        d3 += w * d * d * d;
      }
    }
    l3sq += dt * std::pow(std::cbrt(l3), 2);
    if (k > 0) dl3sq += dt * std::pow(std::cbrt(d3), 2);
  }
  out.l2 = std::sqrt(l2);
  out.h1l3 = std::sqrt(l3sq + dl3sq);
  out.combined = std::max({out.l2, out.linf, out.h1l3});
  return out;
}

}  // namespace

XNorm x_norm(const GridOperators& ops, const Control& u) {
  if (u.mode() == ControlMode::shear) return shear_x_norm(u);
  XNorm out;
  const double dt = u.time().dt();
  double l2 = 0.0, l3sq = 0.0, dl3sq = 0.0;
  VelocityField prev;
  for (int k = 0; k < u.levels(); ++k) {
    VelocityField v = u.velocity(ops, k);
    for (Eigen::Index m = 0; m < v.ux.size(); ++m) {
      const double s2 = v.ux[m] * v.ux[m] + v.uy[m] * v.uy[m];
      l2 += dt * ops.weights.bulk[m] * s2;
      out.linf = std::max(out.linf, std::sqrt(s2));
    }
    const double l3 = l3_norm(ops.weights, v.ux, v.uy);
    l3sq += dt * l3 * l3;
    if (k > 0) {
      const double d = l3_norm(ops.weights, (v.ux - prev.ux) / dt, (v.uy - prev.uy) / dt);
      dl3sq += dt * d * d;
    }
    prev = std::move(v);
  }
  out.l2 = std::sqrt(l2);
  out.h1l3 = std::sqrt(l3sq + dl3sq);
  out.combined = std::max({out.l2, out.linf, out.h1l3});
  return out;
}

Control project_Uad(const GridOperators& ops, const Control& u_trial) {
  Control u = u_trial;
  const double ub = u.u_bar();
  if (u.mode() == ControlMode::shear) {
    u.coeffs() = u.coeffs().cwiseMax(-ub).cwiseMin(ub);
    const double nrm = x_norm(ops, u).combined;
    if (nrm > u.r0()) u.coeffs() *= u.r0() / nrm;
    u.set_approximate_projection(false);
    return u;
  }
  // Streamfunction: shrink offending levels, then apply the norm cap. Two
  // passes; the second is a no-op unless rounding pushed a level back over.
  for (int pass = 0; pass < 2; ++pass) {
    for (int k = 0; k < u.levels(); ++k) {
      const VelocityField v = u.velocity(ops, k);
      double vmax = 0.0;
      for (Eigen::Index m = 0; m < v.ux.size(); ++m) vmax = std::max(vmax, std::hypot(v.ux[m], v.uy[m]));
      if (vmax > ub) u.level(k) *= ub / vmax;
    }
    const double nrm = x_norm(ops, u).combined;
    if (nrm > u.r0()) u.coeffs() *= u.r0() / nrm;
  }
  u.set_approximate_projection(true);
  return u;
}

AdmissibilityReport check_admissible(const GridOperators& ops, const Control& u, double tol) {
  AdmissibilityReport r;
  const auto& g = ops.geom;
  // Shear flows are divergence free with zero normal trace by construction.
  if (u.mode() == ControlMode::shear) r.max_speed = u.coeffs().lpNorm<Eigen::Infinity>();
  for (int k = 0; k < u.levels() && u.mode() != ControlMode::shear; ++k) {
    const VelocityField v = u.velocity(ops, k);
    const Vector div = ops.dx * v.ux + ops.dy * v.uy;
    r.max_divergence = std::max(r.max_divergence, div.lpNorm<Eigen::Infinity>());
    r.max_normal_trace = std::max({r.max_normal_trace, v.uy.head(g.Nx()).lpNorm<Eigen::Infinity>(),
                                   v.uy.tail(g.Nx()).lpNorm<Eigen::Infinity>()});
    for (Eigen::Index m = 0; m < v.ux.size(); ++m) r.max_speed = std::max(r.max_speed, std::hypot(v.ux[m], v.uy[m]));
  }
  r.norm = x_norm(ops, u);
  const double scale = std::max(1.0, r.max_speed);
  r.admissible = r.max_divergence <= tol * scale && r.max_normal_trace == 0.0 &&
                 r.max_speed <= u.u_bar() * (1.0 + tol) && r.norm.combined <= u.r0() * (1.0 + tol);
  return r;
}

}  // namespace dqc
