#include "dqc/experiments.hpp"

#include <doctest.h>

#include <numbers>

using namespace dqc;

namespace {

struct Fixture {
  StripGeometry g{3.0, 2.0, 8, 6};
  GridOperators ops{g};
  TimeGrid time{0.5, 5};

  Control shear(double c, double ub = 2.0, double r0 = 50.0) const {
    Control u(ControlMode::shear, g, time, ub, r0);
    u.coeffs().setConstant(c);
    return u;
  }
};

}  // namespace

TEST_SUITE("control") {

TEST_CASE("X norms of zero and constant controls") {
  const Fixture f;
  const XNorm z = x_norm(f.ops, f.shear(0.0));
  CHECK(z.l2 == 0.0);
  CHECK(z.linf == 0.0);
  CHECK(z.h1l3 == 0.0);
  CHECK(z.combined == 0.0);

  const double c = 0.7, area = f.g.area(), T = f.time.T;
  const XNorm n = x_norm(f.ops, f.shear(c));
  CHECK(n.l2 == doctest::Approx(c * std::sqrt(area * T)).epsilon(1e-13));
  CHECK(n.linf == doctest::Approx(c).epsilon(1e-14));
  CHECK(n.h1l3 == doctest::Approx(c * std::cbrt(area) * std::sqrt(T)).epsilon(1e-13));
  CHECK(n.combined == doctest::Approx(std::max({n.l2, n.linf, n.h1l3})));
}

TEST_CASE("X norm of a step in time") {
  // u = c on the last level only: one jump of size c, dt-scaled difference quotient
  const Fixture f;
  Control u = f.shear(0.0);
  const int K = f.time.steps;
  u.level(K - 1).setConstant(1.0);
  const double dt = f.time.dt(), l3 = std::cbrt(f.g.area());
  CHECK(x_norm(f.ops, u).h1l3 == doctest::Approx(std::sqrt(dt * l3 * l3 + dt * (l3 / dt) * (l3 / dt))).epsilon(1e-13));
}

TEST_CASE("shear metric is the L2(Q) product of velocities") {
  const Fixture f;
  Control u = f.shear(0.0);
  for (int m = 0; m < u.coeffs().size(); ++m) u.coeffs()[m] = std::sin(0.3 * m + 0.1);
  CHECK(control_inner(u, u) == doctest::Approx(velocity_l2Q_squared(f.ops, u)).epsilon(1e-13));
  CHECK(x_norm(f.ops, u).l2 == doctest::Approx(std::sqrt(velocity_l2Q_squared(f.ops, u))).epsilon(1e-13));
}

TEST_CASE("projection") {
  const Fixture f;
  const Control ok = f.shear(0.4);
  CHECK((project_Uad(f.ops, ok).coeffs() - ok.coeffs()).norm() == 0.0);
  const Control clipped = project_Uad(f.ops, f.shear(1.5, 1.0));
  CHECK((clipped.coeffs().array() - 1.0).abs().maxCoeff() == 0.0);
  CHECK_FALSE(clipped.approximate_projection());

  // norm cap: clip first, then scale onto the sphere
  Control big = f.shear(1.5, 1.0, 0.5);
  big.coeffs()[0] = -3.0;
  const Control p = project_Uad(f.ops, big);
  CHECK(x_norm(f.ops, p).combined == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(check_admissible(f.ops, p).admissible);
  CHECK(p.coeffs()[0] / p.coeffs()[1] == doctest::Approx(-1.0));
  const Control pp = project_Uad(f.ops, p);
  CHECK((pp.coeffs() - p.coeffs()).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("streamfunction controls are divergence free with zero normal trace") {
  const Fixture f;
  Control u(ControlMode::streamfunction, f.g, f.time, 5.0, 100.0);
  for (int m = 0; m < u.coeffs().size(); ++m) u.coeffs()[m] = 0.3 * std::cos(0.7 * m);
  const AdmissibilityReport r = check_admissible(f.ops, u);
  CHECK(r.max_divergence < 1e-12);
  CHECK(r.max_normal_trace == 0.0);
  Control fast = u;
  fast.coeffs() *= 50.0;
  const Control p = project_Uad(f.ops, fast);
  CHECK(p.approximate_projection());
  CHECK(check_admissible(f.ops, p).admissible);
}

TEST_CASE("cost: zero at the fixed point with zero control") {
  const Setup setup(preset("zero"));
  const StateSolution sol =
      solve_forward(setup.model(), setup.phys(), setup.zero_control(), setup.quench_mode(0.1));
  CHECK(evaluate_cost(setup.ops(), sol, setup.zero_control(), setup.cost()) == doctest::Approx(0.0).scale(1e-20));
}

TEST_CASE("cost: control penalty only") {
  const Setup setup(preset("zero"));
  CostSpec cost = setup.cost();
  cost.beta = {0.0, 0.0, 0.0, 0.0, 0.3};
  Control u = setup.zero_control();
  for (int m = 0; m < u.coeffs().size(); ++m) u.coeffs()[m] = 0.2 * std::sin(0.5 * m);
  const StateSolution sol = solve_forward(setup.model(), setup.phys(), u, setup.quench_mode(0.1));
  // (beta5 / 2) sum_k dt sum_j Lx hy c_j f_jk^2
  const StripGeometry& g = setup.geom();
  double s = 0.0;
  for (int k = 0; k < u.levels(); ++k)
    for (int j = 0; j <= g.Ny(); ++j) {
      const double c = (j == 0 || j == g.Ny()) ? 0.5 : 1.0;
      s += u.time().dt() * g.Lx() * g.hy() * c * u.shear(j, k) * u.shear(j, k);
    }
  CHECK(evaluate_cost(setup.ops(), sol, u, cost) == doctest::Approx(0.15 * s).epsilon(1e-13));
}

TEST_CASE("cost: adapted cost at its anchor equals the plain cost") {
  const Setup setup(preset("gradcheck"));
  const Control& u = setup.fixed_control();
  const StateSolution sol = solve_forward(setup.model(), setup.phys(), u, setup.quench_mode(0.1));
  const double plain = evaluate_cost(setup.ops(), sol, u, setup.cost());
  CHECK(evaluate_cost(setup.ops(), sol, u, setup.cost(), u) == plain);
  Control other = u;
  other.coeffs().array() += 0.1;
  CHECK(evaluate_cost(setup.ops(), sol, u, setup.cost(), other) > plain);
}

TEST_CASE("cost spec validation") {
  const StripGeometry g(3.0, 2.0, 8, 6);
  CHECK(CostSpec::constant_targets(g, {1, 0, 0, 0, 1}, 0.0).violations(g, 4).empty());
  CHECK_FALSE(CostSpec::constant_targets(g, {0, 0, 0, 0, 0}, 0.0).violations(g, 4).empty());
  CHECK_FALSE(CostSpec::constant_targets(g, {-1, 0, 0, 0, 1}, 0.0).violations(g, 4).empty());
}

TEST_CASE("gradient without state tracking is beta5 u") {
  ProblemSpec s = preset("gradcheck");
  s.beta = {0.0, 0.0, 0.0, 0.0, 0.7};
  const Setup setup(s);
  const GradientEvaluation ge = evaluate_with_gradient(setup.reduced(setup.quench_mode(0.1)), setup.fixed_control());
  CHECK((ge.gradient.coeffs() - 0.7 * setup.fixed_control().coeffs()).lpNorm<Eigen::Infinity>() < 1e-13);
  for (int k = 1; k < ge.adjoint.levels(); ++k) {
    CHECK(ge.adjoint.p[k].lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(ge.adjoint.q[k].lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("gradient ignores constant shifts of p") {
  const Setup setup(preset("gradcheck"));
  const AdjointStructure st =
      adjoint_structure(setup, setup.reduced(setup.quench_mode(0.1)), setup.fixed_control());
  CHECK(st.shift_invariance < 1e-12);
}

}
