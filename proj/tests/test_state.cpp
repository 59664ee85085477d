#include "dqc/experiments.hpp"

#include <doctest.h>

using namespace dqc;

namespace {

ProblemSpec homogeneous(double c) {
  ProblemSpec s = preset("zero");
  s.initial.value = c;
  s.target.value = c;
  return s;
}

double row_average(const StripGeometry& g, const Vector& v, int j) {
  double a = 0.0;
  for (int i = 0; i < g.Nx(); ++i) a += v[g.index(i, j)];
  return a / g.Nx();
}

}  // namespace

TEST_SUITE("state") {

TEST_CASE("homogeneous fixed point, quench mode") {
  const double c = 0.3, alpha = 0.05;
  const Setup setup(homogeneous(c));
  const StateSolution sol = solve_forward(setup.model(), setup.phys(), setup.zero_control(), setup.quench_mode(alpha));
  const double mu = alpha * h_prime(c) - c;  // pi(y) = -y
  for (int k = 0; k < sol.levels(); ++k) {
    CHECK((sol.rho[k].array() - c).abs().maxCoeff() < 1e-13);
    CHECK((sol.mu[k].array() - mu).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("homogeneous fixed point, obstacle mode") {
  const double c = -0.4;
  const Setup setup(homogeneous(c));
  const StateSolution sol = solve_forward(setup.model(), setup.phys(), setup.zero_control(), ForwardMode::obstacle());
  for (int k = 1; k < sol.levels(); ++k) {
    CHECK((sol.rho[k].array() - c).abs().maxCoeff() < 1e-13);
    CHECK((sol.mu[k].array() + c).abs().maxCoeff() < 1e-12);
    CHECK(sol.multiplier[k].lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("mean is conserved under shear") {
  ProblemSpec s = preset("gradcheck");
  s.control.amplitude = 1.5;
  const Setup setup(s);
  for (const ForwardMode& mode : {setup.quench_mode(0.1), setup.quench_mode(1e-3), ForwardMode::obstacle()}) {
    const StateSolution sol = solve_forward(setup.model(), setup.phys(), setup.fixed_control(), mode);
    CHECK(sol.max_mean_drift() <= 1e-12);
    CHECK(sol.conserved_mean == doctest::Approx(setup.ops().mean_of_nodes(sol.rho[0])));
  }
}

TEST_CASE("shear advects stripes without changing row averages") {
  ProblemSpec s = preset("gradcheck");
  s.control.initial = "couette";
  s.control.amplitude = 0.8;
  const Setup setup(s);
  const StateSolution sol = solve_forward(setup.model(), setup.phys(), setup.fixed_control(), setup.quench_mode(0.1));
  const StripGeometry& g = setup.geom();
  double drift = 0.0;
  for (int k = 1; k < sol.levels(); ++k)
    for (int j = 0; j <= g.Ny(); ++j)
      drift = std::max(drift, std::abs(row_average(g, sol.rho[k], j) - row_average(g, sol.rho[0], j)));
  CHECK(drift < 1e-12);
  // the pattern itself moves
  CHECK((sol.rho.back() - sol.rho.front()).lpNorm<Eigen::Infinity>() > 1e-2);
}

TEST_CASE("convection has zero row sums in flux form") {
  const Setup setup(preset("gradcheck"));
  const StripGeometry& g = setup.geom();
  const SparseMatrix A = convection_matrix(setup.ops(), setup.fixed_control().velocity(setup.ops(), 0));
  const Vector rho = random_nodes(g, 3);
  const Vector flux = A * rho;
  for (int j = 0; j <= g.Ny(); ++j) CHECK(std::abs(row_average(g, flux, j)) < 1e-14);
}

TEST_CASE("obstacle without contact matches a deep quench") {
  const Setup setup(preset("gradcheck"));
  const StateSolution ob = solve_forward(setup.model(), setup.phys(), setup.fixed_control(), ForwardMode::obstacle());
  const StateSolution qu = solve_forward(setup.model(), setup.phys(), setup.fixed_control(), setup.quench_mode(1e-6));
  CHECK(ob.max_abs_rho() < 1.0);
  double diff = 0.0;
  for (int k = 1; k < ob.levels(); ++k) {
    CHECK(ob.multiplier[k].lpNorm<Eigen::Infinity>() == 0.0);
    diff = std::max(diff, (ob.rho[k] - qu.rho[k]).lpNorm<Eigen::Infinity>());
  }
  CHECK(diff < 1e-5);
}

TEST_CASE("manufactured contact") {
  const Setup setup(preset("contact"));
  const StateSolution sol = solve_forward(setup.model(), setup.phys(), setup.fixed_control(), ForwardMode::obstacle());
  const ComplementarityReport c = obstacle_complementarity(sol);
  CHECK(c.active_upper > 0);
  CHECK(c.active_lower > 0);
  CHECK(c.violations == 0);
  CHECK(c.max_abs_rho == 1.0);

  // One node by hand: the second step equation divided by the lumped mass
  // determines xi from the other unknowns.
  const GridOperators& ops = setup.ops();
  const Vector& M = ops.weights.lumped;
  const double dt = sol.time.dt();
  int k_hit = -1, m_hit = -1;
  for (int k = 1; k < sol.levels() && k_hit < 0; ++k)
    for (int m = 0; m < sol.rho[k].size(); ++m)
      if (sol.rho[k][m] == 1.0) {
        k_hit = k;
        m_hit = m;
        break;
      }
  REQUIRE(k_hit > 0);
  const Vector Krho = ops.stiffness * sol.rho[k_hit];
  const Vector load = setup.model().potential_load(sol.rho[k_hit - 1]);
  auto xi_by_hand = [&](int m) {
    return sol.mu[k_hit][m] - setup.phys().tau * (sol.rho[k_hit][m] - sol.rho[k_hit - 1][m]) / dt -
           (Krho[m] + load[m]) / M[m];
  };
  CHECK(sol.multiplier[k_hit][m_hit] >= 0.0);
  CHECK(xi_by_hand(m_hit) == doctest::Approx(sol.multiplier[k_hit][m_hit]).epsilon(1e-8).scale(1.0));
  for (int m = 0; m < sol.rho[k_hit].size(); ++m)
    if (std::abs(sol.rho[k_hit][m]) < 1.0) {
      CHECK(sol.multiplier[k_hit][m] == 0.0);
      CHECK(std::abs(xi_by_hand(m)) < 1e-8);
      break;
    }
}

TEST_CASE("quench states approach the obstacle state") {
  const Setup setup(preset("gradcheck"));
  const AlphaStudy st = alpha_study(setup, {1e-1, 1e-2, 1e-3, 1e-4, 1e-5});
  for (std::size_t n = 1; n < st.entries.size(); ++n)
    CHECK(st.entries[n].dist_to_obstacle < st.entries[n - 1].dist_to_obstacle);
  for (const auto& e : st.entries) {
    CHECK(e.separation_gap > 0.0);
    CHECK(e.max_mean_drift <= 1e-10);
  }
}

TEST_CASE("first order in time") {
  const TimeConvergence tc = time_convergence(preset("gradcheck"), 0.1);
  CHECK(tc.errors[1] < tc.errors[0]);
  CHECK(tc.rate > 0.7);
  CHECK(tc.rate < 1.3);
}

TEST_CASE("step failures carry the step index") {
  ProblemSpec s = preset("gradcheck");
  s.solver.newton_max_iter = 1;
  const Setup setup(s);
  try {
    solve_forward(setup.model(), setup.phys(), setup.fixed_control(), setup.quench_mode(1e-3));
    FAIL("expected a step failure");
  } catch (const StepFailure& e) {
    CHECK(e.step() == 1);
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);
  }
}

TEST_CASE("initial data must lie strictly inside the bounds") {
  const Setup setup(preset("gradcheck"));
  PhysParams phys = setup.phys();
  phys.rho0 = FieldPaird::constant(setup.geom(), 1.0);
  CHECK_THROWS(solve_forward(setup.model(), phys, setup.fixed_control(), setup.quench_mode(0.1)));
}

}
