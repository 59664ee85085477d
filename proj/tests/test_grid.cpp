#include "dqc/grid.hpp"

#include <doctest.h>

#include <numbers>

using namespace dqc;

namespace {

const double pi = std::numbers::pi;

double max_abs(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("node layout and weights") {
  const StripGeometry g(2.0, 1.0, 8, 4);
  CHECK(g.nodes() == 8 * 5);
  CHECK(g.index(-1, 2) == g.index(7, 2));
  CHECK(g.on_boundary(g.index(3, 0)));
  CHECK(g.on_boundary(g.index(3, 4)));
  CHECK_FALSE(g.on_boundary(g.index(3, 2)));
  const QuadratureWeights w(g);
  CHECK(w.bulk.sum() == doctest::Approx(g.area()).epsilon(1e-14));
  CHECK(w.surface.sum() == doctest::Approx(g.boundary_length()).epsilon(1e-14));
  CHECK(w.lumped.sum() == doctest::Approx(g.area() + g.boundary_length()).epsilon(1e-14));
}

TEST_CASE("laplacian of a constant pair vanishes") {
  const StripGeometry g(3.0, 2.0, 12, 6);
  CHECK(max_abs(laplacian_bulk(g, FieldPaird::constant(g, 0.7))) < 1e-12);
}

TEST_CASE("laplacian on an x Fourier mode") {
  const StripGeometry g(4.0, 2.0, 16, 8);
  const double k = 2.0 * pi / g.Lx();
  const FieldPaird v = FieldPaird::sample(g, [&](double x, double) { return std::cos(k * x); });
  const double lambda = 2.0 * (1.0 - std::cos(k * g.hx())) / (g.hx() * g.hx());
  const Vector lap = laplacian_bulk(g, v);
  CHECK(max_abs(lap + lambda * v.bulk) < 1e-12);
  // the discrete eigenvalue approaches the continuous one at second order
  CHECK(std::abs(lambda - k * k) / (k * k) < k * k * g.hx() * g.hx() / 12.0 * 1.01);
}

TEST_CASE("laplacian of a linear profile in y") {
  const StripGeometry g(2.0, 1.0, 8, 6);
  const FieldPaird v = FieldPaird::sample(g, [](double, double y) { return y; });
  const Vector lap = laplacian_bulk(g, v);
  for (int j = 1; j < g.Ny(); ++j)
    for (int i = 0; i < g.Nx(); ++i) CHECK(std::abs(lap[g.index(i, j)]) < 1e-12);
  // on the walls the half-cell difference and the normal flux cancel
  for (int i = 0; i < g.Nx(); ++i) {
    CHECK(std::abs(lap[g.index(i, 0)]) < 1e-12);
    CHECK(std::abs(lap[g.index(i, g.Ny())]) < 1e-12);
  }
}

TEST_CASE("Laplace-Beltrami") {
  const StripGeometry g(5.0, 1.0, 10, 4);
  CHECK(max_abs(laplace_beltrami(g, Vector::Constant(10, 3.0))) < 1e-12);
  const double k = 2.0 * pi / g.Lx();
  Vector c(10), alt(10);
  for (int i = 0; i < 10; ++i) {
    c[i] = std::cos(k * g.x(i));
    alt[i] = i % 2 ? -1.0 : 1.0;
  }
  const double lambda = 2.0 * (1.0 - std::cos(k * g.hx())) / (g.hx() * g.hx());
  CHECK(max_abs(laplace_beltrami(g, c) + lambda * c) < 1e-12);
  CHECK(max_abs(laplace_beltrami(g, alt) + 4.0 / (g.hx() * g.hx()) * alt) < 1e-12);
  CHECK_THROWS_AS(laplace_beltrami(g, Vector::Zero(9)), ShapeError);
}

TEST_CASE("outward normal derivative") {
  const StripGeometry g(1.0, 1.0, 6, 8);
  {
    const auto [b, t] = normal_derivative(g, FieldPaird::constant(g, 2.0));
    CHECK(max_abs(b) < 1e-12);
    CHECK(max_abs(t) < 1e-12);
  }
  {
    const auto [b, t] = normal_derivative(g, FieldPaird::sample(g, [](double, double y) { return y; }));
    CHECK(max_abs(b.array() + 1.0) < 1e-12);
    CHECK(max_abs(t.array() - 1.0) < 1e-12);
  }
  {
    // y^2: the three-point stencil is exact for quadratics
    const auto [b, t] = normal_derivative(g, FieldPaird::sample(g, [](double, double y) { return y * y; }));
    CHECK(max_abs(b) < 1e-12);
    CHECK(max_abs(t.array() - 2.0) < 1e-12);
  }
}

TEST_CASE("generalized mean") {
  const StripGeometry g(3.0, 2.0, 12, 6);
  CHECK(generalized_mean(g, FieldPaird::constant(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  FieldPaird v(g);
  v.bottom.setOnes();
  v.top.setOnes();
  const double Lx = g.Lx(), Ly = g.Ly();
  CHECK(generalized_mean(g, v) == doctest::Approx(2 * Lx / (Lx * Ly + 2 * Lx)).epsilon(1e-14));
  const FieldPaird s = FieldPaird::sample(g, [&](double x, double) { return std::sin(2 * pi * x / Lx); });
  CHECK(std::abs(generalized_mean(g, s)) < 1e-15);
}

TEST_CASE("stiffness reproduces the V0 form") {
  const StripGeometry g(3.0, 2.0, 9, 5);
  const GridOperators ops(g);
  Vector a(g.nodes()), b(g.nodes());
  for (int m = 0; m < g.nodes(); ++m) {
    a[m] = std::sin(1.0 + 0.37 * m);
    b[m] = std::cos(0.5 * m * m);
  }
  const double form = inner_product_V0(g, FieldPaird::from_nodes(g, a), FieldPaird::from_nodes(g, b));
  CHECK(b.dot(ops.stiffness * a) == doctest::Approx(form).epsilon(1e-12));
  CHECK(max_abs(ops.stiffness * Vector::Ones(g.nodes())) < 1e-12);
  const SparseMatrix diff = ops.stiffness - SparseMatrix(ops.stiffness.transpose());
  CHECK(diff.norm() < 1e-12);
}

TEST_CASE("difference operators are exact on linear functions") {
  const StripGeometry g(2.0, 3.0, 8, 6);
  const GridOperators ops(g);
  const Vector y = FieldPaird::sample(g, [](double, double y) { return y; }).bulk;
  CHECK(max_abs(ops.dy * y - Vector::Ones(g.nodes())) < 1e-12);
  CHECK(max_abs(ops.dx * y) < 1e-12);
  // sum_j w_j (dy f)_j = f(Ly) - f(0) for any f
  Vector f(g.nodes());
  for (int m = 0; m < g.nodes(); ++m) f[m] = std::cos(0.3 * m);
  const Vector d = ops.dy * f;
  const QuadratureWeights& w = ops.weights;
  double s = 0.0, boundary = 0.0;
  for (int i = 0; i < g.Nx(); ++i) boundary += f[g.index(i, g.Ny())] - f[g.index(i, 0)];
  for (int m = 0; m < g.nodes(); ++m) s += w.bulk[m] * d[m];
  CHECK(s == doctest::Approx(boundary * g.hx()).epsilon(1e-12));
}

TEST_CASE("shape errors") {
  const StripGeometry g(1.0, 1.0, 4, 4);
  FieldPaird bad(g);
  bad.top.resize(3);
  CHECK_THROWS_AS(generalized_mean(g, bad), ShapeError);
  CHECK_THROWS_AS(laplacian_bulk(g, bad), ShapeError);
}

}
