#include "dqc/grid.hpp"

#include <vector>

namespace dqc {

StripGeometry::StripGeometry(double Lx, double Ly, int Nx, int Ny) : Lx_(Lx), Ly_(Ly), Nx_(Nx), Ny_(Ny) {
  if (Nx < 4 || Ny < 4) throw std::invalid_argument("StripGeometry: Nx and Ny must be at least 4");
  if (!(Lx > 0.0) || !(Ly > 0.0)) throw std::invalid_argument("StripGeometry: Lx and Ly must be positive");
}

QuadratureWeights::QuadratureWeights(const StripGeometry& g)
    : bulk(g.nodes()), surface(Vector::Zero(g.nodes())), lumped(g.nodes()) {
  const double cell = g.hx() * g.hy();
  for (int j = 0; j <= g.Ny(); ++j)
    for (int i = 0; i < g.Nx(); ++i) {
      const bool wall = (j == 0 || j == g.Ny());
      bulk[g.index(i, j)] = wall ? 0.5 * cell : cell;
      if (wall) surface[g.index(i, j)] = g.hx();
    }
  lumped = bulk + surface;
}

GridOperators::GridOperators(const StripGeometry& g) : geom(g), weights(g) {
  const int nx = g.Nx(), ny = g.Ny();
  const double hx = g.hx(), hy = g.hy();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(g.nodes()) * 10);
  auto edge = [&t](int a, int b, double c) {
    t.emplace_back(a, a, c);
    t.emplace_back(b, b, c);
    t.emplace_back(a, b, -c);
    t.emplace_back(b, a, -c);
  };
  for (int j = 0; j <= ny; ++j) {
    const bool wall = (j == 0 || j == ny);
    // bulk x-edges (half rows on the walls) plus the tangential surface form
    const double c = (wall ? 0.5 : 1.0) * hy / hx + (wall ? 1.0 / hx : 0.0);
    for (int i = 0; i < nx; ++i) edge(g.index(i, j), g.index(i + 1, j), c);
  }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) edge(g.index(i, j), g.index(i, j + 1), hx / hy);
  stiffness.resize(g.nodes(), g.nodes());
  stiffness.setFromTriplets(t.begin(), t.end());
  stiffness.makeCompressed();

  std::vector<Eigen::Triplet<double>> tx, ty;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int m = g.index(i, j);
      tx.emplace_back(m, g.index(i + 1, j), 0.5 / hx);
      tx.emplace_back(m, g.index(i - 1, j), -0.5 / hx);
      if (j == 0) {
        ty.emplace_back(m, g.index(i, 1), 1.0 / hy);
        ty.emplace_back(m, m, -1.0 / hy);
      } else if (j == ny) {
        ty.emplace_back(m, m, 1.0 / hy);
        ty.emplace_back(m, g.index(i, ny - 1), -1.0 / hy);
      } else {
        ty.emplace_back(m, g.index(i, j + 1), 0.5 / hy);
        ty.emplace_back(m, g.index(i, j - 1), -0.5 / hy);
      }
    }
  dx.resize(g.nodes(), g.nodes());
  dx.setFromTriplets(tx.begin(), tx.end());
  dy.resize(g.nodes(), g.nodes());
  dy.setFromTriplets(ty.begin(), ty.end());
}

Vector GridOperators::load(const FieldPaird& v) const {
  detail::check_shape(geom, v, "load");
  Vector out = weights.bulk.cwiseProduct(v.bulk);
  const int nx = geom.Nx();
  for (int i = 0; i < nx; ++i) {
    out[geom.index(i, 0)] += geom.hx() * v.bottom[i];
    out[geom.index(i, geom.Ny())] += geom.hx() * v.top[i];
  }
  return out;
}

}  // namespace dqc
