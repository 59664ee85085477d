#pragma once

// Periodic strip geometry, bulk/surface grid functions and the discrete
// differential operators that couple them.
//
// Nodes sit at (i*hx, j*hy) with i in [0, Nx) periodic and j in [0, Ny].
// Rows j = 0 and j = Ny are shared with the two boundary circles, so a
// trace-compatible pair stores the same values in the boundary rows of
// `bulk` and in `bottom` / `top`.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <stdexcept>
#include <string>

namespace dqc {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

class StripGeometry {
public:
  StripGeometry() = default;
  StripGeometry(double Lx, double Ly, int Nx, int Ny);

  double Lx() const { return Lx_; }
  double Ly() const { return Ly_; }
  int Nx() const { return Nx_; }
  int Ny() const { return Ny_; }
  double hx() const { return Lx_ / Nx_; }
  double hy() const { return Ly_ / Ny_; }

  /// Number of grid nodes, boundary rows included.
  int nodes() const { return Nx_ * (Ny_ + 1); }
  int index(int i, int j) const { return j * Nx_ + wrap(i); }
  int wrap(int i) const { return ((i % Nx_) + Nx_) % Nx_; }
  bool on_boundary(int node) const {
    const int j = node / Nx_;
    return j == 0 || j == Ny_;
  }

  double x(int i) const { return i * hx(); }
  double y(int j) const { return j * hy(); }

  double area() const { return Lx_ * Ly_; }
  /// Total length of the two boundary circles.
  double boundary_length() const { return 2.0 * Lx_; }

  bool operator==(const StripGeometry& other) const {
    return Lx_ == other.Lx_ && Ly_ == other.Ly_ && Nx_ == other.Nx_ && Ny_ == other.Ny_;
  }

private:
  double Lx_ = 1.0;
  double Ly_ = 1.0;
  int Nx_ = 4;
  int Ny_ = 4;
};

/// A bulk grid function together with its values on the two boundary circles.
template <typename Scalar>
struct FieldPair {
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  VectorType bulk;
  VectorType bottom;
  VectorType top;

  FieldPair() = default;
  explicit FieldPair(const StripGeometry& g)
      : bulk(VectorType::Zero(g.nodes())),
        bottom(VectorType::Zero(g.Nx())),
        top(VectorType::Zero(g.Nx())) {}

  static FieldPair constant(const StripGeometry& g, Scalar c) {
    FieldPair v(g);
    v.bulk.setConstant(c);
    v.bottom.setConstant(c);
    v.top.setConstant(c);
    return v;
  }

  /// Pair whose traces are the boundary rows of `nodes`.
  static FieldPair from_nodes(const StripGeometry& g, const VectorType& nodes) {
    FieldPair v(g);
    v.bulk = nodes;
    v.bottom = nodes.head(g.Nx());
    v.top = nodes.tail(g.Nx());
    return v;
  }

  /// Samples f(x, y) at the nodes; traces are the boundary samples.
  template <typename F>
  static FieldPair sample(const StripGeometry& g, F&& f) {
    VectorType nodes(g.nodes());
    for (int j = 0; j <= g.Ny(); ++j)
      for (int i = 0; i < g.Nx(); ++i) nodes[g.index(i, j)] = f(g.x(i), g.y(j));
    return from_nodes(g, nodes);
  }

  bool matches(const StripGeometry& g) const {
    return bulk.size() == g.nodes() && bottom.size() == g.Nx() && top.size() == g.Nx();
  }

  bool trace_compatible(const StripGeometry& g, Scalar tol = Scalar(0)) const {
    using std::abs;
    for (int i = 0; i < g.Nx(); ++i) {
      if (abs(bottom[i] - bulk[g.index(i, 0)]) > tol) return false;
      if (abs(top[i] - bulk[g.index(i, g.Ny())]) > tol) return false;
    }
    return true;
  }

  FieldPair& operator+=(const FieldPair& o) {
    bulk += o.bulk;
    bottom += o.bottom;
    top += o.top;
    return *this;
  }
  FieldPair& operator-=(const FieldPair& o) {
    bulk -= o.bulk;
    bottom -= o.bottom;
    top -= o.top;
    return *this;
  }
  FieldPair& operator*=(Scalar s) {
    bulk *= s;
    bottom *= s;
    top *= s;
    return *this;
  }
  friend FieldPair operator+(FieldPair a, const FieldPair& b) { return a += b; }
  friend FieldPair operator-(FieldPair a, const FieldPair& b) { return a -= b; }
  friend FieldPair operator*(Scalar s, FieldPair a) { return a *= s; }
};

using FieldPaird = FieldPair<double>;

/// Trapezoidal weights: hx*hy per node (halved on boundary rows), hx per
/// boundary node.
struct QuadratureWeights {
  Vector bulk;     // per node
  Vector surface;  // per node, hx on boundary rows and zero elsewhere
  Vector lumped;   // bulk + surface

  explicit QuadratureWeights(const StripGeometry& g);

  double surface_weight(const StripGeometry& g) const { return g.hx(); }
};

class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
template <typename Scalar>
void check_shape(const StripGeometry& g, const FieldPair<Scalar>& v, const char* what) {
  if (!v.matches(g)) throw ShapeError(std::string(what) + ": field shape does not match geometry");
}
}  // namespace detail

/// Periodic second difference along one boundary circle.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> laplace_beltrami(
    const StripGeometry& g, const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.size() != g.Nx()) throw ShapeError("laplace_beltrami: expected Nx boundary values");
  const int n = g.Nx();
  const Scalar inv_h2 = Scalar(1) / (g.hx() * g.hx());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = (v[(i + 1) % n] - Scalar(2) * v[i] + v[(i + n - 1) % n]) * inv_h2;
  return out;
}

/// Outward normal derivatives (bottom, top) from the one-sided 3-point
/// stencil. The wall value is taken from the trace.
template <typename Scalar>
std::pair<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>
normal_derivative(const StripGeometry& g, const FieldPair<Scalar>& v) {
  detail::check_shape(g, v, "normal_derivative");
  if (g.Ny() < 3) throw ShapeError("normal_derivative: needs at least three node rows per wall");
  const int nx = g.Nx(), ny = g.Ny();
  const Scalar c = Scalar(1) / (Scalar(2) * g.hy());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bottom(nx), top(nx);
  for (int i = 0; i < nx; ++i) {
    bottom[i] = (Scalar(3) * v.bottom[i] - Scalar(4) * v.bulk[g.index(i, 1)] + v.bulk[g.index(i, 2)]) * c;
    top[i] = (Scalar(3) * v.top[i] - Scalar(4) * v.bulk[g.index(i, ny - 1)] + v.bulk[g.index(i, ny - 2)]) * c;
  }
  return {bottom, top};
}

/// Five-point Laplacian, periodic in x. Rows next to a wall read the trace as
/// the wall-side neighbour; the boundary rows themselves use the half-cell
/// stencil that makes summation by parts exact against `normal_derivative`.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> laplacian_bulk(const StripGeometry& g, const FieldPair<Scalar>& v) {
  detail::check_shape(g, v, "laplacian_bulk");
  const int nx = g.Nx(), ny = g.Ny();
  const Scalar ihx2 = Scalar(1) / (g.hx() * g.hx());
  const Scalar ihy2 = Scalar(1) / (g.hy() * g.hy());
  auto at = [&](int i, int j) -> Scalar {
    if (j == 0) return v.bottom[g.wrap(i)];
    if (j == ny) return v.top[g.wrap(i)];
    return v.bulk[g.index(i, j)];
  };
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(g.nodes());
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Scalar c = at(i, j);
      out[g.index(i, j)] = (at(i + 1, j) - Scalar(2) * c + at(i - 1, j)) * ihx2 +
                           (at(i, j + 1) - Scalar(2) * c + at(i, j - 1)) * ihy2;
    }
  const auto [dn_bottom, dn_top] = normal_derivative(g, v);
  const Scalar two_over_hy = Scalar(2) / g.hy();
  for (int i = 0; i < nx; ++i) {
    const Scalar b = at(i, 0);
    out[g.index(i, 0)] = (at(i + 1, 0) - Scalar(2) * b + at(i - 1, 0)) * ihx2 +
                         Scalar(2) * (at(i, 1) - b) * ihy2 + two_over_hy * dn_bottom[i];
    const Scalar t = at(i, ny);
    out[g.index(i, ny)] = (at(i + 1, ny) - Scalar(2) * t + at(i - 1, ny)) * ihx2 +
                          Scalar(2) * (at(i, ny - 1) - t) * ihy2 + two_over_hy * dn_top[i];
  }
  return out;
}

template <typename Scalar>
Scalar integrate_bulk(const StripGeometry& g, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
  const int nx = g.Nx(), ny = g.Ny();
  Scalar s(0);
  for (int j = 0; j <= ny; ++j) {
    Scalar row(0);
    for (int i = 0; i < nx; ++i) row += v[g.index(i, j)];
    s += (j == 0 || j == ny ? Scalar(0.5) : Scalar(1)) * row;
  }
  return s * (g.hx() * g.hy());
}

template <typename Scalar>
Scalar integrate_surface(const StripGeometry& g, const FieldPair<Scalar>& v) {
  return (v.bottom.sum() + v.top.sum()) * g.hx();
}

/// (int_Omega v + int_Gamma v_Gamma) / (|Omega| + |Gamma|)
template <typename Scalar>
Scalar generalized_mean(const StripGeometry& g, const FieldPair<Scalar>& v) {
  detail::check_shape(g, v, "generalized_mean");
  return (integrate_bulk(g, v.bulk) + integrate_surface(g, v)) / (g.area() + g.boundary_length());
}

template <typename Scalar>
Scalar inner_product_H(const StripGeometry& g, const FieldPair<Scalar>& v, const FieldPair<Scalar>& w) {
  detail::check_shape(g, v, "inner_product_H");
  detail::check_shape(g, w, "inner_product_H");
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> prod = v.bulk.cwiseProduct(w.bulk);
  return integrate_bulk(g, prod) + (v.bottom.dot(w.bottom) + v.top.dot(w.top)) * g.hx();
}

/// Bulk gradient pairing plus tangential gradient pairing on both circles.
template <typename Scalar>
Scalar inner_product_V0(const StripGeometry& g, const FieldPair<Scalar>& v, const FieldPair<Scalar>& w) {
  detail::check_shape(g, v, "inner_product_V0");
  detail::check_shape(g, w, "inner_product_V0");
  const int nx = g.Nx(), ny = g.Ny();
  const Scalar hx = g.hx(), hy = g.hy();
  Scalar s(0);
  // x-differences, trapezoidal in y
  for (int j = 0; j <= ny; ++j) {
    const Scalar c = (j == 0 || j == ny) ? Scalar(0.5) : Scalar(1);
    for (int i = 0; i < nx; ++i) {
      const Scalar dv = v.bulk[g.index(i + 1, j)] - v.bulk[g.index(i, j)];
      const Scalar dw = w.bulk[g.index(i + 1, j)] - w.bulk[g.index(i, j)];
      s += c * (hy / hx) * dv * dw;
    }
  }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Scalar dv = v.bulk[g.index(i, j + 1)] - v.bulk[g.index(i, j)];
      const Scalar dw = w.bulk[g.index(i, j + 1)] - w.bulk[g.index(i, j)];
      s += (hx / hy) * dv * dw;
    }
  for (int i = 0; i < nx; ++i) {
    const int ip = (i + 1) % nx;
    s += ((v.bottom[ip] - v.bottom[i]) * (w.bottom[ip] - w.bottom[i]) +
          (v.top[ip] - v.top[i]) * (w.top[ip] - w.top[i])) / hx;
  }
  return s;
}

/// Assembled operators on the node vector.
struct GridOperators {
  StripGeometry geom;
  QuadratureWeights weights;
  /// Symmetric stiffness of the coupled bulk/surface Dirichlet form;
  /// w^T K v equals inner_product_V0 for trace-compatible pairs.
  SparseMatrix stiffness;
  /// Central difference in x (periodic).
  SparseMatrix dx;
  /// Central difference in y with one-sided rows on the walls, so that
  /// sum_j w_j (dy f)_j = f(Ly) - f(0) under the trapezoidal weights.
  SparseMatrix dy;

  explicit GridOperators(const StripGeometry& g);

  /// Mass-weighted load of an H-pair onto nodes: W*bulk + hx*trace.
  Vector load(const FieldPaird& g) const;
  double mean_of_nodes(const Vector& v) const {
    return weights.lumped.dot(v) / (geom.area() + geom.boundary_length());
  }
};

}  // namespace dqc
