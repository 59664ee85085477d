#include "dqc/linops.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <random>
#include <sstream>
#include <vector>

namespace dqc {

bool SparseSystem::spot_check_symmetry(int samples, double tol, unsigned seed) const {
  if (matrix.rows() != matrix.cols()) return false;
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  const Eigen::Index n = matrix.rows();
  for (int s = 0; s < samples; ++s) {
    Vector v(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v[i] = nd(rng);
      w[i] = nd(rng);
    }
    const double a = (matrix * v).dot(w);
    const double b = v.dot(matrix * w);
    const double scale = std::max({std::abs(a), std::abs(b), 1.0});
    if (std::abs(a - b) > tol * scale) return false;
  }
  return true;
}

Vector solve_spd(const SparseSystem& A, const Vector& b, const SpdSolveOptions& opts) {
  if (A.matrix.rows() != A.matrix.cols() || A.matrix.rows() != b.size())
    throw SolveError("solve_spd: dimension mismatch", -1.0);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Vector::Zero(b.size());
  auto rel_residual = [&](const Vector& x) { return (A.matrix * x - b).norm() / bnorm; };

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(A.matrix);
  if (ldlt.info() == Eigen::Success) {
    Vector x = ldlt.solve(b);
    if (ldlt.info() == Eigen::Success && x.allFinite() && rel_residual(x) <= opts.tol) return x;
  }

  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(opts.tol * 0.5);
  cg.setMaxIterations(opts.max_iterations);
  cg.compute(A.matrix);
  Vector x = cg.solve(b);
  const double r = x.allFinite() ? rel_residual(x) : std::numeric_limits<double>::infinity();
  if (r > opts.tol) {
    std::ostringstream msg;
    msg << "solve_spd: no convergence (relative residual " << r << " after " << cg.iterations() << " CG iterations)";
    throw SolveError(msg.str(), r);
  }
  return x;
}

NOperator::NOperator(const GridOperators& ops, double tol) : ops_(&ops), tol_(tol) {
  const int n = ops.geom.nodes();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(ops.stiffness.nonZeros()) + 2 * static_cast<std::size_t>(n));
  for (int k = 0; k < ops.stiffness.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(ops.stiffness, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  // constraint row: sum of lumped weights times xi vanishes
  for (int i = 0; i < n; ++i) {
    t.emplace_back(n, i, ops.weights.lumped[i]);
    t.emplace_back(i, n, ops.weights.lumped[i]);
  }
  SparseMatrix saddle(n + 1, n + 1);
  saddle.setFromTriplets(t.begin(), t.end());
  saddle.makeCompressed();
  lu_.compute(saddle);
  if (lu_.info() != Eigen::Success) throw SolveError("NOperator: factorisation failed", -1.0);
}

Vector NOperator::apply_load(const Vector& load, double* residual) const {
  const int n = ops_->geom.nodes();
  const double total = ops_->weights.lumped.sum();
  if (std::abs(load.sum()) > 1e-10 * load.cwiseAbs().sum()) {
    std::ostringstream msg;
    msg << "NOperator: data has nonzero generalized mean (" << load.sum() / total << ")";
    throw SolveError(msg.str(), std::abs(load.sum()));
  }
  Vector rhs = Vector::Zero(n + 1);
  rhs.head(n) = load;
  Vector sol = lu_.solve(rhs);
  Vector xi = sol.head(n);
  const double r = (ops_->stiffness * xi - load).norm() / std::max(load.norm(), 1e-300);
  if (load.norm() > 0.0 && r > tol_ * 1e3) throw SolveError("NOperator: solve residual too large", r);
  if (residual) *residual = load.norm() > 0.0 ? r : 0.0;
  return xi;
}

MeanZeroSolveResult NOperator::apply(const FieldPaird& g) const {
  detail::check_shape(ops_->geom, g, "NOperator::apply");
  const double m = generalized_mean(ops_->geom, g);
  if (std::abs(m) > 1e-10 * std::sqrt(inner_product_H(ops_->geom, g, g))) {
    std::ostringstream msg;
    msg << "NOperator: data has nonzero generalized mean (" << m << ")";
    throw SolveError(msg.str(), std::abs(m));
  }
  MeanZeroSolveResult out;
  double r = 0.0;
  Vector xi = apply_load(ops_->load(g), &r);
  out.solution = FieldPaird::from_nodes(ops_->geom, xi);
  out.residual = r;
  out.iterations = 1;
  return out;
}

double dual_norm_star(const NOperator& N, const FieldPaird& g) {
  const auto xi = N.apply(g).solution;
  return std::sqrt(std::max(0.0, inner_product_V0(N.ops().geom, xi, xi)));
}

NewtonResult newton_damped(const ResidualMap& F, const JacobianMap& J, const Vector& x0, const Vector& lower,
                           const Vector& upper, const NewtonOptions& opts) {
  auto feasible = [&](const Vector& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (!(x[i] > lower[i] && x[i] < upper[i])) return false;
    return true;
  };
  if (x0.size() != lower.size() || x0.size() != upper.size())
    throw std::invalid_argument("newton_damped: bound dimensions do not match x0");
  if (!feasible(x0)) throw std::invalid_argument("newton_damped: initial point outside the feasibility box");

  NewtonResult res;
  res.x = x0;
  Vector f = F(res.x);
  res.residual = f.lpNorm<Eigen::Infinity>();
  Eigen::SparseLU<SparseMatrix> lu;
  bool analysed = false;
  Eigen::Index pattern_nnz = -1;

  while (res.residual > opts.tol) {
    if (res.iterations >= opts.max_iterations) {
      std::ostringstream msg;
      msg << "newton_damped: no convergence in " << opts.max_iterations << " iterations (residual " << res.residual
          << ")";
      throw NewtonError(msg.str(), res.residual, res.iterations);
    }
    SparseMatrix jac = J(res.x);
    jac.makeCompressed();
    if (!analysed || jac.nonZeros() != pattern_nnz) {
      lu.analyzePattern(jac);
      analysed = true;
      pattern_nnz = jac.nonZeros();
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) throw NewtonError("newton_damped: singular Jacobian", res.residual, res.iterations);
    const Vector dx = lu.solve(f);
    ++res.iterations;

    double step = 1.0;
    for (;;) {
      Vector trial = res.x - step * dx;
      if (feasible(trial)) {
        Vector ft = F(trial);
        const double rt = ft.lpNorm<Eigen::Infinity>();
        if (rt < res.residual || rt <= opts.tol) {
          res.x = std::move(trial);
          f = std::move(ft);
          res.residual = rt;
          break;
        }
      }
      step *= opts.backtrack;
      if (step < opts.min_step) {
        std::ostringstream msg;
        msg << "newton_damped: stagnation (step below " << opts.min_step << ", residual " << res.residual << ")";
        throw NewtonError(msg.str(), res.residual, res.iterations);
      }
    }
  }
  return res;
}

}  // namespace dqc
