#pragma once

#include "dqc/grid.hpp"

#include <Eigen/SparseLU>

#include <functional>
#include <stdexcept>
#include <string>

namespace dqc {

class SolveError : public std::runtime_error {
public:
  SolveError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

struct SparseSystem {
  SparseMatrix matrix;
  bool symmetric = false;

  /// <A v, w> == <v, A w> on `samples` random vectors.
  bool spot_check_symmetry(int samples = 3, double tol = 1e-12, unsigned seed = 7) const;
};

struct SpdSolveOptions {
  double tol = 1e-12;
  int max_iterations = 10000;
};

/// Solves A x = b for symmetric positive (semi-)definite A. Tries a sparse
/// LDL^T factorisation, falls back to Jacobi-preconditioned CG, and throws
/// SolveError when neither reaches ||Ax - b|| <= tol * ||b||.
Vector solve_spd(const SparseSystem& A, const Vector& b, const SpdSolveOptions& opts = {});

struct MeanZeroSolveResult {
  FieldPaird solution;
  double residual = 0.0;
  int iterations = 0;
};

/// Green operator of the coupled bulk/surface Laplacian on mean-zero data.
/// The saddle system [K m; m^T 0] is factorised once per geometry.
class NOperator {
public:
  explicit NOperator(const GridOperators& ops, double tol = 1e-12);

  const GridOperators& ops() const { return *ops_; }

  /// Returns xi with mean xi = 0 and  K xi = load(g).
  MeanZeroSolveResult apply(const FieldPaird& g) const;
  /// Same, for a node vector that already carries mass weights (a load).
  Vector apply_load(const Vector& load, double* residual = nullptr) const;

private:
  const GridOperators* ops_;
  double tol_;
  Eigen::SparseLU<SparseMatrix> lu_;
};

/// ||N g||_{V0}
double dual_norm_star(const NOperator& N, const FieldPaird& g);

struct NewtonOptions {
  double tol = 1e-11;
  int max_iterations = 50;
  double backtrack = 0.5;
  double min_step = 1e-14;
};

struct NewtonResult {
  Vector x;
  double residual = 0.0;
  int iterations = 0;
};

class NewtonError : public std::runtime_error {
public:
  NewtonError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

private:
  double residual_;
  int iterations_;
};

using ResidualMap = std::function<Vector(const Vector&)>;
using JacobianMap = std::function<SparseMatrix(const Vector&)>;

/// Damped Newton with backtracking. Every iterate stays strictly inside
/// (lower, upper); steps are halved until the trial point is feasible and the
/// sup-norm residual decreases.
NewtonResult newton_damped(const ResidualMap& F, const JacobianMap& J, const Vector& x0, const Vector& lower,
                           const Vector& upper, const NewtonOptions& opts = {});

}  // namespace dqc
