#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "stfem/fem.hpp"

namespace stfem {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrixError : public SolverError {
 public:
  using SolverError::SolverError;
};

class ConvergenceError : public SolverError {
 public:
  using SolverError::SolverError;
};

enum class SolveMethod { DirectLU, GMRES };
std::string to_string(SolveMethod m);

struct SolveOptions {
  double tol = 1e-10;
  /// Systems larger than this go to restarted GMRES with an ILUT preconditioner.
  int iterative_threshold = 200000;
  int restart = 100;
  int max_iterations = 10000;
};

struct SolveReport {
  Eigen::VectorXd solution;
  double residual_norm = 0.0;  ///< ||Ax - b|| / ||b||
  SolveMethod method = SolveMethod::DirectLU;
  int iterations = 0;
};

/// Throws SingularMatrixError for zero rows or a failed factorization, and
/// ConvergenceError when the relative residual stays above `tol`.
SolveReport solve(const LinearSystem& system, const SolveOptions& options = {});
SolveReport solve(const SparseMatrix& A, const Eigen::VectorXd& b, const SolveOptions& options = {});

enum class ConditionMethod { DenseSVD, PowerIteration };
std::string to_string(ConditionMethod m);

struct ConditionOptions {
  int dense_threshold = 2000;
  double rel_tol = 1e-6;
  int max_iterations = 10000;
};

struct ConditionReport {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  double kappa = 0.0;
  ConditionMethod method = ConditionMethod::DenseSVD;
  bool converged = true;
  int iterations = 0;
};

/// Euclidean condition number sigma_max / sigma_min. Dense SVD up to
/// `dense_threshold` unknowns, power and inverse iteration on A^T A beyond.
ConditionReport condition_number(const SparseMatrix& A, const ConditionOptions& options = {});
inline ConditionReport condition_number(const LinearSystem& system,
                                        const ConditionOptions& options = {}) {
  return condition_number(system.A, options);
}

}  // namespace stfem
