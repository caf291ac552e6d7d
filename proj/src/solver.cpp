#include "stfem/solver.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

namespace stfem {

std::string to_string(SolveMethod m) { return m == SolveMethod::DirectLU ? "DirectLU" : "GMRES"; }

std::string to_string(ConditionMethod m) {
  return m == ConditionMethod::DenseSVD ? "DenseSVD" : "PowerIteration";
}

namespace {

using LU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

void check_square(const SparseMatrix& A) {
  if (A.rows() != A.cols()) throw SolverError("matrix is not square");
  if (A.rows() == 0) throw SolverError("empty system");
}

void check_rows(const SparseMatrix& A) {
  Eigen::VectorXd row_max = Eigen::VectorXd::Zero(A.rows());
  for (int c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it)
      row_max(it.row()) = std::max(row_max(it.row()), std::abs(it.value()));
  for (Eigen::Index r = 0; r < row_max.size(); ++r)
    if (row_max(r) == 0.0) throw SingularMatrixError("row " + std::to_string(r) + " is zero");
}

void factorize(LU& lu, const SparseMatrix& A) {
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw SingularMatrixError("sparse LU failed: " + lu.lastErrorMessage());
}

double relative_residual(const SparseMatrix& A, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& b) {
  const double nb = b.norm();
  const double nr = (A * x - b).norm();
  return nb > 0.0 ? nr / nb : nr;
}

Eigen::VectorXd start_vector(Eigen::Index n) {
  std::mt19937 gen(12345);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = dist(gen);
  return x.normalized();
}

// Largest eigenvalue of a symmetric positive operator by power iteration,
// convergence judged on the Rayleigh quotient.
template <class Apply>
double power_iteration(Apply apply, Eigen::Index n, const ConditionOptions& opt, bool& converged,
                       int& iterations) {
  Eigen::VectorXd x = start_vector(n);
  double lambda = 0.0;
  converged = false;
  for (iterations = 1; iterations <= opt.max_iterations; ++iterations) {
    Eigen::VectorXd y = apply(x);
    const double next = x.dot(y);
    const double ny = y.norm();
    if (!(ny > 0.0) || !std::isfinite(ny)) throw SingularMatrixError("power iteration broke down");
    x = y / ny;
    if (iterations > 1 && std::abs(next - lambda) < opt.rel_tol * std::abs(next)) {
      lambda = next;
      converged = true;
      break;
    }
    lambda = next;
  }
  return lambda;
}

}  // namespace

SolveReport solve(const SparseMatrix& A, const Eigen::VectorXd& b, const SolveOptions& options) {
  check_square(A);
  if (b.size() != A.rows()) throw SolverError("right-hand side has the wrong size");
  check_rows(A);
  SolveReport report;
  if (A.rows() <= options.iterative_threshold) {
    LU lu;
    factorize(lu, A);
    report.solution = lu.solve(b);
    report.method = SolveMethod::DirectLU;
    if (!report.solution.allFinite()) throw SingularMatrixError("LU solve produced non-finite values");
    report.residual_norm = relative_residual(A, report.solution, b);
    // A few steps of iterative refinement for badly scaled systems.
    for (int k = 0; k < 3 && report.residual_norm > options.tol; ++k) {
      report.solution += lu.solve(b - A * report.solution);
      report.residual_norm = relative_residual(A, report.solution, b);
    }
  } else {
    Eigen::GMRES<SparseMatrix, Eigen::IncompleteLUT<double>> gmres;
    gmres.set_restart(options.restart);
    gmres.setTolerance(options.tol);
    gmres.setMaxIterations(options.max_iterations);
    gmres.compute(A);
    if (gmres.info() != Eigen::Success) throw SingularMatrixError("ILUT preconditioner failed");
    report.solution = gmres.solve(b);
    report.method = SolveMethod::GMRES;
    report.iterations = static_cast<int>(gmres.iterations());
    report.residual_norm = relative_residual(A, report.solution, b);
  }
  if (!(report.residual_norm <= options.tol))
    throw ConvergenceError("relative residual " + std::to_string(report.residual_norm) +
                           " above tolerance");
  return report;
}

SolveReport solve(const LinearSystem& system, const SolveOptions& options) {
  return solve(system.A, system.b, options);
}

ConditionReport condition_number(const SparseMatrix& A, const ConditionOptions& options) {
  check_square(A);
  check_rows(A);
  ConditionReport r;
  if (A.rows() <= options.dense_threshold) {
    const Eigen::MatrixXd dense(A);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
    const auto& s = svd.singularValues();
    r.sigma_max = s(0);
    r.sigma_min = s(s.size() - 1);
    if (!(r.sigma_min > 0.0)) throw SingularMatrixError("matrix is singular");
    r.kappa = r.sigma_max / r.sigma_min;
    r.method = ConditionMethod::DenseSVD;
    return r;
  }
  r.method = ConditionMethod::PowerIteration;
  const SparseMatrix At = A.transpose();
  bool conv_max = false, conv_min = false;
  int it_max = 0, it_min = 0;
  const double lmax = power_iteration([&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return At * (A * x);
  }, A.rows(), options, conv_max, it_max);
  LU lu, lut;
  factorize(lu, A);
  factorize(lut, At);
  const double lmin_inv = power_iteration([&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd z = lut.solve(x);
    return lu.solve(z);
  }, A.rows(), options, conv_min, it_min);
  r.sigma_max = std::sqrt(lmax);
  r.sigma_min = 1.0 / std::sqrt(lmin_inv);
  r.kappa = r.sigma_max / r.sigma_min;
  r.converged = conv_max && conv_min;
  r.iterations = it_max + it_min;
  return r;
}

}  // namespace stfem
