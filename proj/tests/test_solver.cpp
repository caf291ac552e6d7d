#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "stfem/solver.hpp"

using namespace stfem;

namespace {

SparseMatrix sparse(const Eigen::MatrixXd& M) { return M.sparseView(); }

SparseMatrix random_shifted(int n, unsigned seed, double density = 0.01) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_int_distribution<int> idx(0, n - 1);
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < static_cast<int>(density * n * n); ++k) {
    const int i = idx(gen), j = idx(gen);
    const double v = val(gen);
    t.emplace_back(i, j, v);
    t.emplace_back(j, i, v);
  }
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, 3.0 + i * 0.01);
  SparseMatrix A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

}  // namespace

TEST_CASE("identity solve") {
  const SparseMatrix I = sparse(Eigen::MatrixXd::Identity(5, 5));
  Eigen::VectorXd b(5);
  b << 1, -2, 3, 0.5, 7;
  const auto r = solve(I, b);
  CHECK((r.solution - b).norm() == 0.0);
  CHECK(r.method == SolveMethod::DirectLU);
  CHECK(r.iterations == 0);
}

TEST_CASE("random system matches dense elimination") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd M(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) M(i, j) = dist(gen) + (i == j ? 10.0 : 0.0);
  Eigen::VectorXd b(10);
  for (int i = 0; i < 10; ++i) b(i) = dist(gen);
  const Eigen::VectorXd oracle = M.fullPivLu().solve(b);
  const auto r = solve(sparse(M), b);
  CHECK((r.solution - oracle).norm() < 1e-10 * oracle.norm());
  CHECK(r.residual_norm <= 1e-10);
}

TEST_CASE("gmres path") {
  const SparseMatrix A = random_shifted(300, 3);
  Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(300, -1.0, 1.0);
  SolveOptions opt;
  opt.iterative_threshold = 100;
  const auto r = solve(A, b, opt);
  CHECK(r.method == SolveMethod::GMRES);
  CHECK(r.residual_norm <= opt.tol);
  CHECK(r.iterations > 0);
}

TEST_CASE("singular input") {
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(4, 4);
  M(2, 2) = 0.0;
  CHECK_THROWS_AS(solve(sparse(M), Eigen::VectorXd::Ones(4)), SingularMatrixError);
  Eigen::MatrixXd R = Eigen::MatrixXd::Ones(3, 3);
  CHECK_THROWS_AS(solve(sparse(R), Eigen::VectorXd::Ones(3)), SingularMatrixError);
  CHECK_THROWS_AS(solve(sparse(Eigen::MatrixXd::Ones(2, 3)), Eigen::VectorXd::Ones(2)), SolverError);
}

TEST_CASE("condition numbers of diagonal matrices") {
  CHECK(condition_number(sparse(Eigen::MatrixXd::Identity(6, 6))).kappa == doctest::Approx(1.0));
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 10.0;
  const auto r = condition_number(sparse(D));
  CHECK(r.kappa == doctest::Approx(10.0));
  CHECK(r.method == ConditionMethod::DenseSVD);
}

TEST_CASE("iterative condition number matches dense svd") {
  const SparseMatrix A = random_shifted(500, 11);
  const auto oracle = condition_number(A);
  ConditionOptions opt;
  opt.dense_threshold = 100;
  const auto r = condition_number(A, opt);
  CHECK(r.method == ConditionMethod::PowerIteration);
  CHECK(r.converged);
  CHECK(std::abs(r.kappa - oracle.kappa) / oracle.kappa < 0.01);

  // Invariance under a symmetric permutation.
  Eigen::VectorXi perm(500);
  for (int i = 0; i < 500; ++i) perm(i) = (i * 7) % 500;
  const Eigen::PermutationMatrix<Eigen::Dynamic> P(perm);
  const SparseMatrix B = P * A * P.transpose();
  const auto rp = condition_number(B, opt);
  CHECK(std::abs(rp.kappa - oracle.kappa) / oracle.kappa < 0.01);
}
