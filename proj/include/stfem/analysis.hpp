#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stfem/fem.hpp"
#include "stfem/solver.hpp"

namespace stfem {

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RelativeErrors {
  double h10 = 0.0;  ///< ||a^1/2 grad_x(u - u_h)||_Q / ||a^1/2 grad_x u||_Q
  double l2 = 0.0;   ///< ||u - u_h||_Q / ||u||_Q
};

/// Relative errors over Q using cut volume rules at `depth`. Throws
/// AnalysisError when the problem has no exact solution.
RelativeErrors relative_errors(const FeSpace& space, const Eigen::VectorXd& coeffs,
                               const ProblemSpec& problem, const CutGeometry& geometry, int depth);

/// log2(e_k / e_{k+1}); empty entries where an error is zero, negative or
/// not finite.
std::vector<std::optional<double>> convergence_orders(const std::vector<double>& errors);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ErrorReport {
  double h = 0.0;  ///< grid spacing of the level
  double rel_h10 = 0.0;
  double rel_l2 = 0.0;
  double kappa = 0.0;
  int dofs = 0;
};

struct ConvergenceTable {
  std::vector<ErrorReport> rows;
  std::vector<std::optional<double>> h10_orders;
  std::vector<std::optional<double>> l2_orders;
  std::vector<std::string> failures;  ///< "level k: message" for failed levels

  /// Columns h, dofs, h10_err, h10_order, l2_err, l2_order, kappa.
  void write_csv(std::ostream& out) const;
};

struct CoercivityReport {
  int samples = 0;
  int violations = 0;      ///< samples with A_h(v, v) < c |||v|||^2
  double min_ratio = 0.0;  ///< min A_h(v, v) / |||v|||^2
};

/// Checks A_h(v, v) >= c |||v|||^2 for random coefficient vectors with
/// entries uniform in [-1, 1].
CoercivityReport check_coercivity(const Discretization& disc, const ProblemSpec& problem,
                                  int samples = 100, double c = 0.5, unsigned seed = 7);

/// Length used in the penalty scalings gamma/h, gamma1 h and delta h^2.
enum class PenaltyLength { Diameter, GridSpacing };

double penalty_length(const Mesh& mesh, PenaltyLength kind);

struct StudyOptions {
  int n_refinements = 1;
  GeometryOptions geometry{};
  int error_depth = 6;
  bool compute_kappa = true;
  PenaltyLength penalty = PenaltyLength::Diameter;
  SolveOptions solve{};
  ConditionOptions condition{};
  /// When false, a failed level is recorded with NaN entries and the study
  /// continues.
  bool stop_on_failure = true;
};

/// Called once per level after the solve.
using LevelObserver = std::function<void(int level, const Mesh& mesh, const Discretization& disc,
                                         const Eigen::VectorXd& solution)>;

/// Solves on the base mesh and n_refinements uniform refinements of it,
/// measuring errors and kappa(A) per level. Failures are rethrown as
/// AnalysisError naming the level unless options.stop_on_failure is false.
ConvergenceTable run_convergence_study(const ProblemSpec& problem, const Mesh& base_mesh,
                                       const StudyOptions& options,
                                       const LevelObserver& observer = {});

/// Builds the table (orders included) from per-level reports, checking that
/// h halves between consecutive rows.
ConvergenceTable make_table(std::vector<ErrorReport> rows);

}  // namespace stfem
