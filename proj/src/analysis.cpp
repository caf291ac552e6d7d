#include "stfem/analysis.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>

namespace stfem {

RelativeErrors relative_errors(const FeSpace& space, const Eigen::VectorXd& coeffs,
                               const ProblemSpec& problem, const CutGeometry& geometry,
                               int depth) {
  if (!problem.has_exact_solution())
    throw AnalysisError(problem.name + ": no exact solution to compare against");
  const auto& u = *problem.exact;
  const auto& grad_u = *problem.exact_gradient;
  const int d = space.mesh().dim() - 1;
  double e_h10 = 0.0, n_h10 = 0.0, e_l2 = 0.0, n_l2 = 0.0;
  for (int e : space.active_elements()) {
    const QuadratureRule rule = geometry.element_rules(e, depth, false).volume;
    const Point gh = space.gradient(e, coeffs);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point& x = rule.points[q];
      const double w = rule.weights[q];
      const double a = problem.diffusion(x);
      const Point gu = grad_u(x);
      const double ux = u(x);
      const double uh = space.evaluate(e, coeffs, x);
      e_h10 += w * a * (gu.head(d) - gh.head(d)).squaredNorm();
      n_h10 += w * a * gu.head(d).squaredNorm();
      e_l2 += w * (ux - uh) * (ux - uh);
      n_l2 += w * ux * ux;
    }
  }
  if (!(n_h10 > 0.0) || !(n_l2 > 0.0))
    throw AnalysisError(problem.name + ": exact solution has zero norm on Q");
  return {std::sqrt(e_h10 / n_h10), std::sqrt(e_l2 / n_l2)};
}

std::vector<std::optional<double>> convergence_orders(const std::vector<double>& errors) {
  std::vector<std::optional<double>> out;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    const double a = errors[k], b = errors[k + 1];
    if (a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b))
      out.emplace_back(std::log2(a / b));
    else
      out.emplace_back(std::nullopt);
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw AnalysisError("slope fit needs at least two matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

CoercivityReport check_coercivity(const Discretization& disc, const ProblemSpec& problem,
                                  int samples, double c, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  CoercivityReport r;
  r.samples = samples;
  r.min_ratio = std::numeric_limits<double>::infinity();
  const int n = disc.space.num_dofs();
  Eigen::VectorXd v(n);
  for (int k = 0; k < samples; ++k) {
    for (int i = 0; i < n; ++i) v(i) = dist(rng);
    const double a = v.dot(disc.system.A * v);
    const double norm = energy_norm_report(disc.space, v, problem, disc.geometry, disc.h).total();
    const double ratio = a / (norm * norm);
    r.min_ratio = std::min(r.min_ratio, ratio);
    if (!(ratio >= c)) ++r.violations;
  }
  return r;
}

namespace {

void write_optional(std::ostream& out, const std::optional<double>& v) {
  if (v) out << *v;
}

}  // namespace

void ConvergenceTable::write_csv(std::ostream& out) const {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << "h,dofs,h10_err,h10_order,l2_err,l2_order,kappa\n";
  out.precision(6);
  out << std::scientific;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    out << r.h << ',' << r.dofs << ',' << r.rel_h10 << ',';
    if (k > 0) write_optional(out, h10_orders[k - 1]);
    out << ',' << r.rel_l2 << ',';
    if (k > 0) write_optional(out, l2_orders[k - 1]);
    out << ',' << r.kappa << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

ConvergenceTable make_table(std::vector<ErrorReport> rows) {
  for (std::size_t k = 0; k + 1 < rows.size(); ++k)
    if (std::abs(rows[k].h / rows[k + 1].h - 2.0) > 1e-9)
      throw AnalysisError("convergence table: h must halve between consecutive levels");
  ConvergenceTable t;
  std::vector<double> h10, l2;
  for (const auto& r : rows) {
    h10.push_back(r.rel_h10);
    l2.push_back(r.rel_l2);
  }
  t.h10_orders = convergence_orders(h10);
  t.l2_orders = convergence_orders(l2);
  t.rows = std::move(rows);
  return t;
}

double penalty_length(const Mesh& mesh, PenaltyLength kind) {
  return kind == PenaltyLength::Diameter ? mesh.h() : mesh.cell_size();
}

ConvergenceTable run_convergence_study(const ProblemSpec& problem, const Mesh& base_mesh,
                                       const StudyOptions& options,
                                       const LevelObserver& observer) {
  if (options.n_refinements < 1) throw AnalysisError("convergence study needs n_refinements >= 1");
  std::vector<ErrorReport> rows;
  std::vector<std::string> failures;
  Mesh mesh = base_mesh;
  for (int level = 0; level <= options.n_refinements; ++level) {
    if (level > 0) mesh = uniform_refine(mesh);
    try {
      const Discretization disc =
          discretize(problem, mesh, options.geometry, penalty_length(mesh, options.penalty));
      const SolveReport sol = solve(disc.system, options.solve);
      ErrorReport r;
      r.h = mesh.cell_size();
      r.dofs = disc.space.num_dofs();
      if (problem.has_exact_solution()) {
        const auto err = relative_errors(disc.space, sol.solution, problem, disc.geometry,
                                         options.error_depth);
        r.rel_h10 = err.h10;
        r.rel_l2 = err.l2;
      } else {
        r.rel_h10 = r.rel_l2 = std::nan("");
      }
      r.kappa = options.compute_kappa ? condition_number(disc.system, options.condition).kappa
                                      : std::nan("");
      rows.push_back(r);
      if (observer) observer(level, mesh, disc, sol.solution);
    } catch (const std::exception& ex) {
      const std::string msg = "level " + std::to_string(level) + ": " + ex.what();
      if (options.stop_on_failure) throw AnalysisError(problem.name + ", " + msg);
      failures.push_back(msg);
      ErrorReport r;
      r.h = mesh.cell_size();
      r.rel_h10 = r.rel_l2 = r.kappa = std::nan("");
      rows.push_back(r);
    }
  }
  ConvergenceTable table = make_table(std::move(rows));
  table.failures = std::move(failures);
  return table;
}

}  // namespace stfem
