#include <doctest.h>

#include <cmath>
#include <sstream>

#include "stfem/analysis.hpp"
#include "stfem/registry.hpp"

using namespace stfem;

namespace {

Mesh refined(const Mesh& mesh, int times) {
  Mesh m = mesh;
  for (int k = 0; k < times; ++k) m = uniform_refine(m);
  return m;
}

Mesh oscillating_mesh() { return build_cartesian_simplicial_mesh({{0.0}, {1.0}, 1.0}, {14, 14}); }

// Affine u = 1 + 2x - t on the oscillating interval, with a = 1.
ProblemSpec affine_problem() {
  ProblemSpec p = registry_oscillating_interval();
  auto u = [](const Point& q) { return 1.0 + 2.0 * q(0) - q(1); };
  p.diffusion = [](const Point&) { return 1.0; };
  p.diffusion_gradient = [](const Point&) { return Point(Point::Zero(1)); };
  p.source = [](const Point&) { return -1.0; };
  p.dirichlet = u;
  p.initial = u;
  p.exact = u;
  p.exact_gradient = [](const Point&) { return Point(Point::Constant(1, 2.0)); };
  return p;
}

RelativeErrors solve_and_measure(const ProblemSpec& p, const Mesh& mesh, int depth) {
  const auto disc = discretize(p, mesh);
  const auto sol = solve(disc.system);
  return relative_errors(disc.space, sol.solution, p, disc.geometry, depth);
}

}  // namespace

TEST_CASE("convergence orders") {
  const auto halving = convergence_orders({0.4, 0.2, 0.1});
  REQUIRE(halving.size() == 2);
  CHECK(*halving[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(*halving[1] == doctest::Approx(1.0).epsilon(1e-14));

  const auto l2 = convergence_orders({6.40e-4, 1.74e-4});
  REQUIRE(l2.size() == 1);
  CHECK(*l2[0] == doctest::Approx(1.88).epsilon(5e-3));

  CHECK(*convergence_orders({1e-3, 1e-3})[0] == 0.0);

  const auto flagged = convergence_orders({1e-3, 0.0, 1e-4, std::nan("")});
  CHECK_FALSE(flagged[0].has_value());
  CHECK_FALSE(flagged[1].has_value());
  CHECK_FALSE(flagged[2].has_value());
  CHECK(convergence_orders({1.0}).empty());
}

TEST_CASE("log-log slope of a power law") {
  const std::vector<double> h = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> k;
  for (double x : h) k.push_back(3.0 * std::pow(x, -2.0));
  CHECK(loglog_slope(h, k) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), AnalysisError);
  CHECK_THROWS_AS(loglog_slope({1.0, 2.0}, {1.0}), AnalysisError);
}

TEST_CASE("tables require halving h") {
  std::vector<ErrorReport> rows(2);
  rows[0].h = 0.1;
  rows[1].h = 0.06;
  CHECK_THROWS_AS(make_table(rows), AnalysisError);
  rows[1].h = 0.05;
  rows[0].rel_h10 = 0.4;
  rows[1].rel_h10 = 0.2;
  rows[0].rel_l2 = 0.4;
  rows[1].rel_l2 = 0.1;
  const auto t = make_table(rows);
  CHECK(*t.h10_orders[0] == doctest::Approx(1.0));
  CHECK(*t.l2_orders[0] == doctest::Approx(2.0));
}

TEST_CASE("csv layout") {
  std::vector<ErrorReport> rows(2);
  rows[0] = {0.125, 0.02, 0.001, 368.0, 107};
  rows[1] = {0.0625, 0.01, 0.00025, 1430.0, 378};
  std::ostringstream out;
  make_table(rows).write_csv(out);
  CHECK(out.str() ==
        "h,dofs,h10_err,h10_order,l2_err,l2_order,kappa\n"
        "1.250000e-01,107,2.000000e-02,,1.000000e-03,,3.680000e+02\n"
        "6.250000e-02,378,1.000000e-02,1.000000e+00,2.500000e-04,2.000000e+00,1.430000e+03\n");
}

TEST_CASE("zero discrete solution has relative errors of one") {
  const ProblemSpec p = registry_oscillating_interval();
  const Mesh mesh = oscillating_mesh();
  const auto disc = discretize(p, mesh);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(disc.space.num_dofs());
  const auto err = relative_errors(disc.space, zero, p, disc.geometry, 6);
  CHECK(err.h10 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(err.l2 == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("affine solutions have zero error") {
  const auto err = solve_and_measure(affine_problem(), oscillating_mesh(), 6);
  CHECK(err.h10 < 1e-9);
  CHECK(err.l2 < 1e-9);
}

TEST_CASE("missing exact solution is an error") {
  const ProblemSpec p = registry_boundary_layer(0.3);
  const Mesh mesh = oscillating_mesh();
  const auto disc = discretize(p, mesh);
  CHECK_THROWS_AS(relative_errors(disc.space, Eigen::VectorXd::Zero(disc.space.num_dofs()), p,
                                  disc.geometry, 6),
                  AnalysisError);
}

TEST_CASE("error quadrature is stable under refinement") {
  const ProblemSpec p = registry_oscillating_interval();
  const Mesh mesh = oscillating_mesh();
  const auto disc = discretize(p, mesh);
  const auto sol = solve(disc.system);
  const auto coarse = relative_errors(disc.space, sol.solution, p, disc.geometry, 5);
  const auto fine = relative_errors(disc.space, sol.solution, p, disc.geometry, 6);
  const auto finer = relative_errors(disc.space, sol.solution, p, disc.geometry, 8);
  CHECK(std::abs(fine.h10 / coarse.h10 - 1.0) < 0.01);
  CHECK(std::abs(fine.l2 / coarse.l2 - 1.0) < 0.01);
  CHECK(std::abs(finer.h10 / fine.h10 - 1.0) < 0.01);
  CHECK(std::abs(finer.l2 / fine.l2 - 1.0) < 0.01);
}

TEST_CASE("relative errors are invariant under scaling of the data") {
  const ProblemSpec p = registry_oscillating_interval();
  ProblemSpec q = p;
  const double s = 3.5;
  q.source = [f = p.source, s](const Point& x) { return s * f(x); };
  q.dirichlet = [g = p.dirichlet, s](const Point& x) { return s * g(x); };
  q.initial = [g = p.initial, s](const Point& x) { return s * g(x); };
  q.exact = [u = *p.exact, s](const Point& x) { return s * u(x); };
  q.exact_gradient = [g = *p.exact_gradient, s](const Point& x) -> Point { return s * g(x); };
  const Mesh mesh = oscillating_mesh();
  const auto a = solve_and_measure(p, mesh, 6);
  const auto b = solve_and_measure(q, mesh, 6);
  CHECK(b.h10 == doctest::Approx(a.h10).epsilon(1e-9));
  CHECK(b.l2 == doctest::Approx(a.l2).epsilon(1e-9));
}

TEST_CASE("stefan problem at h = 1/32") {
  const ProblemSpec p = registry_stefan();
  const Mesh mesh = refined(build_cartesian_simplicial_mesh(p.box, {12, 8}), 2);
  CHECK(mesh.cell_size() == doctest::Approx(1.0 / 32));
  const auto err = solve_and_measure(p, mesh, 6);
  CHECK(err.h10 == doctest::Approx(4.75e-3).epsilon(0.2));
}

TEST_CASE("convergence study") {
  StudyOptions options;
  options.n_refinements = 1;
  SUBCASE("patch test stays at rounding level") {
    const auto t = run_convergence_study(affine_problem(), oscillating_mesh(), options);
    REQUIRE(t.rows.size() == 2);
    for (const auto& r : t.rows) {
      CHECK(r.rel_h10 < 1e-9);
      CHECK(r.rel_l2 < 1e-9);
      CHECK(r.kappa > 1.0);
    }
    CHECK(t.rows[1].h == doctest::Approx(t.rows[0].h / 2));
    CHECK(t.rows[1].dofs > t.rows[0].dofs);
  }
  SUBCASE("observer sees every level") {
    options.compute_kappa = false;
    std::vector<int> seen;
    const auto t = run_convergence_study(
        registry_oscillating_interval(), oscillating_mesh(), options,
        [&](int level, const Mesh&, const Discretization&, const Eigen::VectorXd&) {
          seen.push_back(level);
        });
    CHECK(seen == std::vector<int>{0, 1});
    CHECK(std::isnan(t.rows[0].kappa));
    CHECK(t.rows[1].rel_h10 < t.rows[0].rel_h10);
  }
  SUBCASE("failures name the level") {
    ProblemSpec p = registry_oscillating_interval();
    p.levelset = {[](const Point& q) { return q(0) - 0.5; }, {}};  // meets the lateral box face
    try {
      run_convergence_study(p, oscillating_mesh(), options);
      FAIL("expected an AnalysisError");
    } catch (const AnalysisError& e) {
      CHECK(std::string(e.what()).find("level 0") != std::string::npos);
    }
    options.stop_on_failure = false;
    const auto t = run_convergence_study(p, oscillating_mesh(), options);
    CHECK(t.failures.size() == 2);
    CHECK(std::isnan(t.rows[1].rel_h10));
  }
  SUBCASE("zero refinements are rejected") {
    options.n_refinements = 0;
    CHECK_THROWS_AS(run_convergence_study(affine_problem(), oscillating_mesh(), options),
                    AnalysisError);
  }
}

TEST_CASE("coercivity on the oscillating interval") {
  const ProblemSpec p = registry_oscillating_interval();
  const Mesh mesh = oscillating_mesh();
  const auto disc = discretize(p, mesh);
  const auto r = check_coercivity(disc, p, 20);
  CHECK(r.samples == 20);
  CHECK(r.violations == 0);
  CHECK(r.min_ratio >= 0.5);
}
