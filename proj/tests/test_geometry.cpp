#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stfem/geometry.hpp"

using namespace stfem;
using std::numbers::pi;

namespace {

Point pt(double x, double t) {
  Point p(2);
  p << x, t;
  return p;
}

std::vector<Point> unit_triangle() { return {pt(0, 0), pt(1, 0), pt(0, 1)}; }

LevelSet affine(double cx, double ct, double c) {
  return {[=](const Point& p) { return cx * p(0) + ct * p(1) + c; }, {}};
}

LevelSet constant(double c) {
  return {[=](const Point&) { return c; }, {}};
}

double total_volume(const CutGeometry& g, int depth) {
  double s = 0.0;
  for (int e : g.active_elements()) s += g.element_rules(e, depth, false).volume.total_weight();
  return s;
}

double total_surface(const CutGeometry& g, int depth) {
  double s = 0.0;
  for (int e : g.active_elements())
    if (g.label(e) == ElementClass::Cut) s += g.element_rules(e, depth).surface.total_weight();
  return s;
}

LevelSet oscillating_interval() {
  return {[](const Point& p) {
            const double v = pi * std::sin(2 * pi * p(1)) / 20;
            return (p(0) - 0.3 - v) * (p(0) - 0.7 - v);
          },
          {}};
}

LevelSet moving_circle() {
  return {[](const Point& p) {
            const double t = p(2);
            const double x = p(0) - 0.15 * std::cos(2 * pi * t) - 0.5;
            const double y = p(1) - 0.15 * std::sin(2 * pi * t) - 0.5;
            return x * x + y * y - (pi / 12) * (pi / 12);
          },
          {}};
}

}  // namespace

TEST_CASE("classification by lattice sampling") {
  const auto K = unit_triangle();
  CHECK(classify_element(K, constant(-1.0), 2) == ElementClass::Interior);
  CHECK(classify_element(K, constant(1.0), 2) == ElementClass::Exterior);
  CHECK(classify_element(K, affine(1, 0, -0.5), 0) == ElementClass::Cut);
  // Zero at a vertex counts as a sign change.
  CHECK(classify_element(K, affine(1, 0, 0), 0) == ElementClass::Cut);
  // A bump only visible on the refined lattice.
  const LevelSet bump{[](const Point& p) {
                        const double dx = p(0) - 1.0 / 3, dt = p(1) - 1.0 / 3;
                        return dx * dx + dt * dt - 0.01;
                      },
                      {}};
  CHECK(classify_element(K, bump, 0) == ElementClass::Exterior);
  CHECK(classify_element(K, bump, 3) == ElementClass::Cut);
}

TEST_CASE("cut volume of a half-plane in the unit triangle") {
  for (int depth = 1; depth <= 5; ++depth) {
    const auto rule = cut_volume_rule(unit_triangle(), affine(1, 0, -0.5), depth, 2);
    CHECK(rule.total_weight() == doctest::Approx(0.375).epsilon(1e-13));
    for (double w : rule.weights) CHECK(w >= 0.0);
    for (const Point& p : rule.points) CHECK(p(0) <= 0.5 + 1e-14);
  }
  CHECK(cut_volume_rule(unit_triangle(), constant(-1.0), 3, 2).total_weight() ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(cut_volume_rule(unit_triangle(), constant(1.0), 3, 2).empty());
}

TEST_CASE("quadratic moments are exact on the cut part") {
  // Integral of x^2 over {x < 0.5} in the unit triangle: int_0^0.5 x^2 (1 - x) dx.
  const auto rule = cut_volume_rule(unit_triangle(), affine(1, 0, -0.5), 3, 2);
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * rule.points[q](0) * rule.points[q](0);
  const double exact = std::pow(0.5, 3) / 3 - std::pow(0.5, 4) / 4;
  CHECK(s == doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("cut surface of a vertical line") {
  for (int depth = 1; depth <= 4; ++depth) {
    const auto rule = cut_surface_rule(unit_triangle(), affine(1, 0, -0.5), depth, 2);
    CHECK(rule.total_weight() == doctest::Approx(0.5).epsilon(1e-13));
    REQUIRE(rule.normals.size() == rule.size());
    for (const Point& n : rule.normals) {
      CHECK(n(0) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(std::abs(n(1)) < 1e-14);
    }
  }
}

TEST_CASE("cut surface of a translating boundary") {
  const auto rule = cut_surface_rule(unit_triangle(), affine(1, -1, -0.2), 3, 2);
  CHECK(rule.total_weight() == doctest::Approx(std::sqrt(2.0) * 0.4).epsilon(1e-13));
  for (const Point& n : rule.normals) {
    CHECK(n(0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-13));
    CHECK(n(1) == doctest::Approx(-1 / std::sqrt(2.0)).epsilon(1e-13));
  }
}

TEST_CASE("boundary facet rules") {
  const std::vector<Point> facet{pt(0, 0), pt(1, 0)};
  CHECK(boundary_facet_cut_rule(facet, affine(1, 0, -0.3), BoundaryTag::T0, 4, 2).total_weight() ==
        doctest::Approx(0.3).epsilon(1e-13));
  CHECK(boundary_facet_cut_rule(facet, constant(-1), BoundaryTag::T0, 4, 2).total_weight() ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(boundary_facet_cut_rule(facet, constant(1), BoundaryTag::T0, 4, 2).empty());
}

TEST_CASE("oscillating interval has space-time volume 0.4") {
  const Mesh mesh = build_cartesian_simplicial_mesh({{0.0}, {1.0}, 1.0}, {28, 28});
  const CutGeometry g(mesh, oscillating_interval());
  const double v4 = total_volume(g, 4);
  const double v6 = total_volume(g, 6);
  CHECK(std::abs(v4 - 0.4) < 1e-3);
  CHECK(std::abs(v6 - 0.4) < std::abs(v4 - 0.4) + 1e-12);
  CHECK(std::abs(v6 - 0.4) < 1e-4);
}

TEST_CASE("moving circle space-time volume at depth 5") {
  const Mesh mesh = uniform_refine(uniform_refine(build_cartesian_simplicial_mesh({{0, 0}, {1, 1}, 1.0}, {3, 3, 3})));
  GeometryOptions opt;
  opt.quadrature_depth = 5;
  const CutGeometry g(mesh, moving_circle(), opt);
  const double exact = std::pow(pi, 3) / 144;
  CHECK(std::abs(total_volume(g, 5) - exact) / exact < 1e-4);
}

TEST_CASE("stationary cylinder lateral area") {
  const double r = 0.3;
  const LevelSet phi{[=](const Point& p) {
                       const double x = p(0) - 0.5, y = p(1) - 0.5;
                       return x * x + y * y - r * r;
                     },
                     {}};
  const Mesh mesh = build_cartesian_simplicial_mesh({{0, 0}, {1, 1}, 1.0}, {8, 8, 2});
  const CutGeometry g(mesh, phi);
  const double exact = 2 * pi * r;
  CHECK(std::abs(total_surface(g, 5) - exact) / exact < 1e-3);
}

TEST_CASE("affine level set: exact surface measure and normals on a mesh") {
  // Plane x + 0.5 y - 0.3 t = 0.6 in the unit cube.
  const Mesh mesh = build_cartesian_simplicial_mesh({{0, 0}, {1, 1}, 1.0}, {3, 3, 3});
  const LevelSet phi{[](const Point& p) { return p(0) + 0.5 * p(1) - 0.3 * p(2) - 0.6; }, {}};
  const CutGeometry g(mesh, phi);
  Point n_exact(3);
  n_exact << 1.0, 0.5, -0.3;
  n_exact.normalize();
  double area = 0.0, vol = 0.0;
  for (int e : g.active_elements()) {
    const auto rules = g.element_rules(e, 2);
    vol += rules.volume.total_weight();
    area += rules.surface.total_weight();
    for (const Point& n : rules.surface.normals) CHECK((n - n_exact).norm() < 1e-12);
  }
  // Volume of {x < 0.6 - 0.5 y + 0.3 t} in the unit cube; the plane stays in x in [0.1, 0.9].
  CHECK(vol == doctest::Approx(0.6 - 0.25 + 0.15).epsilon(1e-12));
  // Graph area over the (y,t) square: sqrt(1 + 0.25 + 0.09).
  CHECK(area == doctest::Approx(std::sqrt(1.34)).epsilon(1e-12));
}

TEST_CASE("surface normals point out of the domain") {
  const Mesh mesh = build_cartesian_simplicial_mesh({{0.0}, {1.0}, 1.0}, {14, 14});
  const CutGeometry g(mesh, oscillating_interval());
  const double eps = 1e-6 * mesh.h();
  const LevelSet& phi = g.levelset();
  int checked = 0;
  for (int e : g.active_elements()) {
    if (g.label(e) != ElementClass::Cut) continue;
    const auto rules = g.element_rules(e);
    for (std::size_t q = 0; q < rules.surface.size(); ++q) {
      CHECK(rules.surface.normals[q].norm() == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(phi(rules.surface.points[q] + eps * rules.surface.normals[q]) >
            phi(rules.surface.points[q] - eps * rules.surface.normals[q]));
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("ghost faces") {
  SUBCASE("no cut elements") {
    const Mesh mesh = build_cartesian_simplicial_mesh({{0.0}, {1.0}, 1.0}, {4, 4});
    const CutGeometry g(mesh, constant(-1.0));
    CHECK(g.ghost_faces().empty());
    CHECK(g.num_cut() == 0);
  }
  SUBCASE("oscillating interval at h = 1/14") {
    const Mesh mesh = build_cartesian_simplicial_mesh({{0.0}, {1.0}, 1.0}, {14, 14});
    const CutGeometry g(mesh, oscillating_interval());
    REQUIRE(!g.ghost_faces().empty());
    for (int f : g.ghost_faces()) {
      const Face& face = mesh.face(f);
      REQUIRE(!face.is_boundary());
      CHECK(g.is_active(face.elements[0]));
      CHECK(g.is_active(face.elements[1]));
      CHECK((g.label(face.elements[0]) == ElementClass::Cut ||
             g.label(face.elements[1]) == ElementClass::Cut));
    }
    CHECK(g.check_cut_connectivity().ok(4));
  }
}

TEST_CASE("domain containment") {
  const Mesh mesh = build_cartesian_simplicial_mesh({{0.0}, {1.0}, 1.0}, {8, 8});
  CHECK_NOTHROW(CutGeometry(mesh, oscillating_interval()).check_domain_contained());
  CHECK_THROWS_AS(CutGeometry(mesh, affine(1, 0, -0.5)).check_domain_contained(), GeometryError);
}

TEST_CASE("finite-difference gradient of a level set") {
  const LevelSet phi = oscillating_interval();
  const Point p = pt(0.41, 0.27);
  const double v = pi * std::sin(2 * pi * 0.27) / 20;
  const double dv = pi * pi * std::cos(2 * pi * 0.27) / 10;
  const double gx = 2 * 0.41 - 1.0 - 2 * v;
  const double gt = -dv * (2 * 0.41 - 1.0 - 2 * v);
  const Point g = phi.grad(p, 0.1);
  CHECK(g(0) == doctest::Approx(gx).epsilon(1e-6));
  CHECK(g(1) == doctest::Approx(gt).epsilon(1e-6));
}
