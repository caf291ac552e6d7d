#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "stfem/mesh.hpp"

using namespace stfem;

namespace {

SpaceTimeBox unit_box(int d) {
  return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0), 1.0};
}

double total_volume(const Mesh& m) {
  double s = 0.0;
  for (std::size_t e = 0; e < m.num_elements(); ++e) s += m.volume(static_cast<int>(e));
  return s;
}

int interior_faces(const Mesh& m) {
  int n = 0;
  for (const auto& f : m.faces()) n += f.is_boundary() ? 0 : 1;
  return n;
}

}  // namespace

TEST_CASE("smallest triangle grid") {
  const Mesh m = build_cartesian_simplicial_mesh(unit_box(1), {1, 1});
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_elements() == 2);
  CHECK(m.num_faces() == 5);
  CHECK(interior_faces(m) == 1);
  for (const auto& f : m.faces()) {
    if (f.is_boundary()) continue;
    CHECK(std::abs(std::abs(f.normal(0)) - 1.0 / std::sqrt(2.0)) < 1e-14);
    CHECK(f.normal(0) * f.normal(1) < 0.0);
  }
}

TEST_CASE("single cuboid gives six Kuhn tetrahedra") {
  const Mesh m = build_cartesian_simplicial_mesh(unit_box(2), {1, 1, 1});
  CHECK(m.num_vertices() == 8);
  CHECK(m.num_elements() == 6);
  CHECK(m.num_faces() == 18);
  CHECK(interior_faces(m) == 6);
  CHECK(total_volume(m) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stefan background grid counts") {
  const SpaceTimeBox box{{0.0}, {1.5}, 1.0};
  const Mesh m = build_cartesian_simplicial_mesh(box, {12, 8});
  CHECK(m.num_vertices() == 117);
  CHECK(m.num_elements() == 192);
  CHECK(m.grid_spacing()[1] == doctest::Approx(1.0 / 8));
}

TEST_CASE("boundary tags and normals") {
  const Mesh m = build_cartesian_simplicial_mesh(unit_box(2), {2, 2, 2});
  for (const auto& f : m.faces()) {
    if (!f.is_boundary()) {
      CHECK(f.tag == BoundaryTag::None);
      continue;
    }
    CHECK(f.tag != BoundaryTag::None);
    CHECK(f.normal.norm() == doctest::Approx(1.0));
    if (f.tag == BoundaryTag::T0) CHECK(f.normal(2) == doctest::Approx(-1.0));
    if (f.tag == BoundaryTag::TT) CHECK(f.normal(2) == doctest::Approx(1.0));
    if (f.tag == BoundaryTag::Lateral) CHECK(std::abs(f.normal(2)) < 1e-14);
  }
}

TEST_CASE("face adjacency is symmetric") {
  const Mesh m = build_cartesian_simplicial_mesh(unit_box(2), {2, 3, 2});
  for (std::size_t f = 0; f < m.num_faces(); ++f) {
    for (int e : m.face(static_cast<int>(f)).elements) {
      if (e < 0) continue;
      const auto ef = m.element_faces(e);
      CHECK(std::find(ef.begin(), ef.end(), static_cast<int>(f)) != ef.end());
    }
  }
}

TEST_CASE("refinement of triangles") {
  const Mesh m = uniform_refine(build_cartesian_simplicial_mesh(unit_box(1), {1, 1}));
  CHECK(m.num_elements() == 8);
  CHECK(m.num_vertices() == 9);
  CHECK(total_volume(m) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("refinement of tetrahedra") {
  const Mesh m = uniform_refine(build_cartesian_simplicial_mesh(unit_box(2), {1, 1, 1}));
  CHECK(m.num_elements() == 48);
  CHECK(m.num_vertices() == 27);
  CHECK(total_volume(m) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("refining a structured mesh gives the finer structured mesh") {
  for (int d : {1, 2}) {
    const std::vector<int> n = d == 1 ? std::vector<int>{3, 2} : std::vector<int>{3, 3, 3};
    std::vector<int> n4;
    for (int k : n) n4.push_back(4 * k);
    const Mesh coarse = uniform_refine(uniform_refine(build_cartesian_simplicial_mesh(unit_box(d), n)));
    const Mesh fine = build_cartesian_simplicial_mesh(unit_box(d), n4);
    REQUIRE(coarse.num_elements() == fine.num_elements());
    CHECK(coarse.num_vertices() == fine.num_vertices());
    CHECK(coarse.h() == doctest::Approx(fine.h()).epsilon(1e-14));
    CHECK(coarse.min_diameter() == doctest::Approx(fine.min_diameter()).epsilon(1e-14));
    // Same set of elements up to vertex identity (compared by sorted coordinates).
    auto signature = [](const Mesh& m) {
      std::multiset<std::vector<long>> s;
      for (std::size_t e = 0; e < m.num_elements(); ++e) {
        std::vector<long> key;
        std::vector<std::vector<long>> pts;
        for (const Point& p : m.element_vertices(static_cast<int>(e))) {
          std::vector<long> c;
          for (int i = 0; i < p.size(); ++i) c.push_back(std::lround(p(i) * 1200));
          pts.push_back(c);
        }
        std::sort(pts.begin(), pts.end());
        for (auto& c : pts) key.insert(key.end(), c.begin(), c.end());
        s.insert(key);
      }
      return s;
    };
    CHECK(signature(coarse) == signature(fine));
  }
}

TEST_CASE("moving circle mesh after two refinements has h of a 12-grid") {
  const Mesh m = uniform_refine(uniform_refine(build_cartesian_simplicial_mesh(unit_box(2), {3, 3, 3})));
  CHECK(m.grid_spacing()[0] == doctest::Approx(1.0 / 12));
  CHECK(m.cell_size() == doctest::Approx(1.0 / 12));
  CHECK(m.h() == doctest::Approx(std::sqrt(3.0) / 12));
}

TEST_CASE("diameter ratio is constant under refinement") {
  Mesh m = build_cartesian_simplicial_mesh(SpaceTimeBox{{0.0}, {1.5}, 1.0}, {12, 8});
  const double ratio = m.h() / m.min_diameter();
  for (int k = 0; k < 2; ++k) {
    m = uniform_refine(m);
    CHECK(m.h() / m.min_diameter() == doctest::Approx(ratio));
  }
}

TEST_CASE("invalid input is rejected") {
  CHECK_THROWS_AS(build_cartesian_simplicial_mesh(unit_box(1), {0, 1}), MeshError);
  CHECK_THROWS_AS(build_cartesian_simplicial_mesh(unit_box(1), {1, 1, 1}), MeshError);
  CHECK_THROWS_AS(build_cartesian_simplicial_mesh(unit_box(3), {1, 1, 1, 1}), MeshError);
  SpaceTimeBox bad{{1.0}, {0.0}, 1.0};
  CHECK_THROWS_AS(bad.validate(), MeshError);
  // Degenerate triangle.
  std::vector<Point> v(3, Point::Zero(2));
  v[1] << 1.0, 0.0;
  v[2] << 2.0, 0.0;
  CHECK_THROWS_AS(Mesh(unit_box(1), v, {{0, 1, 2, -1}}), MeshError);
}

TEST_CASE("vtk writer emits cells and fields") {
  const Mesh m = build_cartesian_simplicial_mesh(unit_box(1), {1, 1});
  std::ostringstream os;
  write_vtk(os, m, {{"u", {1, 2, 3, 4}}}, {{"cls", {0, 1}}});
  const std::string s = os.str();
  CHECK(s.find("# vtk DataFile Version") == 0);
  CHECK(s.find("CELLS 2 8") != std::string::npos);
  CHECK(s.find("CELL_TYPES 2") != std::string::npos);
  CHECK(s.find("SCALARS u double") != std::string::npos);
  CHECK(s.find("SCALARS cls double") != std::string::npos);
}
