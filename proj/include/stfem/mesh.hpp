#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace stfem {

/// Point in space-time, ordered (x_1, ..., x_d, t). At most three components.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The background box Omega~ x (0, T).
struct SpaceTimeBox {
  std::vector<double> spatial_lo;
  std::vector<double> spatial_hi;
  double t_final = 1.0;

  int spatial_dim() const { return static_cast<int>(spatial_lo.size()); }
  int dim() const { return spatial_dim() + 1; }
  double volume() const;
  /// Throws MeshError when the box is empty or malformed.
  void validate() const;
};

enum class BoundaryTag { None, T0, TT, Lateral };

struct Face {
  std::array<int, 3> vertices{-1, -1, -1};
  /// elements[1] is -1 for boundary faces.
  std::array<int, 2> elements{-1, -1};
  /// Unit normal. Interior faces: points from elements[0] into elements[1],
  /// so elements[1] is the "+" side of the jump [w] = w+ - w-. Boundary faces:
  /// outward to the box.
  Point normal;
  double measure = 0.0;
  BoundaryTag tag = BoundaryTag::None;

  bool is_boundary() const { return elements[1] < 0; }
};

/// Conforming simplicial mesh of a space-time box (triangles for dim 2,
/// tetrahedra for dim 3). Immutable once built.
///
/// Element vertex order is kept as produced by the builder so that red
/// refinement reproduces the finer structured mesh.
class Mesh {
 public:
  using Element = std::array<int, 4>;

  /// Builds connectivity for an explicit vertex/element list. Throws
  /// MeshError for degenerate elements or non-conforming input.
  Mesh(SpaceTimeBox box, std::vector<Point> vertices, std::vector<Element> elements);

  int dim() const { return dim_; }
  const SpaceTimeBox& box() const { return box_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_elements() const { return elements_.size(); }
  std::size_t num_faces() const { return faces_.size(); }

  const Point& vertex(int v) const { return vertices_[v]; }
  const std::vector<Point>& vertices() const { return vertices_; }
  std::span<const int> element(int e) const {
    return {elements_[e].data(), static_cast<std::size_t>(dim_ + 1)};
  }
  const Element& element_array(int e) const { return elements_[e]; }
  std::span<const int> element_faces(int e) const {
    return {element_faces_[e].data(), static_cast<std::size_t>(dim_ + 1)};
  }
  const Face& face(int f) const { return faces_[f]; }
  const std::vector<Face>& faces() const { return faces_; }

  double volume(int e) const { return volumes_[e]; }
  double diameter(int e) const { return diameters_[e]; }
  /// Global mesh size: max element diameter.
  double h() const { return h_; }
  double min_diameter() const { return h_min_; }

  /// Vertices of element e in their stored order.
  std::vector<Point> element_vertices(int e) const;

  /// Grid spacing per axis for meshes produced by the structured builder
  /// (halved by each refinement); empty otherwise.
  const std::vector<double>& grid_spacing() const { return grid_spacing_; }
  /// max(grid_spacing), or h() for unstructured input.
  double cell_size() const;

 private:
  friend Mesh build_cartesian_simplicial_mesh(const SpaceTimeBox&, const std::vector<int>&);
  friend Mesh uniform_refine(const Mesh&);

  void build_connectivity();

  int dim_ = 0;
  SpaceTimeBox box_;
  std::vector<Point> vertices_;
  std::vector<Element> elements_;
  std::vector<Element> element_faces_;
  std::vector<Face> faces_;
  std::vector<double> volumes_;
  std::vector<double> diameters_;
  double h_ = 0.0;
  double h_min_ = 0.0;
  std::vector<double> grid_spacing_;
};

/// Cartesian grid of the box split into simplices: two triangles per
/// rectangle along the (0,0)-(1,1) diagonal, or six Kuhn tetrahedra per
/// cuboid (all sharing the main diagonal). n_cells has one entry per
/// space-time axis.
Mesh build_cartesian_simplicial_mesh(const SpaceTimeBox& box, const std::vector<int>& n_cells);

/// Red refinement: 1 -> 4 triangles, 1 -> 8 tetrahedra (Bey's rule, interior
/// diagonal between the midpoints of edges 0-2 and 1-3).
Mesh uniform_refine(const Mesh& mesh);

/// Legacy VTK ASCII dump; optional point/cell scalar fields.
struct VtkField {
  std::string name;
  std::vector<double> values;
};
void write_vtk(std::ostream& out, const Mesh& mesh, const std::vector<VtkField>& point_data = {},
               const std::vector<VtkField>& cell_data = {},
               const std::vector<int>& cells = {});

/// Measure of the simplex spanned by `vertices` (k+1 points in R^m, m >= k).
double simplex_measure(std::span<const Point> vertices);

}  // namespace stfem
