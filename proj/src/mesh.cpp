#include "stfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <unordered_map>

#include <Eigen/Dense>

namespace stfem {

namespace {

struct FaceKeyHash {
  std::size_t operator()(const std::array<int, 3>& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (int v : k) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

Point face_normal(std::span<const Point> fv) {
  const int dim = static_cast<int>(fv[0].size());
  Point n(dim);
  if (dim == 2) {
    const Point e = fv[1] - fv[0];
    n << e(1), -e(0);
  } else {
    const Eigen::Vector3d a = fv[1] - fv[0];
    const Eigen::Vector3d b = fv[2] - fv[0];
    n = a.cross(b);
  }
  return n / n.norm();
}

}  // namespace

double simplex_measure(std::span<const Point> vertices) {
  const int k = static_cast<int>(vertices.size()) - 1;
  if (k == 0) return 1.0;
  const int m = static_cast<int>(vertices[0].size());
  Eigen::MatrixXd edges(m, k);
  for (int i = 0; i < k; ++i) edges.col(i) = vertices[i + 1] - vertices[0];
  double factorial = 1.0;
  for (int i = 2; i <= k; ++i) factorial *= i;
  if (m == k) return std::abs(edges.determinant()) / factorial;
  const double gram = (edges.transpose() * edges).determinant();
  return std::sqrt(std::max(gram, 0.0)) / factorial;
}

double SpaceTimeBox::volume() const {
  double v = t_final;
  for (int i = 0; i < spatial_dim(); ++i) v *= spatial_hi[i] - spatial_lo[i];
  return v;
}

void SpaceTimeBox::validate() const {
  if (spatial_lo.size() != spatial_hi.size() || spatial_lo.empty())
    throw MeshError("space-time box: spatial bounds must be non-empty and of equal length");
  if (dim() != 2 && dim() != 3)
    throw MeshError("space-time box: space-time dimension must be 2 or 3");
  for (int i = 0; i < spatial_dim(); ++i) {
    if (!(spatial_lo[i] < spatial_hi[i]))
      throw MeshError("space-time box: spatial_lo must be below spatial_hi on every axis");
  }
  if (!(t_final > 0.0)) throw MeshError("space-time box: t_final must be positive");
}

Mesh::Mesh(SpaceTimeBox box, std::vector<Point> vertices, std::vector<Element> elements)
    : box_(std::move(box)), vertices_(std::move(vertices)), elements_(std::move(elements)) {
  box_.validate();
  dim_ = box_.dim();
  for (const auto& p : vertices_) {
    if (p.size() != dim_) throw MeshError("mesh: vertex dimension does not match the box");
  }
  for (const auto& el : elements_) {
    for (int i = 0; i <= dim_; ++i) {
      if (el[i] < 0 || el[i] >= static_cast<int>(vertices_.size()))
        throw MeshError("mesh: element references a missing vertex");
    }
  }
  build_connectivity();
}

std::vector<Point> Mesh::element_vertices(int e) const {
  std::vector<Point> out;
  out.reserve(dim_ + 1);
  for (int v : element(e)) out.push_back(vertices_[v]);
  return out;
}

double Mesh::cell_size() const {
  if (grid_spacing_.empty()) return h_;
  return *std::max_element(grid_spacing_.begin(), grid_spacing_.end());
}

void Mesh::build_connectivity() {
  const int nv = dim_ + 1;
  const std::size_t ne = elements_.size();
  volumes_.resize(ne);
  diameters_.resize(ne);
  element_faces_.assign(ne, Element{-1, -1, -1, -1});
  faces_.clear();
  h_ = 0.0;
  h_min_ = std::numeric_limits<double>::infinity();

  std::unordered_map<std::array<int, 3>, int, FaceKeyHash> lookup;
  lookup.reserve(ne * nv);

  std::vector<Point> verts(nv);
  for (std::size_t e = 0; e < ne; ++e) {
    for (int i = 0; i < nv; ++i) verts[i] = vertices_[elements_[e][i]];
    volumes_[e] = simplex_measure(verts);
    double diam = 0.0;
    for (int i = 0; i < nv; ++i)
      for (int j = i + 1; j < nv; ++j) diam = std::max(diam, (verts[i] - verts[j]).norm());
    diameters_[e] = diam;
    if (!(volumes_[e] > 1e-14 * std::pow(diam, dim_)))
      throw MeshError("mesh: degenerate element " + std::to_string(e));
    h_ = std::max(h_, diam);
    h_min_ = std::min(h_min_, diam);

    for (int local = 0; local < nv; ++local) {
      std::array<int, 3> key{-1, -1, -1};
      int k = 0;
      for (int i = 0; i < nv; ++i)
        if (i != local) key[k++] = elements_[e][i];
      std::sort(key.begin(), key.begin() + dim_);
      auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(faces_.size()));
      if (inserted) {
        Face f;
        f.vertices = key;
        f.elements = {static_cast<int>(e), -1};
        faces_.push_back(f);
      } else {
        Face& f = faces_[it->second];
        if (f.elements[1] >= 0)
          throw MeshError("mesh: non-conforming input, face shared by more than two elements");
        f.elements[1] = static_cast<int>(e);
      }
      element_faces_[e][local] = it->second;
    }
  }

  const double t_tol = 1e-12 * box_.t_final;
  std::vector<Point> fv(dim_);
  for (Face& f : faces_) {
    for (int i = 0; i < dim_; ++i) fv[i] = vertices_[f.vertices[i]];
    f.measure = simplex_measure(fv);
    f.normal = face_normal(fv);

    Point centroid = Point::Zero(dim_);
    for (const auto& p : fv) centroid += p;
    centroid /= dim_;
    Point inner = Point::Zero(dim_);
    for (int v : element(f.elements[0])) inner += vertices_[v];
    inner /= nv;
    if (f.normal.dot(centroid - inner) < 0.0) f.normal = -f.normal;

    if (!f.is_boundary()) continue;
    auto all_t = [&](double t) {
      return std::all_of(fv.begin(), fv.end(),
                         [&](const Point& p) { return std::abs(p(dim_ - 1) - t) <= t_tol; });
    };
    if (all_t(0.0)) {
      f.tag = BoundaryTag::T0;
    } else if (all_t(box_.t_final)) {
      f.tag = BoundaryTag::TT;
    } else {
      bool lateral = false;
      for (int ax = 0; ax < box_.spatial_dim() && !lateral; ++ax) {
        const double tol = 1e-12 * (box_.spatial_hi[ax] - box_.spatial_lo[ax]);
        for (double side : {box_.spatial_lo[ax], box_.spatial_hi[ax]}) {
          if (std::all_of(fv.begin(), fv.end(),
                          [&](const Point& p) { return std::abs(p(ax) - side) <= tol; }))
            lateral = true;
        }
      }
      if (!lateral)
        throw MeshError("mesh: non-conforming input, boundary face inside the box");
      f.tag = BoundaryTag::Lateral;
    }
  }
}

Mesh build_cartesian_simplicial_mesh(const SpaceTimeBox& box, const std::vector<int>& n_cells) {
  box.validate();
  const int dim = box.dim();
  if (static_cast<int>(n_cells.size()) != dim)
    throw MeshError("cartesian mesh: need one cell count per space-time axis");
  for (int n : n_cells) {
    if (n < 1) throw MeshError("cartesian mesh: cell counts must be positive");
  }

  std::vector<double> lo(dim), hi(dim);
  for (int i = 0; i + 1 < dim; ++i) {
    lo[i] = box.spatial_lo[i];
    hi[i] = box.spatial_hi[i];
  }
  lo[dim - 1] = 0.0;
  hi[dim - 1] = box.t_final;

  std::vector<int> stride(dim, 1);
  for (int i = 1; i < dim; ++i) stride[i] = stride[i - 1] * (n_cells[i - 1] + 1);
  const int n_vertices = stride[dim - 1] * (n_cells[dim - 1] + 1);

  std::vector<Point> vertices(n_vertices, Point(dim));
  for (int v = 0; v < n_vertices; ++v) {
    int rem = v;
    for (int ax = dim - 1; ax >= 0; --ax) {
      const int idx = rem / stride[ax];
      rem -= idx * stride[ax];
      // Exact end points; interior points from the integer index.
      vertices[v](ax) = idx == n_cells[ax] ? hi[ax]
                                           : lo[ax] + (hi[ax] - lo[ax]) * idx / n_cells[ax];
    }
  }

  std::vector<Mesh::Element> elements;
  if (dim == 2) {
    elements.reserve(2 * n_cells[0] * n_cells[1]);
    for (int j = 0; j < n_cells[1]; ++j) {
      for (int i = 0; i < n_cells[0]; ++i) {
        const int v00 = i + stride[1] * j;
        const int v10 = v00 + 1;
        const int v01 = v00 + stride[1];
        const int v11 = v01 + 1;
        elements.push_back({v00, v10, v11, -1});
        elements.push_back({v00, v01, v11, -1});
      }
    }
  } else {
    // Kuhn split: one tetrahedron per axis ordering, following a monotone
    // vertex path from the cuboid's low corner to its high corner.
    static constexpr std::array<std::array<int, 3>, 6> perms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    elements.reserve(6 * n_cells[0] * n_cells[1] * n_cells[2]);
    for (int k = 0; k < n_cells[2]; ++k) {
      for (int j = 0; j < n_cells[1]; ++j) {
        for (int i = 0; i < n_cells[0]; ++i) {
          const int base = i + stride[1] * j + stride[2] * k;
          for (const auto& perm : perms) {
            Mesh::Element el{base, 0, 0, 0};
            int cur = base;
            for (int s = 0; s < 3; ++s) {
              cur += stride[perm[s]];
              el[s + 1] = cur;
            }
            elements.push_back(el);
          }
        }
      }
    }
  }

  Mesh mesh(box, std::move(vertices), std::move(elements));
  mesh.grid_spacing_.resize(dim);
  for (int ax = 0; ax < dim; ++ax) mesh.grid_spacing_[ax] = (hi[ax] - lo[ax]) / n_cells[ax];
  return mesh;
}

Mesh uniform_refine(const Mesh& mesh) {
  const int dim = mesh.dim();
  std::vector<Point> vertices = mesh.vertices();
  std::map<std::pair<int, int>, int> midpoint_of;

  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto [it, inserted] = midpoint_of.try_emplace(key, static_cast<int>(vertices.size()));
    if (inserted) vertices.push_back(0.5 * (mesh.vertex(a) + mesh.vertex(b)));
    return it->second;
  };

  std::vector<Mesh::Element> children;
  children.reserve(mesh.num_elements() * (dim == 2 ? 4 : 8));
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& x = mesh.element_array(static_cast<int>(e));
    if (dim == 2) {
      const int m01 = midpoint(x[0], x[1]);
      const int m02 = midpoint(x[0], x[2]);
      const int m12 = midpoint(x[1], x[2]);
      children.push_back({x[0], m01, m02, -1});
      children.push_back({m01, x[1], m12, -1});
      children.push_back({m02, m12, x[2], -1});
      children.push_back({m01, m02, m12, -1});
    } else {
      const int m01 = midpoint(x[0], x[1]);
      const int m02 = midpoint(x[0], x[2]);
      const int m03 = midpoint(x[0], x[3]);
      const int m12 = midpoint(x[1], x[2]);
      const int m13 = midpoint(x[1], x[3]);
      const int m23 = midpoint(x[2], x[3]);
      children.push_back({x[0], m01, m02, m03});
      children.push_back({m01, x[1], m12, m13});
      children.push_back({m02, m12, x[2], m23});
      children.push_back({m03, m13, m23, x[3]});
      children.push_back({m01, m02, m03, m13});
      children.push_back({m01, m02, m12, m13});
      children.push_back({m02, m03, m13, m23});
      children.push_back({m02, m12, m13, m23});
    }
  }

  Mesh fine(mesh.box(), std::move(vertices), std::move(children));
  fine.grid_spacing_ = mesh.grid_spacing();
  for (double& s : fine.grid_spacing_) s *= 0.5;
  return fine;
}

void write_vtk(std::ostream& out, const Mesh& mesh, const std::vector<VtkField>& point_data,
               const std::vector<VtkField>& cell_data, const std::vector<int>& cells) {
  const int dim = mesh.dim();
  std::vector<int> cell_ids = cells;
  if (cell_ids.empty()) {
    cell_ids.resize(mesh.num_elements());
    for (std::size_t e = 0; e < cell_ids.size(); ++e) cell_ids[e] = static_cast<int>(e);
  }
  const auto old_precision = out.precision(17);
  out << "# vtk DataFile Version 3.0\n"
      << "space-time unfitted FEM output\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.vertices()) {
    // 1D+time meshes are written in the (x, t) plane, 2D+time as (x, y, t).
    out << p(0) << ' ' << p(1) << ' ' << (dim == 3 ? p(2) : 0.0) << '\n';
  }
  const int nv = dim + 1;
  out << "CELLS " << cell_ids.size() << ' ' << cell_ids.size() * (nv + 1) << '\n';
  for (int e : cell_ids) {
    out << nv;
    for (int v : mesh.element(e)) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << cell_ids.size() << '\n';
  for (std::size_t i = 0; i < cell_ids.size(); ++i) out << (dim == 2 ? 5 : 10) << '\n';

  if (!point_data.empty()) {
    out << "POINT_DATA " << mesh.num_vertices() << '\n';
    for (const auto& field : point_data) {
      out << "SCALARS " << field.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : field.values) out << v << '\n';
    }
  }
  if (!cell_data.empty()) {
    out << "CELL_DATA " << cell_ids.size() << '\n';
    for (const auto& field : cell_data) {
      out << "SCALARS " << field.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : field.values) out << v << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace stfem
