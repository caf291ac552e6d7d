#pragma once

#include <functional>
#include <span>
#include <vector>

#include "stfem/mesh.hpp"
#include "stfem/quadrature.hpp"

namespace stfem {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

/// phi(x, t): the moving domain is {phi < 0}, its lateral boundary {phi = 0}.
struct LevelSet {
  ScalarField value;
  /// Space-time gradient (grad_x phi, d_t phi). Central differences are used
  /// when left empty.
  VectorField gradient;

  double operator()(const Point& p) const { return value(p); }
  /// Gradient at p; `h` is the mesh size used to scale the difference step.
  Point grad(const Point& p, double h = 1.0) const;
};

enum class ElementClass { Interior, Cut, Exterior };

/// |phi| below this counts as zero, i.e. as a sign change.
inline constexpr double kSignTolerance = 1e-14;

/// Sign sampling on the uniform subdivision lattice of the simplex (depth 0
/// samples the vertices only).
ElementClass classify_element(std::span<const Point> simplex, const LevelSet& phi, int depth);

struct CutRules {
  QuadratureRule volume;   ///< over K cap {phi < 0}
  QuadratureRule surface;  ///< over K cap {phi = 0}, with normals
};

/// Volume and surface rules on a simplex from the piecewise-linear
/// interpolant of phi on its depth-`depth` red refinement. Sub-simplices on
/// which phi keeps a strict sign at every lattice point are integrated (or
/// skipped) whole, the rest are refined down to `depth` and sliced by the
/// zero plane of the interpolant.
///
/// Normals are the unit gradients of the interpolant, pointing from
/// {phi < 0} to {phi > 0}. `surface` is only filled for full-dimensional
/// simplices (k equal to the ambient dimension).
CutRules cut_rules(std::span<const Point> simplex, const LevelSet& phi, int depth, int order,
                   bool want_surface = true);

QuadratureRule cut_volume_rule(std::span<const Point> simplex, const LevelSet& phi, int depth,
                               int order);
QuadratureRule cut_surface_rule(std::span<const Point> simplex, const LevelSet& phi, int depth,
                                int order);

/// Rule over facet cap Omega(0) x {0} (or Omega(T) x {T}); `facet` must lie on
/// the plane selected by `which`.
QuadratureRule boundary_facet_cut_rule(std::span<const Point> facet, const LevelSet& phi,
                                       BoundaryTag which, int depth, int order);

struct GeometryOptions {
  int classification_depth = 2;
  int quadrature_depth = 4;
  int order = 2;
};

/// Interior faces between two active elements, at least one of them Cut,
/// whose sample lattice meets {phi <= 0}.
std::vector<int> ghost_face_set(const Mesh& mesh, const std::vector<ElementClass>& labels,
                                const std::vector<char>& active, const LevelSet& phi, int depth);

/// Face-path distance from each cut element to the nearest interior element.
struct CutConnectivityReport {
  int max_path_length = 0;   ///< in elements, counting both ends
  int unreachable = 0;       ///< cut elements with no path to an interior element
  bool ok(int bound) const { return unreachable == 0 && max_path_length <= bound; }
};

/// Classification, active set and ghost faces of a level set on a mesh, with
/// per-element rule construction on demand.
class CutGeometry {
 public:
  CutGeometry(const Mesh& mesh, LevelSet phi, GeometryOptions options = {});
  CutGeometry(Mesh&&, LevelSet, GeometryOptions = {}) = delete;

  const Mesh& mesh() const { return *mesh_; }
  const LevelSet& levelset() const { return phi_; }
  const GeometryOptions& options() const { return options_; }

  ElementClass label(int e) const { return labels_[e]; }
  const std::vector<ElementClass>& labels() const { return labels_; }
  /// Interior elements plus Cut elements whose interpolated domain has
  /// positive measure.
  bool is_active(int e) const { return active_[e] != 0; }
  const std::vector<char>& active_mask() const { return active_; }
  const std::vector<int>& active_elements() const { return active_elements_; }
  const std::vector<int>& ghost_faces() const { return ghost_faces_; }
  std::size_t num_cut() const;

  /// Rules for element e at the given depth (quadrature depth when < 0).
  CutRules element_rules(int e, int depth = -1, bool want_surface = true) const;
  /// Rule over the part of boundary face f (tag T0 or TT) inside the domain.
  QuadratureRule facet_rule(int f, int depth = -1) const;
  /// Boundary faces tagged `which` whose element is active.
  std::vector<int> active_boundary_faces(BoundaryTag which) const;

  CutConnectivityReport check_cut_connectivity() const;
  /// Throws GeometryError when {phi < 0} reaches the lateral box boundary.
  void check_domain_contained() const;

 private:
  const Mesh* mesh_;
  LevelSet phi_;
  GeometryOptions options_;
  std::vector<ElementClass> labels_;
  std::vector<char> active_;
  std::vector<int> active_elements_;
  std::vector<int> ghost_faces_;
};

}  // namespace stfem
