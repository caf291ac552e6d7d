#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "stfem/geometry.hpp"
#include "stfem/mesh.hpp"
#include "stfem/problem.hpp"

namespace stfem {

class FemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Continuous P1 space on the active elements; one dof per active vertex.
class FeSpace {
 public:
  FeSpace(const Mesh& mesh, const CutGeometry& geometry);

  const Mesh& mesh() const { return *mesh_; }
  int num_dofs() const { return static_cast<int>(vertex_of_dof_.size()); }
  /// Dof of a mesh vertex, -1 when the vertex touches no active element.
  int dof(int vertex) const { return dof_of_vertex_[vertex]; }
  int vertex_of_dof(int d) const { return vertex_of_dof_[d]; }
  const std::vector<int>& active_elements() const { return active_elements_; }
  bool is_active(int e) const { return slot_[e] >= 0; }

  int nodes_per_element() const { return mesh_->dim() + 1; }
  std::array<int, 4> element_dofs(int e) const;
  /// Constant space-time gradients (grad_x, d_t) of the element's barycentric
  /// basis functions. Valid for active elements.
  const std::array<Point, 4>& gradients(int e) const { return gradients_[slot_[e]]; }
  std::array<double, 4> basis_values(int e, const Point& q) const;

  double evaluate(int e, const Eigen::VectorXd& coeffs, const Point& q) const;
  /// Space-time gradient of the discrete function on element e.
  Point gradient(int e, const Eigen::VectorXd& coeffs) const;

 private:
  const Mesh* mesh_;
  std::vector<int> dof_of_vertex_;
  std::vector<int> vertex_of_dof_;
  std::vector<int> active_elements_;
  std::vector<int> slot_;
  std::vector<std::array<Point, 4>> gradients_;
};

/// Throws FemError when the active mesh is empty.
FeSpace build_fe_space(const Mesh& mesh, const CutGeometry& geometry);

/// A u = b over the dofs of an FeSpace. Rows are test functions, columns
/// trial functions.
struct LinearSystem {
  SparseMatrix A;
  Eigen::VectorXd b;
  int size() const { return static_cast<int>(b.size()); }
};

/// Triplets and right-hand side collected by the assembly kernels.
class AssemblyBuffer {
 public:
  explicit AssemblyBuffer(int n) : rhs_(Eigen::VectorXd::Zero(n)) {}
  void add(int row, int col, double value) { triplets_.emplace_back(row, col, value); }
  void add_rhs(int row, double value) { rhs_(row) += value; }
  const std::vector<Eigen::Triplet<double>>& triplets() const { return triplets_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }
  /// Sorts triplets by (row, col) and sums duplicates.
  LinearSystem finish() &&;

 private:
  std::vector<Eigen::Triplet<double>> triplets_;
  Eigen::VectorXd rhs_;
};

/// Dense local block of one element; rows are test functions. Only the
/// leading n x n part is used.
struct ElementContribution {
  int n = 0;
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  Eigen::Vector4d b = Eigen::Vector4d::Zero();

  explicit ElementContribution(int nodes) : n(nodes) {}
  void scatter(const std::array<int, 4>& dofs, AssemblyBuffer& out) const;
};

ElementContribution interior_element_terms(const FeSpace& space, const ProblemSpec& problem, int e,
                                           const QuadratureRule& volume);
/// `scale` is delta h^2.
ElementContribution supg_element_terms(const FeSpace& space, const ProblemSpec& problem, int e,
                                       const QuadratureRule& volume, double scale);
ElementContribution nitsche_element_terms(const FeSpace& space, const ProblemSpec& problem, int e,
                                          const QuadratureRule& surface, double h);
ElementContribution initial_facet_terms(const FeSpace& space, const ProblemSpec& problem, int e,
                                        const QuadratureRule& facet);

/// (u_t, v)_Q + (a grad_x u, grad_x v)_Q and (f, v)_Q.
void assemble_interior_terms(const FeSpace& space, const ProblemSpec& problem,
                             const CutGeometry& geometry, AssemblyBuffer& out);
/// Symmetric Nitsche terms on the moving boundary with penalty gamma / h.
void assemble_nitsche_terms(const FeSpace& space, const ProblemSpec& problem,
                            const CutGeometry& geometry, double h, AssemblyBuffer& out);
/// <u, v> and <u0, v> on Omega(0) x {0}.
void assemble_initial_final_terms(const FeSpace& space, const ProblemSpec& problem,
                                  const CutGeometry& geometry, AssemblyBuffer& out);
/// delta h^2 (u_t - grad_x a . grad_x u, v_t) and delta h^2 (f, v_t) over the
/// cut parts of all active elements.
void assemble_supg_terms(const FeSpace& space, const ProblemSpec& problem,
                         const CutGeometry& geometry, double h, double delta, AssemblyBuffer& out);
/// gamma1 h sum_F |F| [d_nF u][d_nF v] over the ghost-penalty faces.
void assemble_ghost_penalty(const FeSpace& space, const CutGeometry& geometry, double h,
                            double gamma1, AssemblyBuffer& out);

/// Full system A_h(u, v) + g_h(u, v) = l_h(v). Checks that the domain stays
/// inside the box. `h` is the global mesh size used by all penalty scalings.
LinearSystem assemble_system(const ProblemSpec& problem, const CutGeometry& geometry,
                             const FeSpace& space, double h);

/// Geometry, space and assembled system for one mesh.
struct Discretization {
  CutGeometry geometry;
  FeSpace space;
  LinearSystem system;
  double h;
};

/// `h` is the penalty length; the max element diameter when not positive.
Discretization discretize(const ProblemSpec& problem, const Mesh& mesh,
                          const GeometryOptions& options = {}, double h = -1.0);
/// The discretization refers to the mesh, which must outlive it.
Discretization discretize(const ProblemSpec& problem, Mesh&& mesh,
                          const GeometryOptions& options = {}, double h = -1.0) = delete;

/// Components of the discrete energy norm |||v|||_h, each a norm (not squared).
struct EnergyNormReport {
  double diffusion = 0.0;         ///< ||a^1/2 grad_x v||_Q
  double boundary_penalty = 0.0;  ///< ||(gamma/h)^1/2 v||_{Sigma_s}
  double initial = 0.0;           ///< ||v||_{Sigma_0}
  double final_trace = 0.0;       ///< ||v||_{Sigma_T}
  double supg = 0.0;              ///< ||delta^1/2 h v_t||_Q
  double ghost = 0.0;             ///< g_h(v, v)^1/2
  double total() const;
};

EnergyNormReport energy_norm_report(const FeSpace& space, const Eigen::VectorXd& coeffs,
                                    const ProblemSpec& problem, const CutGeometry& geometry,
                                    double h);

/// Writes the system matrix in MatrixMarket coordinate format.
void write_matrix_market(std::ostream& out, const SparseMatrix& A);
/// Reads a real general/symmetric MatrixMarket coordinate matrix.
SparseMatrix read_matrix_market(std::istream& in);

}  // namespace stfem
