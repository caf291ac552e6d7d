#include "stfem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/LU>

namespace stfem {

namespace {

double time_part(const Point& g) { return g(g.size() - 1); }

double spatial_dot(const Point& a, const Point& b) {
  const int d = static_cast<int>(a.size()) - 1;
  return a.head(d).dot(b.head(d));
}

void interior_kernel(const FeSpace& space, const ProblemSpec& problem, int e,
                     const QuadratureRule& rule, ElementContribution& loc) {
  const auto& grads = space.gradients(e);
  const int n = loc.n;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point& x = rule.points[q];
    const double w = rule.weights[q];
    const auto lam = space.basis_values(e, x);
    const double a = problem.diffusion(x);
    const double f = problem.source(x);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i)
        loc.A(j, i) += w * (time_part(grads[i]) * lam[j] + a * spatial_dot(grads[i], grads[j]));
      loc.b(j) += w * f * lam[j];
    }
  }
}

void supg_kernel(const FeSpace& space, const ProblemSpec& problem, int e,
                 const QuadratureRule& rule, double scale, ElementContribution& loc) {
  const auto& grads = space.gradients(e);
  const int n = loc.n;
  const int d = space.mesh().dim() - 1;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point& x = rule.points[q];
    const double w = scale * rule.weights[q];
    const Point ga = problem.diffusion_gradient(x);
    const double f = problem.source(x);
    for (int j = 0; j < n; ++j) {
      const double vt = time_part(grads[j]);
      for (int i = 0; i < n; ++i)
        loc.A(j, i) += w * (time_part(grads[i]) - ga.head(d).dot(grads[i].head(d))) * vt;
      loc.b(j) += w * f * vt;
    }
  }
}

void nitsche_kernel(const FeSpace& space, const ProblemSpec& problem, int e,
                    const QuadratureRule& rule, double h, ElementContribution& loc) {
  const auto& grads = space.gradients(e);
  const int n = loc.n;
  const double penalty = problem.params.gamma / h;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point& x = rule.points[q];
    const Point& nrm = rule.normals[q];
    const double w = rule.weights[q];
    const auto lam = space.basis_values(e, x);
    const double a = problem.diffusion(x);
    const double g = problem.dirichlet(x);
    std::array<double, 4> flux{};
    for (int i = 0; i < n; ++i) flux[i] = a * spatial_dot(grads[i], nrm);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i)
        loc.A(j, i) += w * (-flux[i] * lam[j] - flux[j] * lam[i] + penalty * lam[i] * lam[j]);
      loc.b(j) += w * g * (penalty * lam[j] - flux[j]);
    }
  }
}

void initial_kernel(const FeSpace& space, const ProblemSpec& problem, int e,
                    const QuadratureRule& rule, ElementContribution& loc) {
  const int n = loc.n;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point& x = rule.points[q];
    const double w = rule.weights[q];
    const auto lam = space.basis_values(e, x);
    const double u0 = problem.initial(x);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) loc.A(j, i) += w * lam[i] * lam[j];
      loc.b(j) += w * u0 * lam[j];
    }
  }
}

void add_initial_terms(const FeSpace& space, const ProblemSpec& problem,
                       const CutGeometry& geometry, AssemblyBuffer& out) {
  const Mesh& mesh = space.mesh();
  for (int f : geometry.active_boundary_faces(BoundaryTag::T0)) {
    const QuadratureRule rule = geometry.facet_rule(f);
    if (rule.empty()) continue;
    const int e = mesh.face(f).elements[0];
    ElementContribution loc(space.nodes_per_element());
    initial_kernel(space, problem, e, rule, loc);
    loc.scatter(space.element_dofs(e), out);
  }
}

// Per ghost face: dofs of the union patch and the jump of n_F . grad of each.
void add_ghost_terms(const FeSpace& space, const CutGeometry& geometry, double h, double gamma1,
                     AssemblyBuffer& out) {
  if (gamma1 == 0.0) return;
  const Mesh& mesh = space.mesh();
  for (int f : geometry.ghost_faces()) {
    const Face& face = mesh.face(f);
    std::array<int, 5> dofs{};
    std::array<double, 5> jump{};
    int count = 0;
    auto accumulate = [&](int e, double sign) {
      const auto edofs = space.element_dofs(e);
      const auto& grads = space.gradients(e);
      for (int i = 0; i < space.nodes_per_element(); ++i) {
        const double value = sign * face.normal.dot(grads[i]);
        int slot = 0;
        while (slot < count && dofs[slot] != edofs[i]) ++slot;
        if (slot == count) {
          dofs[count] = edofs[i];
          jump[count++] = 0.0;
        }
        jump[slot] += value;
      }
    };
    accumulate(face.elements[1], 1.0);
    accumulate(face.elements[0], -1.0);
    const double scale = gamma1 * h * face.measure;
    for (int j = 0; j < count; ++j)
      for (int i = 0; i < count; ++i) {
        const double v = scale * jump[i] * jump[j];
        if (v != 0.0) out.add(dofs[j], dofs[i], v);
      }
  }
}

}  // namespace

void ElementContribution::scatter(const std::array<int, 4>& dofs, AssemblyBuffer& out) const {
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i)
      if (A(j, i) != 0.0) out.add(dofs[j], dofs[i], A(j, i));
    if (b(j) != 0.0) out.add_rhs(dofs[j], b(j));
  }
}

ElementContribution interior_element_terms(const FeSpace& space, const ProblemSpec& problem, int e,
                                           const QuadratureRule& volume) {
  ElementContribution loc(space.nodes_per_element());
  interior_kernel(space, problem, e, volume, loc);
  return loc;
}

ElementContribution supg_element_terms(const FeSpace& space, const ProblemSpec& problem, int e,
                                       const QuadratureRule& volume, double scale) {
  ElementContribution loc(space.nodes_per_element());
  supg_kernel(space, problem, e, volume, scale, loc);
  return loc;
}

ElementContribution nitsche_element_terms(const FeSpace& space, const ProblemSpec& problem, int e,
                                          const QuadratureRule& surface, double h) {
  ElementContribution loc(space.nodes_per_element());
  nitsche_kernel(space, problem, e, surface, h, loc);
  return loc;
}

ElementContribution initial_facet_terms(const FeSpace& space, const ProblemSpec& problem, int e,
                                        const QuadratureRule& facet) {
  ElementContribution loc(space.nodes_per_element());
  initial_kernel(space, problem, e, facet, loc);
  return loc;
}

FeSpace::FeSpace(const Mesh& mesh, const CutGeometry& geometry)
    : mesh_(&mesh),
      dof_of_vertex_(mesh.num_vertices(), -1),
      active_elements_(geometry.active_elements()),
      slot_(mesh.num_elements(), -1) {
  if (active_elements_.empty())
    throw FemError("active mesh is empty: the domain is not resolved by the mesh");
  const int nodes = mesh.dim() + 1;
  gradients_.reserve(active_elements_.size());
  for (int e : active_elements_) {
    for (int v : mesh.element(e))
      if (dof_of_vertex_[v] < 0) dof_of_vertex_[v] = 1;
    // Rows of the inverse of the edge matrix are the gradients of lambda_1..lambda_k.
    const auto el = mesh.element(e);
    const Point& v0 = mesh.vertex(el[0]);
    Eigen::MatrixXd edges(mesh.dim(), mesh.dim());
    for (int k = 1; k < nodes; ++k) edges.col(k - 1) = mesh.vertex(el[k]) - v0;
    const Eigen::MatrixXd inv = edges.inverse();
    std::array<Point, 4> g;
    g[0] = Point::Zero(mesh.dim());
    for (int k = 1; k < nodes; ++k) {
      g[k] = inv.row(k - 1).transpose();
      g[0] -= g[k];
    }
    slot_[e] = static_cast<int>(gradients_.size());
    gradients_.push_back(g);
  }
  for (std::size_t v = 0; v < dof_of_vertex_.size(); ++v)
    if (dof_of_vertex_[v] > 0) {
      dof_of_vertex_[v] = static_cast<int>(vertex_of_dof_.size());
      vertex_of_dof_.push_back(static_cast<int>(v));
    }
}

std::array<int, 4> FeSpace::element_dofs(int e) const {
  std::array<int, 4> d{-1, -1, -1, -1};
  const auto el = mesh_->element(e);
  for (std::size_t i = 0; i < el.size(); ++i) d[i] = dof_of_vertex_[el[i]];
  return d;
}

std::array<double, 4> FeSpace::basis_values(int e, const Point& q) const {
  const auto& g = gradients(e);
  const Point delta = q - mesh_->vertex(mesh_->element(e)[0]);
  std::array<double, 4> lam{};
  lam[0] = 1.0;
  for (int i = 0; i < nodes_per_element(); ++i) lam[i] += g[i].dot(delta);
  return lam;
}

double FeSpace::evaluate(int e, const Eigen::VectorXd& coeffs, const Point& q) const {
  const auto lam = basis_values(e, q);
  const auto dofs = element_dofs(e);
  double s = 0.0;
  for (int i = 0; i < nodes_per_element(); ++i) s += coeffs(dofs[i]) * lam[i];
  return s;
}

Point FeSpace::gradient(int e, const Eigen::VectorXd& coeffs) const {
  const auto& g = gradients(e);
  const auto dofs = element_dofs(e);
  Point s = Point::Zero(mesh_->dim());
  for (int i = 0; i < nodes_per_element(); ++i) s += coeffs(dofs[i]) * g[i];
  return s;
}

FeSpace build_fe_space(const Mesh& mesh, const CutGeometry& geometry) {
  return FeSpace(mesh, geometry);
}

LinearSystem AssemblyBuffer::finish() && {
  std::sort(triplets_.begin(), triplets_.end(), [](const auto& a, const auto& b) {
    return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
  });
  LinearSystem sys;
  const auto n = rhs_.size();
  sys.A.resize(n, n);
  sys.A.setFromTriplets(triplets_.begin(), triplets_.end());
  sys.A.makeCompressed();
  sys.b = std::move(rhs_);
  triplets_.clear();
  return sys;
}

void assemble_interior_terms(const FeSpace& space, const ProblemSpec& problem,
                             const CutGeometry& geometry, AssemblyBuffer& out) {
  for (int e : space.active_elements()) {
    const CutRules rules = geometry.element_rules(e, -1, false);
    ElementContribution loc(space.nodes_per_element());
    interior_kernel(space, problem, e, rules.volume, loc);
    loc.scatter(space.element_dofs(e), out);
  }
}

void assemble_nitsche_terms(const FeSpace& space, const ProblemSpec& problem,
                            const CutGeometry& geometry, double h, AssemblyBuffer& out) {
  for (int e : space.active_elements()) {
    if (geometry.label(e) != ElementClass::Cut) continue;
    const CutRules rules = geometry.element_rules(e);
    ElementContribution loc(space.nodes_per_element());
    nitsche_kernel(space, problem, e, rules.surface, h, loc);
    loc.scatter(space.element_dofs(e), out);
  }
}

void assemble_initial_final_terms(const FeSpace& space, const ProblemSpec& problem,
                                  const CutGeometry& geometry, AssemblyBuffer& out) {
  add_initial_terms(space, problem, geometry, out);
}

void assemble_supg_terms(const FeSpace& space, const ProblemSpec& problem,
                         const CutGeometry& geometry, double h, double delta,
                         AssemblyBuffer& out) {
  if (delta == 0.0) return;
  for (int e : space.active_elements()) {
    const CutRules rules = geometry.element_rules(e, -1, false);
    ElementContribution loc(space.nodes_per_element());
    supg_kernel(space, problem, e, rules.volume, delta * h * h, loc);
    loc.scatter(space.element_dofs(e), out);
  }
}

void assemble_ghost_penalty(const FeSpace& space, const CutGeometry& geometry, double h,
                            double gamma1, AssemblyBuffer& out) {
  add_ghost_terms(space, geometry, h, gamma1, out);
}

LinearSystem assemble_system(const ProblemSpec& problem, const CutGeometry& geometry,
                             const FeSpace& space, double h) {
  problem.validate();
  geometry.check_domain_contained();
  AssemblyBuffer out(space.num_dofs());
  const double supg_scale = problem.params.delta * h * h;
  for (int e : space.active_elements()) {
    const bool cut = geometry.label(e) == ElementClass::Cut;
    const CutRules rules = geometry.element_rules(e, -1, cut);
    ElementContribution loc(space.nodes_per_element());
    interior_kernel(space, problem, e, rules.volume, loc);
    if (supg_scale != 0.0) supg_kernel(space, problem, e, rules.volume, supg_scale, loc);
    if (cut) nitsche_kernel(space, problem, e, rules.surface, h, loc);
    loc.scatter(space.element_dofs(e), out);
  }
  add_initial_terms(space, problem, geometry, out);
  add_ghost_terms(space, geometry, h, problem.params.gamma1, out);
  return std::move(out).finish();
}

Discretization discretize(const ProblemSpec& problem, const Mesh& mesh,
                          const GeometryOptions& options, double h) {
  if (!(h > 0.0)) h = mesh.h();
  CutGeometry geometry(mesh, problem.levelset, options);
  FeSpace space(mesh, geometry);
  LinearSystem system = assemble_system(problem, geometry, space, h);
  return {std::move(geometry), std::move(space), std::move(system), h};
}

double EnergyNormReport::total() const {
  return std::sqrt(diffusion * diffusion + boundary_penalty * boundary_penalty +
                   initial * initial + final_trace * final_trace + supg * supg + ghost * ghost);
}

EnergyNormReport energy_norm_report(const FeSpace& space, const Eigen::VectorXd& coeffs,
                                    const ProblemSpec& problem, const CutGeometry& geometry,
                                    double h) {
  const Mesh& mesh = space.mesh();
  const int d = mesh.dim() - 1;
  double diff2 = 0.0, bnd2 = 0.0, init2 = 0.0, fin2 = 0.0, supg2 = 0.0, ghost2 = 0.0;
  for (int e : space.active_elements()) {
    const bool cut = geometry.label(e) == ElementClass::Cut;
    const CutRules rules = geometry.element_rules(e, -1, cut);
    const Point g = space.gradient(e, coeffs);
    const double gx2 = g.head(d).squaredNorm();
    const double gt = g(d);
    for (std::size_t q = 0; q < rules.volume.size(); ++q) {
      const double w = rules.volume.weights[q];
      diff2 += w * problem.diffusion(rules.volume.points[q]) * gx2;
      supg2 += w * gt * gt;
    }
    for (std::size_t q = 0; q < rules.surface.size(); ++q) {
      const double v = space.evaluate(e, coeffs, rules.surface.points[q]);
      bnd2 += rules.surface.weights[q] * v * v;
    }
  }
  auto trace = [&](BoundaryTag tag) {
    double s = 0.0;
    for (int f : geometry.active_boundary_faces(tag)) {
      const QuadratureRule rule = geometry.facet_rule(f);
      const int e = mesh.face(f).elements[0];
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double v = space.evaluate(e, coeffs, rule.points[q]);
        s += rule.weights[q] * v * v;
      }
    }
    return s;
  };
  init2 = trace(BoundaryTag::T0);
  fin2 = trace(BoundaryTag::TT);
  for (int f : geometry.ghost_faces()) {
    const Face& face = mesh.face(f);
    const double jump = face.normal.dot(space.gradient(face.elements[1], coeffs) -
                                        space.gradient(face.elements[0], coeffs));
    ghost2 += problem.params.gamma1 * h * face.measure * jump * jump;
  }
  EnergyNormReport r;
  r.diffusion = std::sqrt(diff2);
  r.boundary_penalty = std::sqrt(problem.params.gamma / h * bnd2);
  r.initial = std::sqrt(init2);
  r.final_trace = std::sqrt(fin2);
  r.supg = std::sqrt(problem.params.delta * h * h * supg2);
  r.ghost = std::sqrt(ghost2);
  return r;
}

void write_matrix_market(std::ostream& out, const SparseMatrix& A) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  out.precision(17);
  for (int c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw std::runtime_error("MatrixMarket: missing header");
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (object != "matrix" || format != "coordinate" || (field != "real" && field != "integer"))
    throw std::runtime_error("MatrixMarket: only real coordinate matrices are supported");
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general")
    throw std::runtime_error("MatrixMarket: unsupported symmetry '" + symmetry + "'");
  while (std::getline(in, line) && (line.empty() || line[0] == '%')) {
  }
  std::istringstream sizes(line);
  long rows = 0, cols = 0, nnz = 0;
  if (!(sizes >> rows >> cols >> nnz)) throw std::runtime_error("MatrixMarket: bad size line");
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
  for (long k = 0; k < nnz; ++k) {
    long i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw std::runtime_error("MatrixMarket: truncated entries");
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw std::runtime_error("MatrixMarket: index out of range");
    t.emplace_back(i - 1, j - 1, v);
    if (symmetric && i != j) t.emplace_back(j - 1, i - 1, v);
  }
  SparseMatrix A(rows, cols);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

}  // namespace stfem
