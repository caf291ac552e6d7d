#include "stfem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include <Eigen/Dense>

namespace stfem {

namespace {

constexpr int kNeg = 1;
constexpr int kZero = 2;
constexpr int kPos = 4;

int sign_flag(double v) {
  if (v < -kSignTolerance) return kNeg;
  if (v > kSignTolerance) return kPos;
  return kZero;
}

double snapped(double v) { return std::abs(v) <= kSignTolerance ? 0.0 : v; }

using LatticePoint = std::array<int, 3>;
using SubSimplex = std::array<LatticePoint, 4>;

// Uniform lattice of a k-simplex at a given depth: the points
// sum_i (a_i / N) V_i with integer a_i >= 0, sum a_i = N, N = 2^depth.
// Coordinates a_1..a_k are stored; a_0 is implied. Level-set values are
// evaluated lazily and cached.
class SimplexLattice {
 public:
  SimplexLattice(std::span<const Point> vertices, const LevelSet& phi, int depth)
      : vertices_(vertices), phi_(phi), k_(static_cast<int>(vertices.size()) - 1), n_(1 << depth) {
    std::size_t size = 1;
    for (int i = 0; i < k_; ++i) size *= static_cast<std::size_t>(n_ + 1);
    values_.assign(size, std::numeric_limits<double>::quiet_NaN());
  }

  int k() const { return k_; }
  int n() const { return n_; }

  Point physical(const LatticePoint& a) const {
    int a0 = n_;
    for (int i = 0; i < k_; ++i) a0 -= a[i];
    Point p = (static_cast<double>(a0) / n_) * vertices_[0];
    for (int i = 0; i < k_; ++i) p += (static_cast<double>(a[i]) / n_) * vertices_[i + 1];
    return p;
  }

  double value(const LatticePoint& a) {
    std::size_t idx = 0;
    for (int i = k_ - 1; i >= 0; --i) idx = idx * (n_ + 1) + a[i];
    double& v = values_[idx];
    if (std::isnan(v)) v = phi_(physical(a));
    return v;
  }

  SubSimplex root() const {
    SubSimplex s{};
    for (int i = 0; i < k_; ++i) s[i + 1][i] = n_;
    return s;
  }

  // Sign flags over every lattice point of the sub-simplex `s` whose edges
  // span `m` lattice steps. Stops early once the result is known to be mixed.
  int scan(const SubSimplex& s, int m) {
    int flags = 0;
    auto visit = [&](const std::array<int, 3>& c) {
      LatticePoint a{};
      for (int d = 0; d < k_; ++d) {
        int acc = s[0][d] * m;
        for (int i = 0; i < k_; ++i) acc += c[i] * (s[i + 1][d] - s[0][d]);
        a[d] = acc / m;
      }
      flags |= sign_flag(value(a));
      return (flags & kNeg) && (flags & (kZero | kPos));
    };
    std::array<int, 3> c{0, 0, 0};
    if (k_ == 0) {
      return sign_flag(value(c));
    }
    if (k_ == 1) {
      for (c[0] = 0; c[0] <= m; ++c[0])
        if (visit(c)) return flags;
    } else if (k_ == 2) {
      for (c[0] = 0; c[0] <= m; ++c[0])
        for (c[1] = 0; c[0] + c[1] <= m; ++c[1])
          if (visit(c)) return flags;
    } else {
      for (c[0] = 0; c[0] <= m; ++c[0])
        for (c[1] = 0; c[0] + c[1] <= m; ++c[1])
          for (c[2] = 0; c[0] + c[1] + c[2] <= m; ++c[2])
            if (visit(c)) return flags;
    }
    return flags;
  }

 private:
  std::span<const Point> vertices_;
  const LevelSet& phi_;
  int k_;
  int n_;
  std::vector<double> values_;
};

LatticePoint mid(const LatticePoint& a, const LatticePoint& b) {
  return {(a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2};
}

// Red refinement of a k-simplex; tetrahedra follow Bey's ordering so that
// Kuhn simplices stay Kuhn simplices.
int red_children(const SubSimplex& s, int k, std::array<SubSimplex, 8>& out) {
  if (k == 1) {
    const auto m = mid(s[0], s[1]);
    out[0] = {s[0], m};
    out[1] = {m, s[1]};
    return 2;
  }
  if (k == 2) {
    const auto m01 = mid(s[0], s[1]), m02 = mid(s[0], s[2]), m12 = mid(s[1], s[2]);
    out[0] = {s[0], m01, m02};
    out[1] = {m01, s[1], m12};
    out[2] = {m02, m12, s[2]};
    out[3] = {m01, m02, m12};
    return 4;
  }
  const auto m01 = mid(s[0], s[1]), m02 = mid(s[0], s[2]), m03 = mid(s[0], s[3]);
  const auto m12 = mid(s[1], s[2]), m13 = mid(s[1], s[3]), m23 = mid(s[2], s[3]);
  out[0] = {s[0], m01, m02, m03};
  out[1] = {m01, s[1], m12, m13};
  out[2] = {m02, m12, s[2], m23};
  out[3] = {m03, m13, m23, s[3]};
  out[4] = {m01, m02, m03, m13};
  out[5] = {m01, m02, m12, m13};
  out[6] = {m02, m03, m13, m23};
  out[7] = {m02, m12, m13, m23};
  return 8;
}

class CutIntegrator {
 public:
  CutIntegrator(std::span<const Point> simplex, const LevelSet& phi, int depth, int order,
                bool want_surface, CutRules& out)
      : lattice_(simplex, phi, depth),
        depth_(depth),
        order_(order),
        k_(static_cast<int>(simplex.size()) - 1),
        want_surface_(want_surface && k_ == static_cast<int>(simplex[0].size())),
        out_(out) {
    full_measure_ = simplex_measure(simplex);
    volume_tol_ = 1e-14 * full_measure_;
    surface_tol_ = 1e-14 * std::pow(full_measure_, static_cast<double>(k_ - 1) / k_);
  }

  void run() { recurse(lattice_.root(), 0); }

 private:
  void recurse(const SubSimplex& s, int level) {
    const int m = lattice_.n() >> level;
    const int flags = lattice_.scan(s, m);
    if (flags == kNeg) {
      add_full(s, level);
      return;
    }
    if (!(flags & kNeg)) return;
    if (level == depth_) {
      slice(s);
      return;
    }
    std::array<SubSimplex, 8> children;
    const int nc = red_children(s, k_, children);
    for (int c = 0; c < nc; ++c) recurse(children[c], level + 1);
  }

  void add_full(const SubSimplex& s, int level) {
    std::array<Point, 4> v;
    for (int i = 0; i <= k_; ++i) v[i] = lattice_.physical(s[i]);
    const double measure = full_measure_ / std::pow(2.0, k_ * level);
    append_simplex_rule(out_.volume, std::span<const Point>(v.data(), k_ + 1), order_, measure);
  }

  void add_volume_piece(std::initializer_list<const Point*> verts) {
    std::array<Point, 4> v;
    int i = 0;
    for (const Point* p : verts) v[i++] = *p;
    const std::span<const Point> span(v.data(), i);
    const double measure = simplex_measure(span);
    if (measure <= volume_tol_) return;
    append_simplex_rule(out_.volume, span, order_, measure);
  }

  void add_surface_piece(std::initializer_list<const Point*> verts, const Point& normal) {
    if (!want_surface_) return;
    std::array<Point, 3> v;
    int i = 0;
    for (const Point* p : verts) v[i++] = *p;
    const std::span<const Point> span(v.data(), i);
    const double measure = k_ == 1 ? 1.0 : simplex_measure(span);
    if (k_ > 1 && measure <= surface_tol_) return;
    append_simplex_rule(out_.surface, span, order_, measure, &normal);
  }

  void slice(const SubSimplex& s) {
    std::array<Point, 4> x;
    std::array<double, 4> f;
    for (int i = 0; i <= k_; ++i) {
      x[i] = lattice_.physical(s[i]);
      f[i] = snapped(lattice_.value(s[i]));
    }
    std::array<int, 4> neg{}, pos{};
    int nn = 0, np = 0;
    for (int i = 0; i <= k_; ++i) {
      if (f[i] < 0.0)
        neg[nn++] = i;
      else
        pos[np++] = i;
    }
    if (np == 0) {
      add_volume_piece_all(x);
      return;
    }
    auto cross = [&](int i, int j) {
      const double s_ij = f[i] / (f[i] - f[j]);
      return Point(x[i] + s_ij * (x[j] - x[i]));
    };

    Point normal;
    if (want_surface_) normal = interpolant_normal(x, f);

    if (k_ == 1) {
      const Point p = cross(neg[0], pos[0]);
      add_volume_piece({&x[neg[0]], &p});
      add_surface_piece({&p}, normal);
    } else if (k_ == 2) {
      if (nn == 1) {
        const int a = neg[0], b = pos[0], c = pos[1];
        const Point pab = cross(a, b), pac = cross(a, c);
        add_volume_piece({&x[a], &pab, &pac});
        add_surface_piece({&pab, &pac}, normal);
      } else {
        const int a = neg[0], b = neg[1], c = pos[0];
        const Point pac = cross(a, c), pbc = cross(b, c);
        add_volume_piece({&x[a], &x[b], &pbc});
        add_volume_piece({&x[a], &pbc, &pac});
        add_surface_piece({&pac, &pbc}, normal);
      }
    } else {
      if (nn == 1) {
        const int a = neg[0], b = pos[0], c = pos[1], d = pos[2];
        const Point pab = cross(a, b), pac = cross(a, c), pad = cross(a, d);
        add_volume_piece({&x[a], &pab, &pac, &pad});
        add_surface_piece({&pab, &pac, &pad}, normal);
      } else if (nn == 2) {
        const int a = neg[0], b = neg[1], c = pos[0], d = pos[1];
        const Point pac = cross(a, c), pad = cross(a, d), pbc = cross(b, c), pbd = cross(b, d);
        // Prism (a, pac, pad) -> (b, pbc, pbd).
        add_volume_piece({&x[a], &pac, &pad, &x[b]});
        add_volume_piece({&pac, &pad, &x[b], &pbc});
        add_volume_piece({&pad, &x[b], &pbc, &pbd});
        add_surface_piece({&pac, &pad, &pbd}, normal);
        add_surface_piece({&pac, &pbd, &pbc}, normal);
      } else {
        const int a = neg[0], b = neg[1], c = neg[2], d = pos[0];
        const Point pad = cross(a, d), pbd = cross(b, d), pcd = cross(c, d);
        // Prism (a, b, c) -> (pad, pbd, pcd).
        add_volume_piece({&x[a], &x[b], &x[c], &pad});
        add_volume_piece({&x[b], &x[c], &pad, &pbd});
        add_volume_piece({&x[c], &pad, &pbd, &pcd});
        add_surface_piece({&pad, &pbd, &pcd}, normal);
      }
    }
  }

  void add_volume_piece_all(const std::array<Point, 4>& x) {
    const std::span<const Point> span(x.data(), k_ + 1);
    const double measure = simplex_measure(span);
    if (measure <= volume_tol_) return;
    append_simplex_rule(out_.volume, span, order_, measure);
  }

  Point interpolant_normal(const std::array<Point, 4>& x, const std::array<double, 4>& f) const {
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
    Mat jac(k_, k_);
    Point rhs(k_);
    for (int i = 0; i < k_; ++i) {
      jac.row(i) = (x[i + 1] - x[0]).transpose();
      rhs(i) = f[i + 1] - f[0];
    }
    Point g = jac.partialPivLu().solve(rhs);
    return g / g.norm();
  }

  SimplexLattice lattice_;
  int depth_;
  int order_;
  int k_;
  bool want_surface_;
  CutRules& out_;
  double full_measure_ = 0.0;
  double volume_tol_ = 0.0;
  double surface_tol_ = 0.0;
};

int lattice_flags(std::span<const Point> simplex, const LevelSet& phi, int depth) {
  SimplexLattice lattice(simplex, phi, depth);
  int flags = 0;
  // Full scan (no early exit needed beyond the mixed test).
  flags = lattice.scan(lattice.root(), lattice.n());
  return flags;
}

ElementClass class_from_flags(int flags) {
  if (flags == kNeg) return ElementClass::Interior;
  if (flags == kPos) return ElementClass::Exterior;
  return ElementClass::Cut;
}

}  // namespace

Point LevelSet::grad(const Point& p, double h) const {
  if (gradient) return gradient(p);
  const double step = 1e-6 * h;
  Point g(p.size());
  Point q = p;
  for (int i = 0; i < p.size(); ++i) {
    q(i) = p(i) + step;
    const double fp = value(q);
    q(i) = p(i) - step;
    const double fm = value(q);
    q(i) = p(i);
    g(i) = (fp - fm) / (2.0 * step);
  }
  return g;
}

ElementClass classify_element(std::span<const Point> simplex, const LevelSet& phi, int depth) {
  if (depth < 0) throw std::invalid_argument("classify_element: depth must be non-negative");
  return class_from_flags(lattice_flags(simplex, phi, depth));
}

CutRules cut_rules(std::span<const Point> simplex, const LevelSet& phi, int depth, int order,
                   bool want_surface) {
  if (depth < 0) throw std::invalid_argument("cut_rules: depth must be non-negative");
  CutRules rules;
  CutIntegrator integrator(simplex, phi, depth, order, want_surface, rules);
  integrator.run();
  return rules;
}

QuadratureRule cut_volume_rule(std::span<const Point> simplex, const LevelSet& phi, int depth,
                               int order) {
  return cut_rules(simplex, phi, depth, order, false).volume;
}

QuadratureRule cut_surface_rule(std::span<const Point> simplex, const LevelSet& phi, int depth,
                                int order) {
  return cut_rules(simplex, phi, depth, order, true).surface;
}

QuadratureRule boundary_facet_cut_rule(std::span<const Point> facet, const LevelSet& phi,
                                       BoundaryTag which, int depth, int order) {
  if (which != BoundaryTag::T0 && which != BoundaryTag::TT)
    throw std::invalid_argument("boundary_facet_cut_rule: facet must be tagged T0 or TT");
  const int t_axis = static_cast<int>(facet[0].size()) - 1;
  const double t = facet[0](t_axis);
  for (const auto& p : facet) {
    if (std::abs(p(t_axis) - t) > 1e-12 * std::max(1.0, std::abs(t)))
      throw std::invalid_argument("boundary_facet_cut_rule: facet does not lie on a time plane");
  }
  return cut_rules(facet, phi, depth, order, false).volume;
}

std::vector<int> ghost_face_set(const Mesh& mesh, const std::vector<ElementClass>& labels,
                                const std::vector<char>& active, const LevelSet& phi, int depth) {
  std::vector<int> out;
  std::vector<Point> fv(mesh.dim());
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(static_cast<int>(f));
    if (face.is_boundary()) continue;
    const int k1 = face.elements[0], k2 = face.elements[1];
    if (!active[k1] || !active[k2]) continue;
    if (labels[k1] != ElementClass::Cut && labels[k2] != ElementClass::Cut) continue;
    for (int i = 0; i < mesh.dim(); ++i) fv[i] = mesh.vertex(face.vertices[i]);
    if (lattice_flags(fv, phi, depth) & (kNeg | kZero)) out.push_back(static_cast<int>(f));
  }
  return out;
}

CutGeometry::CutGeometry(const Mesh& mesh, LevelSet phi, GeometryOptions options)
    : mesh_(&mesh), phi_(std::move(phi)), options_(options) {
  if (options_.classification_depth < 0 || options_.quadrature_depth < 1)
    throw std::invalid_argument("CutGeometry: invalid subdivision depth");
  const std::size_t ne = mesh.num_elements();
  labels_.resize(ne);
  active_.assign(ne, 0);

  // Vertex signs decide most elements without sampling the interior lattice:
  // only elements near the zero level are sampled.
  std::vector<double> vertex_phi(mesh.num_vertices());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    vertex_phi[v] = phi_(mesh.vertex(static_cast<int>(v)));

  std::vector<Point> verts(mesh.dim() + 1);
  for (std::size_t e = 0; e < ne; ++e) {
    const int ei = static_cast<int>(e);
    int vflags = 0;
    for (int v : mesh.element(ei)) vflags |= sign_flag(vertex_phi[v]);
    for (int i = 0; i <= mesh.dim(); ++i) verts[i] = mesh.vertex(mesh.element(ei)[i]);
    if (vflags == kNeg || vflags == kPos) {
      labels_[e] = options_.classification_depth == 0
                       ? class_from_flags(vflags)
                       : classify_element(verts, phi_, options_.classification_depth);
    } else {
      labels_[e] = ElementClass::Cut;
    }
    if (labels_[e] == ElementClass::Interior) {
      active_[e] = 1;
    } else if (labels_[e] == ElementClass::Cut) {
      const int qflags = lattice_flags(verts, phi_, options_.quadrature_depth);
      active_[e] = (qflags & kNeg) ? 1 : 0;
    }
    if (active_[e]) active_elements_.push_back(ei);
  }
  ghost_faces_ = ghost_face_set(mesh, labels_, active_, phi_, options_.classification_depth);
}

std::size_t CutGeometry::num_cut() const {
  std::size_t n = 0;
  for (int e : active_elements_)
    if (labels_[e] == ElementClass::Cut) ++n;
  return n;
}

CutRules CutGeometry::element_rules(int e, int depth, bool want_surface) const {
  if (depth < 0) depth = options_.quadrature_depth;
  const auto verts = mesh_->element_vertices(e);
  if (labels_[e] == ElementClass::Interior) {
    CutRules rules;
    append_simplex_rule(rules.volume, verts, options_.order, mesh_->volume(e));
    return rules;
  }
  if (!active_[e]) return {};
  return cut_rules(verts, phi_, depth, options_.order, want_surface);
}

QuadratureRule CutGeometry::facet_rule(int f, int depth) const {
  if (depth < 0) depth = options_.quadrature_depth;
  const Face& face = mesh_->face(f);
  const int e = face.elements[0];
  if (!face.is_boundary() || (face.tag != BoundaryTag::T0 && face.tag != BoundaryTag::TT))
    throw std::invalid_argument("facet_rule: face is not on the t=0 or t=T plane");
  if (!active_[e]) return {};
  std::vector<Point> fv(mesh_->dim());
  for (int i = 0; i < mesh_->dim(); ++i) fv[i] = mesh_->vertex(face.vertices[i]);
  if (labels_[e] == ElementClass::Interior) {
    QuadratureRule rule;
    append_simplex_rule(rule, fv, options_.order, face.measure);
    return rule;
  }
  return boundary_facet_cut_rule(fv, phi_, face.tag, depth, options_.order);
}

std::vector<int> CutGeometry::active_boundary_faces(BoundaryTag which) const {
  std::vector<int> out;
  for (std::size_t f = 0; f < mesh_->num_faces(); ++f) {
    const Face& face = mesh_->face(static_cast<int>(f));
    if (face.is_boundary() && face.tag == which && active_[face.elements[0]])
      out.push_back(static_cast<int>(f));
  }
  return out;
}

CutConnectivityReport CutGeometry::check_cut_connectivity() const {
  const std::size_t ne = mesh_->num_elements();
  std::vector<int> dist(ne, -1);
  std::deque<int> queue;
  for (int e : active_elements_) {
    if (labels_[e] == ElementClass::Interior) {
      dist[e] = 1;
      queue.push_back(e);
    }
  }
  while (!queue.empty()) {
    const int e = queue.front();
    queue.pop_front();
    for (int f : mesh_->element_faces(e)) {
      const Face& face = mesh_->face(f);
      if (face.is_boundary()) continue;
      const int other = face.elements[0] == e ? face.elements[1] : face.elements[0];
      if (!active_[other] || dist[other] >= 0) continue;
      dist[other] = dist[e] + 1;
      queue.push_back(other);
    }
  }
  CutConnectivityReport report;
  for (int e : active_elements_) {
    if (labels_[e] != ElementClass::Cut) continue;
    if (dist[e] < 0)
      ++report.unreachable;
    else
      report.max_path_length = std::max(report.max_path_length, dist[e]);
  }
  return report;
}

void CutGeometry::check_domain_contained() const {
  std::vector<Point> fv(mesh_->dim());
  for (std::size_t f = 0; f < mesh_->num_faces(); ++f) {
    const Face& face = mesh_->face(static_cast<int>(f));
    if (face.tag != BoundaryTag::Lateral || labels_[face.elements[0]] == ElementClass::Exterior)
      continue;
    for (int i = 0; i < mesh_->dim(); ++i) fv[i] = mesh_->vertex(face.vertices[i]);
    if (lattice_flags(fv, phi_, options_.classification_depth) & kNeg)
      throw GeometryError("domain not contained in the background box: phi < 0 on lateral face " +
                          std::to_string(f));
  }
}

}  // namespace stfem
