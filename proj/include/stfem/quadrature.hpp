#pragma once

#include <span>
#include <vector>

#include "stfem/mesh.hpp"

namespace stfem {

/// Points and weights approximating an integral over a cut region. Surface
/// rules also carry one unit normal (n_x, n_t) per point.
struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;
  std::vector<Point> normals;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  double total_weight() const;
  void clear();
  void truncate(std::size_t n);
};

/// Reference rule on the k-simplex in barycentric form: each row holds k+1
/// barycentric coordinates; weights sum to one.
struct BarycentricRule {
  std::vector<std::array<double, 4>> bary;
  std::vector<double> weights;
};

/// Simplex rule of the given polynomial order (1 or 2) on a k-simplex,
/// k in {0, 1, 2, 3}. Throws std::invalid_argument otherwise.
const BarycentricRule& reference_rule(int k, int order);

/// Maps the reference rule onto the simplex `vertices` and appends to `rule`.
/// `measure` is the simplex measure (computed when negative).
void append_simplex_rule(QuadratureRule& rule, std::span<const Point> vertices, int order,
                         double measure = -1.0, const Point* normal = nullptr);

}  // namespace stfem
