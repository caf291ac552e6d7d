#include "stfem/quadrature.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace stfem {

double QuadratureRule::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void QuadratureRule::clear() {
  points.clear();
  weights.clear();
  normals.clear();
}

void QuadratureRule::truncate(std::size_t n) {
  points.resize(n, Point());
  weights.resize(n);
  if (!normals.empty()) normals.resize(n, Point());
}

namespace {

BarycentricRule make_rule(int k, int order) {
  BarycentricRule r;
  if (k == 0) {
    r.bary.push_back({1.0, 0.0, 0.0, 0.0});
    r.weights.push_back(1.0);
    return r;
  }
  if (order == 1) {
    std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i <= k; ++i) c[i] = 1.0 / (k + 1);
    r.bary.push_back(c);
    r.weights.push_back(1.0);
    return r;
  }
  switch (k) {
    case 1: {
      // Two-point Gauss-Legendre.
      const double a = 0.5 - 0.5 / std::sqrt(3.0);
      r.bary = {{1.0 - a, a, 0.0, 0.0}, {a, 1.0 - a, 0.0, 0.0}};
      r.weights = {0.5, 0.5};
      break;
    }
    case 2: {
      const double a = 2.0 / 3.0, b = 1.0 / 6.0;
      r.bary = {{a, b, b, 0.0}, {b, a, b, 0.0}, {b, b, a, 0.0}};
      r.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
      break;
    }
    case 3: {
      const double b = (5.0 - std::sqrt(5.0)) / 20.0;
      const double a = 1.0 - 3.0 * b;
      r.bary = {{a, b, b, b}, {b, a, b, b}, {b, b, a, b}, {b, b, b, a}};
      r.weights = {0.25, 0.25, 0.25, 0.25};
      break;
    }
    default:
      break;
  }
  return r;
}

}  // namespace

const BarycentricRule& reference_rule(int k, int order) {
  if (k < 0 || k > 3) throw std::invalid_argument("reference_rule: simplex dimension out of range");
  if (order != 1 && order != 2)
    throw std::invalid_argument("reference_rule: supported orders are 1 and 2, got " +
                                std::to_string(order));
  static const std::array<std::array<BarycentricRule, 3>, 4> rules = [] {
    std::array<std::array<BarycentricRule, 3>, 4> r;
    for (int kk = 0; kk <= 3; ++kk)
      for (int o = 1; o <= 2; ++o) r[kk][o] = make_rule(kk, o);
    return r;
  }();
  return rules[k][order];
}

void append_simplex_rule(QuadratureRule& rule, std::span<const Point> vertices, int order,
                         double measure, const Point* normal) {
  const int k = static_cast<int>(vertices.size()) - 1;
  const BarycentricRule& ref = reference_rule(k, order);
  if (measure < 0.0) measure = simplex_measure(vertices);
  for (std::size_t q = 0; q < ref.weights.size(); ++q) {
    Point p = ref.bary[q][0] * vertices[0];
    for (int i = 1; i <= k; ++i) p += ref.bary[q][i] * vertices[i];
    rule.points.push_back(std::move(p));
    rule.weights.push_back(ref.weights[q] * measure);
    if (normal != nullptr) rule.normals.push_back(*normal);
  }
}

}  // namespace stfem
