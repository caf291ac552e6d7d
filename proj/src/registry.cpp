#include "stfem/registry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace stfem {

using std::numbers::pi;

namespace {

Point vec(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p(i++) = x;
  return p;
}

// Translating interval (x - a0 - v(t)) (x - b0 - v(t)).
LevelSet moving_interval(double a0, double b0, std::function<double(double)> v,
                         std::function<double(double)> dv) {
  LevelSet phi;
  phi.value = [=](const Point& p) {
    const double s = v(p(1));
    return (p(0) - a0 - s) * (p(0) - b0 - s);
  };
  phi.gradient = [=](const Point& p) {
    const double s = v(p(1));
    const double gx = 2.0 * p(0) - a0 - b0 - 2.0 * s;
    return vec({gx, -dv(p(1)) * gx});
  };
  return phi;
}

// cos(2 pi (x - t)) e^{-t} with a = 0.5 t cos^2 x + 0.1.
void set_oscillating_solution(ProblemSpec& p) {
  p.diffusion = [](const Point& q) { return 0.5 * q(1) * std::pow(std::cos(q(0)), 2) + 0.1; };
  p.diffusion_gradient = [](const Point& q) { return vec({-0.5 * q(1) * std::sin(2.0 * q(0))}); };
  p.exact = [](const Point& q) { return std::cos(2 * pi * (q(0) - q(1))) * std::exp(-q(1)); };
  p.exact_gradient = [](const Point& q) {
    return vec({-2 * pi * std::sin(2 * pi * (q(0) - q(1))) * std::exp(-q(1))});
  };
  p.source = [](const Point& q) {
    const double x = q(0), t = q(1);
    const double w = 2 * pi * (x - t), et = std::exp(-t);
    const double ut = (2 * pi * std::sin(w) - std::cos(w)) * et;
    const double ux = -2 * pi * std::sin(w) * et;
    const double uxx = -4 * pi * pi * std::cos(w) * et;
    const double a = 0.5 * t * std::pow(std::cos(x), 2) + 0.1;
    const double ax = -0.5 * t * std::sin(2.0 * x);
    return ut - ax * ux - a * uxx;
  };
  p.dirichlet = *p.exact;
  p.initial = *p.exact;
}

// (sin sin sin + cos cos cos) e^{-t} in two space dimensions.
double u3(const Point& q) {
  const double k = 2 * pi;
  return (std::sin(k * q(0)) * std::sin(k * q(1)) * std::sin(k * q(2)) +
          std::cos(k * q(0)) * std::cos(k * q(1)) * std::cos(k * q(2))) *
         std::exp(-q(2));
}

Point grad_u3(const Point& q) {
  const double k = 2 * pi;
  const double sx = std::sin(k * q(0)), sy = std::sin(k * q(1)), st = std::sin(k * q(2));
  const double cx = std::cos(k * q(0)), cy = std::cos(k * q(1)), ct = std::cos(k * q(2));
  const double et = std::exp(-q(2));
  return vec({k * (cx * sy * st - sx * cy * ct) * et, k * (sx * cy * st - cx * sy * ct) * et});
}

double dt_u3(const Point& q) {
  const double k = 2 * pi;
  const double sx = std::sin(k * q(0)), sy = std::sin(k * q(1)), st = std::sin(k * q(2));
  const double cx = std::cos(k * q(0)), cy = std::cos(k * q(1)), ct = std::cos(k * q(2));
  return (k * (sx * sy * ct - cx * cy * st) - (sx * sy * st + cx * cy * ct)) * std::exp(-q(2));
}

void set_planar_solution(ProblemSpec& p) {
  p.exact = u3;
  p.exact_gradient = grad_u3;
  p.dirichlet = u3;
  p.initial = u3;
  // Laplacian of u3 is -8 pi^2 u3.
  p.source = [a = p.diffusion, ga = p.diffusion_gradient](const Point& q) {
    return dt_u3(q) - ga(q).dot(grad_u3(q)) + 8 * pi * pi * a(q) * u3(q);
  };
}

// Fourth-order central differences along axis i.
template <class F>
double d1(const F& f, Point p, int i, double h) {
  const double x = p(i);
  auto at = [&](double s) {
    p(i) = x + s * h;
    return f(p);
  };
  return (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h);
}

template <class F>
double d2(const F& f, Point p, int i, double h) {
  const double x = p(i);
  auto at = [&](double s) {
    p(i) = x + s * h;
    return f(p);
  };
  return (-at(2) + 16 * at(1) - 30 * at(0) + 16 * at(-1) - at(-2)) / (12 * h * h);
}

}  // namespace

ProblemSpec registry_stefan() {
  constexpr double alpha = 0.5, t0 = 1.2;
  ProblemSpec p;
  p.name = "stefan";
  p.box = {{0.0}, {1.5}, 1.0};
  p.levelset.value = [](const Point& q) {
    const double s = 2 * alpha * std::sqrt(q(1) + t0);
    return q(0) * (q(0) - s);
  };
  p.levelset.gradient = [](const Point& q) {
    const double s = 2 * alpha * std::sqrt(q(1) + t0);
    const double ds = alpha / std::sqrt(q(1) + t0);
    return vec({2 * q(0) - s, -q(0) * ds});
  };
  const double erf_alpha = std::erf(alpha);
  p.exact = [=](const Point& q) {
    return 1.0 - std::erf(q(0) / (2 * std::sqrt(q(1) + t0))) / erf_alpha;
  };
  p.exact_gradient = [=](const Point& q) {
    const double r = 2 * std::sqrt(q(1) + t0);
    const double xi = q(0) / r;
    return vec({-2.0 / std::sqrt(pi) * std::exp(-xi * xi) / (r * erf_alpha)});
  };
  p.diffusion = [](const Point&) { return 1.0; };
  p.diffusion_gradient = [](const Point&) { return vec({0.0}); };
  p.source = [](const Point&) { return 0.0; };
  p.dirichlet = *p.exact;
  p.initial = *p.exact;
  p.params = {50.0, 0.1, 0.2};
  return p;
}

ProblemSpec registry_oscillating_interval() {
  ProblemSpec p;
  p.name = "oscillating_interval";
  p.box = {{0.0}, {1.0}, 1.0};
  p.levelset = moving_interval(
      0.3, 0.7, [](double t) { return pi * std::sin(2 * pi * t) / 20; },
      [](double t) { return pi * pi * std::cos(2 * pi * t) / 10; });
  set_oscillating_solution(p);
  p.params = {100.0, 0.1, 0.1};
  return p;
}

ProblemSpec registry_moving_circle() {
  ProblemSpec p;
  p.name = "moving_circle";
  p.box = {{0.0, 0.0}, {1.0, 1.0}, 1.0};
  constexpr double r = pi / 12;
  p.levelset.value = [](const Point& q) {
    const double x = q(0) - 0.15 * std::cos(2 * pi * q(2)) - 0.5;
    const double y = q(1) - 0.15 * std::sin(2 * pi * q(2)) - 0.5;
    return x * x + y * y - r * r;
  };
  p.levelset.gradient = [](const Point& q) {
    const double x = q(0) - 0.15 * std::cos(2 * pi * q(2)) - 0.5;
    const double y = q(1) - 0.15 * std::sin(2 * pi * q(2)) - 0.5;
    const double xt = 0.3 * pi * std::sin(2 * pi * q(2));
    const double yt = -0.3 * pi * std::cos(2 * pi * q(2));
    return vec({2 * x, 2 * y, 2 * x * xt + 2 * y * yt});
  };
  p.diffusion = [](const Point&) { return 1.0; };
  p.diffusion_gradient = [](const Point&) { return vec({0.0, 0.0}); };
  set_planar_solution(p);
  p.params = {50.0, 0.1, 0.2};
  return p;
}

ProblemSpec registry_flower() {
  constexpr double r = 0.7, r0 = 3.5;
  ProblemSpec p;
  p.name = "flower";
  p.box = {{-1.0, -1.0}, {1.0, 1.0}, 1.0};
  p.levelset.value = [](const Point& q) {
    const double t = q(2);
    const double X = q(0) - 0.1 * std::cos(pi * t);
    const double Y = q(1) - 0.1 * std::sin(pi * t);
    const double theta = std::atan2(Y, X);
    const double R2 = X * X + Y * Y;
    const double phi1 = R2 - r * r + (r / r0) * std::cos(5 * theta) * std::cos(2 * pi * t / 3);
    const double hole = r - t * t / 8 - pi / 10;
    const double phi2 = R2 - hole * hole;
    return phi1 * phi2;
  };
  p.diffusion = [](const Point& q) {
    return 0.5 * std::pow(std::sin(q(0) * q(1) * q(2)), 2) + 0.1;
  };
  p.diffusion_gradient = [](const Point& q) {
    const double s = 0.5 * std::sin(2 * q(0) * q(1) * q(2));
    return vec({s * q(1) * q(2), s * q(0) * q(2)});
  };
  set_planar_solution(p);
  p.params = {100.0, 0.1, 0.02};
  return p;
}

ProblemSpec registry_small_cut(double l) {
  ProblemSpec p;
  p.name = "small_cut";
  p.box = {{0.0}, {1.0}, 1.0};
  p.levelset = moving_interval(
      pi / 24, pi / 6, [l](double t) { return l + t / 7; }, [](double) { return 1.0 / 7; });
  set_oscillating_solution(p);
  p.params = {50.0, 0.1, 0.2};
  return p;
}

ProblemSpec registry_boundary_layer(double delta_c) {
  constexpr double eps = kBoundaryLayerDiffusion;
  ProblemSpec p;
  p.name = "boundary_layer";
  p.box = {{0.0}, {1.0}, 1.0};
  p.levelset = moving_interval(
      0.3, 0.7, [](double t) { return pi * std::sin(2 * pi * t) / 20; },
      [](double t) { return pi * pi * std::cos(2 * pi * t) / 10; });
  p.diffusion = [](const Point&) { return eps; };
  p.diffusion_gradient = [](const Point&) { return vec({0.0}); };
  p.source = [](const Point&) { return 1.0; };
  p.dirichlet = [](const Point&) { return 0.0; };
  p.initial = [](const Point&) { return 0.0; };
  p.params = {20.0, 0.1, delta_c / eps};
  return p;
}

const std::vector<RegistryEntry>& problem_registry() {
  static const std::vector<RegistryEntry> entries = {
      {"stefan", "1D Stefan-type interval [0, s(t)], erf solution", registry_stefan, {{12, 8}, 0}, 4},
      {"oscillating_interval", "1D oscillating interval, variable diffusion",
       registry_oscillating_interval, {{14, 14}, 0}, 3},
      {"moving_circle", "2D circle moving on a circular path", registry_moving_circle,
       {{3, 3, 3}, 2}, 2},
      {"flower", "2D rotating flower with a shrinking hole", registry_flower, {{4, 4, 2}, 2}, 2},
      {"small_cut", "1D interval translated across the mesh (shift l)",
       [] { return registry_small_cut(0.0); }, {{9, 9}, 0}, 0},
      {"boundary_layer", "1D boundary layer, a = 2e-3, f = 1",
       [] { return registry_boundary_layer(0.3); }, {{7, 7}, 4}, 0},
  };
  return entries;
}

const RegistryEntry& registry_entry(const std::string& name) {
  for (const auto& e : problem_registry())
    if (e.name == name) return e;
  throw std::invalid_argument("unknown problem '" + name + "'");
}

ResidualCheck check_pde_residual(const ProblemSpec& problem, int samples, double tol,
                                 unsigned seed) {
  constexpr double h = 1e-3;
  const int d = problem.spatial_dim();
  std::mt19937 gen(seed);
  std::vector<std::uniform_real_distribution<double>> axis;
  // Keep the stencil inside the box.
  for (int i = 0; i < d; ++i)
    axis.emplace_back(problem.box.spatial_lo[i] + 2 * h, problem.box.spatial_hi[i] - 2 * h);
  axis.emplace_back(2 * h, problem.box.t_final - 2 * h);
  ResidualCheck r;
  r.samples = samples;
  for (int s = 0; s < samples; ++s) {
    Point p(d + 1);
    for (int i = 0; i <= d; ++i) p(i) = axis[i](gen);
    const Point ga = problem.diffusion_gradient(p);
    for (int i = 0; i < d; ++i)
      r.max_gradient_mismatch =
          std::max(r.max_gradient_mismatch, std::abs(ga(i) - d1(problem.diffusion, p, i, h)));
    if (!problem.has_exact_solution()) continue;
    const auto& u = *problem.exact;
    const Point gu = (*problem.exact_gradient)(p);
    double div = 0.0;
    for (int i = 0; i < d; ++i) {
      const double ui = d1(u, p, i, h);
      r.max_gradient_mismatch = std::max(r.max_gradient_mismatch, std::abs(gu(i) - ui));
      div += d1(problem.diffusion, p, i, h) * ui + problem.diffusion(p) * d2(u, p, i, h);
    }
    const double f = problem.source(p);
    const double res = d1(u, p, d, h) - div - f;
    r.max_pde_residual = std::max(r.max_pde_residual, std::abs(res) / std::max(1.0, std::abs(f)));
  }
  r.ok = r.max_pde_residual <= tol && r.max_gradient_mismatch <= tol;
  return r;
}

}  // namespace stfem
