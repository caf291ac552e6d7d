#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stfem/problem.hpp"

namespace stfem {

/// 1D Stefan-type problem on [0, s(t)] with an erf solution.
ProblemSpec registry_stefan();
/// Oscillating interval with a(x,t) = 0.5 t cos^2 x + 0.1.
ProblemSpec registry_oscillating_interval();
/// Circle of radius pi/12 moving on a circle of radius 0.15.
ProblemSpec registry_moving_circle();
/// Rotating flower with a shrinking circular hole.
ProblemSpec registry_flower();
/// Interval [pi/24, pi/6] translated by l + t/7.
ProblemSpec registry_small_cut(double l);
/// Boundary layer with a = 2e-3, f = 1 and delta = delta_c / a.
ProblemSpec registry_boundary_layer(double delta_c);

inline constexpr double kBoundaryLayerDiffusion = 2e-3;

/// Background mesh: cells per axis on the problem's box and the number of
/// refinements applied before the first level of a study.
struct MeshRecipe {
  std::vector<int> n_cells;
  int pre_refinements = 0;
};

struct RegistryEntry {
  std::string name;
  std::string description;
  std::function<ProblemSpec()> make;
  MeshRecipe mesh;
  int default_levels = 1;  ///< number of refinements of a convergence study
};

const std::vector<RegistryEntry>& problem_registry();
/// Throws std::invalid_argument for unknown names.
const RegistryEntry& registry_entry(const std::string& name);

struct ResidualCheck {
  int samples = 0;
  double max_pde_residual = 0.0;      ///< |u_t - div(a grad u) - f| / max(1, |f|)
  double max_gradient_mismatch = 0.0; ///< exact vs finite-difference grad_x u and grad_x a
  bool ok = false;
};

/// Verifies the manufactured data at random points of the box with fourth
/// order central differences. Problems without an exact solution only get
/// the diffusion gradient check.
ResidualCheck check_pde_residual(const ProblemSpec& problem, int samples = 100, double tol = 1e-8,
                                 unsigned seed = 2024);

}  // namespace stfem
