#pragma once

#include <optional>
#include <string>

#include "stfem/geometry.hpp"
#include "stfem/mesh.hpp"

namespace stfem {

/// Nitsche penalty gamma, ghost-penalty weight gamma1 and SUPG weight delta.
struct StabilizationParams {
  double gamma = 50.0;
  double gamma1 = 0.1;
  double delta = 0.2;
};

/// u_t - div_x(a grad_x u) = f in Q, u = g on the moving boundary,
/// u = u0 at t = 0. All fields take space-time points (x..., t).
struct ProblemSpec {
  std::string name;
  SpaceTimeBox box;
  LevelSet levelset;
  ScalarField diffusion;
  VectorField diffusion_gradient;  ///< spatial gradient of a, d components
  ScalarField source;
  ScalarField dirichlet;
  ScalarField initial;
  std::optional<ScalarField> exact;
  std::optional<VectorField> exact_gradient;  ///< spatial gradient of u
  StabilizationParams params;

  int spatial_dim() const { return box.spatial_dim(); }
  bool has_exact_solution() const { return exact.has_value() && exact_gradient.has_value(); }
  /// Throws std::invalid_argument for missing fields or bad parameters.
  void validate() const;
};

}  // namespace stfem
