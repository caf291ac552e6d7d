#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "stfem/analysis.hpp"
#include "stfem/registry.hpp"

namespace stfem {

/// Parameters of one run, read from an INI-style file.
struct ExperimentConfig {
  std::string problem;
  std::vector<int> n_cells;  ///< empty: registry default
  int pre_refinements = -1;  ///< < 0: registry default
  int refinements = -1;      ///< < 0: registry default
  GeometryOptions geometry{};
  int error_depth = 6;
  bool compute_kappa = true;
  PenaltyLength penalty = PenaltyLength::Diameter;
  /// Overrides of the registry stabilization parameters (negative: keep).
  double gamma = -1.0;
  double gamma1 = -1.0;
  double delta = -1.0;
  SolveOptions solve{};
  ConditionOptions condition{};
  std::filesystem::path output_dir = "output";
  bool write_vtk = true;
  // small_cut
  std::vector<double> shifts;  ///< empty: small_cut_shifts()
  std::vector<double> gamma1_values{0.0, 0.1};
  // boundary_layer
  std::vector<double> delta_c_values{0.0, 0.3};

  /// Throws std::invalid_argument on unknown problems or bad values.
  void validate() const;
};

/// Parses the INI format documented in the README. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Shifts 0, 0.01, ..., 0.3; every odd entry is moved to the nearest shift
/// that puts a boundary line through a mesh vertex of the 9 x 9 grid, then
/// offset by `eta` so that the vertex lies just inside the domain.
std::vector<double> small_cut_shifts(int count = 31, double spacing = 0.01, double eta = 1e-6);

struct SmallCutRow {
  double gamma1 = 0.0;
  double l = 0.0;
  double kappa = 0.0;
  double rel_h10 = 0.0;
  double rel_l2 = 0.0;
  int dofs = 0;
};

struct BoundaryLayerRow {
  double delta_c = 0.0;
  double min_uh = 0.0;
  double max_uh = 0.0;
  int dofs = 0;
};

struct ExperimentResult {
  ConvergenceTable table;                  ///< convergence experiments
  std::vector<SmallCutRow> small_cut;      ///< small_cut
  std::vector<BoundaryLayerRow> boundary;  ///< boundary_layer
  std::vector<std::string> failures;       ///< one message per failed level or sweep point
  std::vector<std::filesystem::path> files;
  bool ok() const { return failures.empty(); }
};

/// Runs the experiment and writes its outputs to config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Registry problem with the config's parameter overrides applied.
ProblemSpec configured_problem(const ExperimentConfig& config);
/// Background mesh of the config's first level.
Mesh configured_base_mesh(const ExperimentConfig& config, const ProblemSpec& problem);

std::vector<SmallCutRow> run_small_cut_sweep(const ExperimentConfig& config,
                                             std::vector<std::string>* failures = nullptr);
std::vector<BoundaryLayerRow> run_boundary_layer(const ExperimentConfig& config,
                                                 std::vector<std::string>* failures = nullptr);

/// Extremes of u_h over the dofs whose vertex satisfies phi <= 0.
std::pair<double, double> extremes_in_domain(const FeSpace& space, const Eigen::VectorXd& u,
                                             const LevelSet& phi);

/// Point field u_h (zero off the active mesh), a validity mask and the
/// element classes.
void write_solution_vtk(std::ostream& out, const Mesh& mesh, const Discretization& disc,
                        const Eigen::VectorXd& u);

void write_small_cut_csv(std::ostream& out, const std::vector<SmallCutRow>& rows);
void write_boundary_layer_csv(std::ostream& out, const std::vector<BoundaryLayerRow>& rows);

}  // namespace stfem
