#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stfem/experiments.hpp"

using namespace stfem;

namespace {

void print_table(const ConvergenceTable& t) {
  std::printf("%12s %9s %12s %7s %12s %7s %12s\n", "h", "dofs", "H10 error", "order", "L2 error",
              "order", "kappa");
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& r = t.rows[k];
    auto order = [&](const std::vector<std::optional<double>>& o) {
      return k > 0 && o[k - 1] ? *o[k - 1] : std::nan("");
    };
    std::printf("%12.4e %9d %12.4e %7.2f %12.4e %7.2f %12.4e\n", r.h, r.dofs, r.rel_h10,
                order(t.h10_orders), r.rel_l2, order(t.l2_orders), r.kappa);
  }
}

int run_solve(const std::string& config_path, int refinements, const std::string& out, int depth) {
  ExperimentConfig config = load_config(config_path);
  if (refinements >= 0) config.refinements = refinements;
  if (!out.empty()) config.output_dir = out;
  if (depth > 0) {
    config.geometry.quadrature_depth = depth;
    config.error_depth = std::max(config.error_depth, depth + 1);
  }
  config.validate();
  std::cout << "problem " << config.problem << ", output " << config.output_dir.string() << "\n";
  const ExperimentResult result = run_experiment(config);
  if (!result.table.rows.empty()) print_table(result.table);
  if (!result.small_cut.empty()) write_small_cut_csv(std::cout, result.small_cut);
  if (!result.boundary.empty()) write_boundary_layer_csv(std::cout, result.boundary);
  for (const auto& f : result.files) std::cout << "wrote " << f.string() << "\n";
  for (const auto& f : result.failures) std::cerr << "failed: " << f << "\n";
  return result.ok() ? 0 : 1;
}

int run_list() {
  for (const auto& e : problem_registry()) {
    std::printf("%-22s %s\n", e.name.c_str(), e.description.c_str());
  }
  return 0;
}

int run_check() {
  bool ok = true;
  for (const auto& e : problem_registry()) {
    const ProblemSpec p = e.make();
    p.validate();
    const ResidualCheck r = check_pde_residual(p);
    std::printf("%-22s %s  residual %.2e  gradient %.2e%s\n", e.name.c_str(), r.ok ? "ok  " : "FAIL",
                r.max_pde_residual, r.max_gradient_mismatch,
                p.has_exact_solution() ? "" : "  (no exact solution)");
    ok = ok && r.ok;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unfitted space-time finite elements for parabolic problems on moving domains"};
  app.require_subcommand(1);

  std::string config_path, out;
  int refinements = -1, depth = 0;
  auto* solve_cmd = app.add_subcommand("solve", "Run an experiment from a config file");
  solve_cmd->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--refinements", refinements, "Number of uniform refinements")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--out", out, "Output directory");
  solve_cmd->add_option("--depth", depth, "Cut quadrature depth for assembly")->check(CLI::PositiveNumber);

  auto* list_cmd = app.add_subcommand("list-problems", "List the registered problems");
  auto* check_cmd = app.add_subcommand("check-registry", "Check manufactured data of every problem");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve_cmd) return run_solve(config_path, refinements, out, depth);
    if (*list_cmd) return run_list();
    if (*check_cmd) return run_check();
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
