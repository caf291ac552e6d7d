#include "stfem/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "stfem/svg.hpp"

namespace stfem {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<T> out;
  T v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw std::invalid_argument("config: bad list for '" + key + "'");
  return out;
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T v;
  if (!(in >> v) || !(in >> std::ws).eof())
    throw std::invalid_argument("config: bad value '" + text + "' for '" + key + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw std::invalid_argument("config: bad boolean '" + text + "' for '" + key + "'");
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

fs::path write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  body(out);
  if (!out) throw std::runtime_error("error while writing " + path.string());
  return path;
}

bool is_convergence_problem(const std::string& name) {
  return name == "stefan" || name == "oscillating_interval" || name == "moving_circle" ||
         name == "flower";
}

}  // namespace

void ExperimentConfig::validate() const {
  const RegistryEntry& entry = registry_entry(problem);
  const int dim = entry.make().box.dim();
  if (!n_cells.empty()) {
    if (static_cast<int>(n_cells.size()) != dim)
      throw std::invalid_argument("config: n_cells needs " + std::to_string(dim) + " entries");
    for (int n : n_cells)
      if (n < 1) throw std::invalid_argument("config: n_cells entries must be positive");
  }
  if (geometry.classification_depth < 0 || geometry.quadrature_depth < 1)
    throw std::invalid_argument("config: depths must be positive");
  if (geometry.order != 1 && geometry.order != 2)
    throw std::invalid_argument("config: quadrature order must be 1 or 2");
  if (error_depth < geometry.quadrature_depth + 1)
    throw std::invalid_argument("config: error_depth must exceed quadrature_depth");
  if (is_convergence_problem(problem) && refinements == 0)
    throw std::invalid_argument("config: a convergence study needs at least one refinement");
  if (gamma == 0.0) throw std::invalid_argument("config: gamma must be positive");
  if (!(solve.tol > 0.0)) throw std::invalid_argument("config: solver tol must be positive");
  if (!(condition.rel_tol > 0.0) || condition.max_iterations < 1)
    throw std::invalid_argument("config: bad condition-number settings");
  for (double g : gamma1_values)
    if (g < 0.0) throw std::invalid_argument("config: gamma1 values must be non-negative");
  for (double d : delta_c_values)
    if (d < 0.0) throw std::invalid_argument("config: delta_c values must be non-negative");
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  const std::set<std::string> known = {
      "problem.name",
      "mesh.n_cells", "mesh.pre_refinements", "mesh.refinements", "mesh.penalty_length",
      "geometry.classification_depth", "geometry.quadrature_depth", "geometry.error_depth",
      "geometry.order",
      "stabilization.gamma", "stabilization.gamma1", "stabilization.delta",
      "solver.tol", "solver.iterative_threshold", "solver.restart", "solver.max_iterations",
      "condition.compute", "condition.dense_threshold", "condition.rel_tol",
      "condition.max_iterations",
      "output.directory", "output.vtk",
      "small_cut.shifts", "small_cut.gamma1_values",
      "boundary_layer.delta_c_values"};
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw std::invalid_argument("config: key '" + section + "' outside a section");
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      if (!known.count(full)) throw std::invalid_argument("config: unknown key '" + full + "'");
      const std::string v = node.data();
      if (full == "problem.name") c.problem = v;
      else if (full == "mesh.n_cells") c.n_cells = parse_list<int>(full, v);
      else if (full == "mesh.pre_refinements") c.pre_refinements = parse_value<int>(full, v);
      else if (full == "mesh.refinements") c.refinements = parse_value<int>(full, v);
      else if (full == "mesh.penalty_length") {
        if (v == "diameter") c.penalty = PenaltyLength::Diameter;
        else if (v == "grid") c.penalty = PenaltyLength::GridSpacing;
        else throw std::invalid_argument("config: penalty_length must be 'diameter' or 'grid'");
      }
      else if (full == "geometry.classification_depth") c.geometry.classification_depth = parse_value<int>(full, v);
      else if (full == "geometry.quadrature_depth") c.geometry.quadrature_depth = parse_value<int>(full, v);
      else if (full == "geometry.error_depth") c.error_depth = parse_value<int>(full, v);
      else if (full == "geometry.order") c.geometry.order = parse_value<int>(full, v);
      else if (full == "stabilization.gamma") c.gamma = parse_value<double>(full, v);
      else if (full == "stabilization.gamma1") c.gamma1 = parse_value<double>(full, v);
      else if (full == "stabilization.delta") c.delta = parse_value<double>(full, v);
      else if (full == "solver.tol") c.solve.tol = parse_value<double>(full, v);
      else if (full == "solver.iterative_threshold") c.solve.iterative_threshold = parse_value<int>(full, v);
      else if (full == "solver.restart") c.solve.restart = parse_value<int>(full, v);
      else if (full == "solver.max_iterations") c.solve.max_iterations = parse_value<int>(full, v);
      else if (full == "condition.compute") c.compute_kappa = parse_bool(full, v);
      else if (full == "condition.dense_threshold") c.condition.dense_threshold = parse_value<int>(full, v);
      else if (full == "condition.rel_tol") c.condition.rel_tol = parse_value<double>(full, v);
      else if (full == "condition.max_iterations") c.condition.max_iterations = parse_value<int>(full, v);
      else if (full == "output.directory") c.output_dir = v;
      else if (full == "output.vtk") c.write_vtk = parse_bool(full, v);
      else if (full == "small_cut.shifts") c.shifts = parse_list<double>(full, v);
      else if (full == "small_cut.gamma1_values") c.gamma1_values = parse_list<double>(full, v);
      else if (full == "boundary_layer.delta_c_values") c.delta_c_values = parse_list<double>(full, v);
    }
  }
  if (c.problem.empty()) throw std::invalid_argument("config: [problem] name is required");
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  return parse_config(in);
}

std::vector<double> small_cut_shifts(int count, double spacing, double eta) {
  using std::numbers::pi;
  constexpr int n = 9;
  const double a0 = pi / 24, b0 = pi / 6;
  const double l_max = spacing * (count - 1);
  std::vector<double> out;
  for (int j = 0; j < count; ++j) {
    const double base = spacing * j;
    if (j % 2 == 0) {
      out.push_back(base);
      continue;
    }
    // Vertex (i/n, k/n) lies on x = c + l + t/7 for l = i/n - c - k/(7n).
    double best = base, best_dist = 1e300;
    for (int side = 0; side < 2; ++side) {
      const double c = side == 0 ? a0 : b0;
      for (int i = 0; i <= n; ++i)
        for (int k = 0; k <= n; ++k) {
          const double l = static_cast<double>(i) / n - c - static_cast<double>(k) / (7 * n);
          // Left boundary: move it left of the vertex; right boundary: right of it.
          const double shifted = side == 0 ? l - eta : l + eta;
          if (shifted < 0.0 || shifted > l_max) continue;
          const double dist = std::abs(shifted - base);
          if (dist < best_dist - 1e-15) {
            best_dist = dist;
            best = shifted;
          }
        }
    }
    out.push_back(best);
  }
  return out;
}

ProblemSpec configured_problem(const ExperimentConfig& config) {
  ProblemSpec p = registry_entry(config.problem).make();
  if (config.gamma > 0.0) p.params.gamma = config.gamma;
  if (config.gamma1 >= 0.0) p.params.gamma1 = config.gamma1;
  if (config.delta >= 0.0) p.params.delta = config.delta;
  return p;
}

Mesh configured_base_mesh(const ExperimentConfig& config, const ProblemSpec& problem) {
  const RegistryEntry& entry = registry_entry(config.problem);
  const auto& cells = config.n_cells.empty() ? entry.mesh.n_cells : config.n_cells;
  const int pre = config.pre_refinements >= 0 ? config.pre_refinements : entry.mesh.pre_refinements;
  Mesh mesh = build_cartesian_simplicial_mesh(problem.box, cells);
  for (int k = 0; k < pre; ++k) mesh = uniform_refine(mesh);
  return mesh;
}

std::pair<double, double> extremes_in_domain(const FeSpace& space, const Eigen::VectorXd& u,
                                             const LevelSet& phi) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int d = 0; d < space.num_dofs(); ++d) {
    if (phi(space.mesh().vertex(space.vertex_of_dof(d))) > 0.0) continue;
    lo = std::min(lo, u(d));
    hi = std::max(hi, u(d));
  }
  return {lo, hi};
}

void write_solution_vtk(std::ostream& out, const Mesh& mesh, const Discretization& disc,
                        const Eigen::VectorXd& u) {
  VtkField uh{"u_h", std::vector<double>(mesh.num_vertices(), 0.0)};
  VtkField valid{"valid", std::vector<double>(mesh.num_vertices(), 0.0)};
  for (int d = 0; d < disc.space.num_dofs(); ++d) {
    const int v = disc.space.vertex_of_dof(d);
    uh.values[v] = u(d);
    valid.values[v] = 1.0;
  }
  VtkField cls{"element_class", {}};
  cls.values.reserve(mesh.num_elements());
  for (ElementClass c : disc.geometry.labels())
    cls.values.push_back(c == ElementClass::Interior ? 0.0 : c == ElementClass::Cut ? 1.0 : 2.0);
  write_vtk(out, mesh, {uh, valid}, {cls});
}

void write_small_cut_csv(std::ostream& out, const std::vector<SmallCutRow>& rows) {
  out << "gamma1,l,kappa,h10_err,l2_err,dofs\n";
  for (const auto& r : rows)
    out << short_number(r.gamma1) << ',' << format_number(r.l) << ',' << format_number(r.kappa)
        << ',' << format_number(r.rel_h10) << ',' << format_number(r.rel_l2) << ',' << r.dofs
        << '\n';
}

void write_boundary_layer_csv(std::ostream& out, const std::vector<BoundaryLayerRow>& rows) {
  out << "delta_c,min_uh,max_uh,dofs\n";
  for (const auto& r : rows)
    out << short_number(r.delta_c) << ',' << format_number(r.min_uh) << ','
        << format_number(r.max_uh) << ',' << r.dofs << '\n';
}

std::vector<SmallCutRow> run_small_cut_sweep(const ExperimentConfig& config,
                                             std::vector<std::string>* failures) {
  const std::vector<double> shifts = config.shifts.empty() ? small_cut_shifts() : config.shifts;
  std::vector<SmallCutRow> rows;
  for (double g1 : config.gamma1_values) {
    for (double l : shifts) {
      ProblemSpec p = registry_small_cut(l);
      if (config.gamma > 0.0) p.params.gamma = config.gamma;
      if (config.delta >= 0.0) p.params.delta = config.delta;
      p.params.gamma1 = g1;
      SmallCutRow row;
      row.gamma1 = g1;
      row.l = l;
      row.kappa = row.rel_h10 = row.rel_l2 = std::nan("");
      try {
        const Mesh mesh = configured_base_mesh(config, p);
        const Discretization disc =
            discretize(p, mesh, config.geometry, penalty_length(mesh, config.penalty));
        row.dofs = disc.space.num_dofs();
        row.kappa = condition_number(disc.system, config.condition).kappa;
        const SolveReport sol = solve(disc.system, config.solve);
        const RelativeErrors err =
            relative_errors(disc.space, sol.solution, p, disc.geometry, config.error_depth);
        row.rel_h10 = err.h10;
        row.rel_l2 = err.l2;
      } catch (const std::exception& ex) {
        if (failures)
          failures->push_back("small_cut gamma1=" + short_number(g1) + " l=" + format_number(l) +
                              ": " + ex.what());
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<BoundaryLayerRow> run_boundary_layer(const ExperimentConfig& config,
                                                 std::vector<std::string>* failures) {
  std::vector<BoundaryLayerRow> rows;
  for (double dc : config.delta_c_values) {
    ProblemSpec p = registry_boundary_layer(dc);
    if (config.gamma > 0.0) p.params.gamma = config.gamma;
    if (config.gamma1 >= 0.0) p.params.gamma1 = config.gamma1;
    BoundaryLayerRow row;
    row.delta_c = dc;
    row.min_uh = row.max_uh = std::nan("");
    try {
      const Mesh mesh = configured_base_mesh(config, p);
      const Discretization disc =
          discretize(p, mesh, config.geometry, penalty_length(mesh, config.penalty));
      const SolveReport sol = solve(disc.system, config.solve);
      std::tie(row.min_uh, row.max_uh) = extremes_in_domain(disc.space, sol.solution, p.levelset);
      row.dofs = disc.space.num_dofs();
      if (config.write_vtk) {
        fs::create_directories(config.output_dir);
        write_file(config.output_dir / ("boundary_layer_dc" + short_number(dc) + ".vtk"),
                   [&](std::ostream& out) { write_solution_vtk(out, mesh, disc, sol.solution); });
      }
    } catch (const std::exception& ex) {
      if (failures) failures->push_back("boundary_layer delta_c=" + short_number(dc) + ": " + ex.what());
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

void write_convergence_outputs(const ExperimentConfig& config, const std::string& name,
                               ExperimentResult& result) {
  const auto& rows = result.table.rows;
  const fs::path dir = config.output_dir;
  result.files.push_back(write_file(dir / (name + "_convergence.csv"),
                                    [&](std::ostream& out) { result.table.write_csv(out); }));

  std::vector<double> h, h10, l2, kappa;
  for (const auto& r : rows) {
    h.push_back(r.h);
    h10.push_back(r.rel_h10);
    l2.push_back(r.rel_l2);
    kappa.push_back(r.kappa);
  }
  auto fitted = [&](const std::vector<double>& y, std::size_t last) -> std::string {
    std::vector<double> fx, fy;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (std::isfinite(y[i]) && y[i] > 0.0) {
        fx.push_back(h[i]);
        fy.push_back(y[i]);
      }
    if (fx.size() > last) {
      fx.erase(fx.begin(), fx.end() - static_cast<std::ptrdiff_t>(last));
      fy.erase(fy.begin(), fy.end() - static_cast<std::ptrdiff_t>(last));
    }
    if (fx.size() < 2) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", loglog_slope(fx, fy));
    return buf;
  };

  LinePlot err;
  err.title = name + ": relative errors";
  err.x_label = "h";
  err.y_label = "relative error";
  err.series = {{"H10 error", h, h10}, {"L2 error", h, l2}};
  err.notes = {"fitted slopes: H10 " + fitted(h10, rows.size()) + ", L2 " + fitted(l2, rows.size())};
  result.files.push_back(write_file(dir / (name + "_errors.svg"), [&](std::ostream& out) { write_svg(out, err); }));

  if (config.compute_kappa) {
    LinePlot kp;
    kp.title = name + ": condition number";
    kp.x_label = "h";
    kp.y_label = "kappa(A)";
    kp.series = {{"kappa(A)", h, kappa}};
    kp.notes = {"fitted slope (finest 3 levels): " + fitted(kappa, 3)};
    result.files.push_back(write_file(dir / (name + "_kappa.svg"), [&](std::ostream& out) { write_svg(out, kp); }));
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  fs::create_directories(config.output_dir);
  const std::string& name = config.problem;

  if (is_convergence_problem(name)) {
    const ProblemSpec problem = configured_problem(config);
    const Mesh base = configured_base_mesh(config, problem);
    StudyOptions opt;
    opt.n_refinements =
        config.refinements >= 0 ? config.refinements : registry_entry(name).default_levels;
    opt.geometry = config.geometry;
    opt.error_depth = config.error_depth;
    opt.compute_kappa = config.compute_kappa;
    opt.penalty = config.penalty;
    opt.solve = config.solve;
    opt.condition = config.condition;
    opt.stop_on_failure = false;
    const fs::path vtk = config.output_dir / (name + "_solution.vtk");
    result.table = run_convergence_study(
        problem, base, opt,
        [&](int level, const Mesh& mesh, const Discretization& disc, const Eigen::VectorXd& u) {
          if (config.write_vtk && level == opt.n_refinements) {
            write_file(vtk, [&](std::ostream& out) { write_solution_vtk(out, mesh, disc, u); });
            result.files.push_back(vtk);
          }
        });
    for (const auto& f : result.table.failures) result.failures.push_back(name + " " + f);
    write_convergence_outputs(config, name, result);
  } else if (name == "small_cut") {
    result.small_cut = run_small_cut_sweep(config, &result.failures);
    result.files.push_back(write_file(config.output_dir / "small_cut.csv", [&](std::ostream& out) {
      write_small_cut_csv(out, result.small_cut);
    }));
    LinePlot plot;
    plot.title = "small_cut: condition number against shift";
    plot.x_label = "shift l";
    plot.y_label = "kappa(A)";
    plot.log_x = false;
    for (double g1 : config.gamma1_values) {
      PlotSeries s{"gamma1 = " + short_number(g1), {}, {}};
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (const auto& r : result.small_cut)
        if (r.gamma1 == g1) {
          s.x.push_back(r.l);
          s.y.push_back(r.kappa);
          if (std::isfinite(r.kappa)) {
            lo = std::min(lo, r.kappa);
            hi = std::max(hi, r.kappa);
          }
        }
      plot.notes.push_back("gamma1 = " + short_number(g1) + ": max/min kappa = " +
                           format_number(hi / lo));
      plot.series.push_back(std::move(s));
    }
    result.files.push_back(write_file(config.output_dir / "small_cut_kappa.svg",
                                      [&](std::ostream& out) { write_svg(out, plot); }));
  } else if (name == "boundary_layer") {
    result.boundary = run_boundary_layer(config, &result.failures);
    if (config.write_vtk)
      for (const auto& r : result.boundary)
        if (std::isfinite(r.min_uh))
          result.files.push_back(config.output_dir /
                               ("boundary_layer_dc" + short_number(r.delta_c) + ".vtk"));
    result.files.push_back(write_file(config.output_dir / "boundary_layer.csv", [&](std::ostream& out) {
      write_boundary_layer_csv(out, result.boundary);
    }));
  }
  return result;
}

}  // namespace stfem
