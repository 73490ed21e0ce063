#include "pharmap/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>

#include "pharmap/io.hpp"
#include "pharmap/oracles.hpp"

namespace pharmap {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

std::string join_witness(const std::vector<double>& witness) {
  std::string out;
  for (size_t i = 0; i < witness.size(); ++i) {
    if (i) out += " ";
    out += format17(witness[i]);
  }
  return out;
}

// Deterministic orthonormal frame of the tangent space at a sphere point.
std::pair<Vec, Vec> cap_frame(const TargetManifold& target, const Vec& center) {
  const Vec n = center / center.norm();
  std::vector<Vec> frame;
  for (int axis = 0; axis < target.ambient_dim && frame.size() < 2; ++axis) {
    Vec v = Vec::Zero(target.ambient_dim);
    v[axis] = 1.0;
    v -= v.dot(n) * n;
    for (const Vec& prev : frame) v -= v.dot(prev) * prev;
    if (v.norm() > 1e-7) frame.push_back(v.normalized());
  }
  if (frame.size() < 2) throw Error("could not build a tangent frame at the cap center");
  return {frame[0], frame[1]};
}

struct ReportTable {
  CsvWriter csv{{"row", "trial", "label", "seed", "converged", "iterations",
                 "eps_final", "p_energy", "grad_norm", "el_residual_norm",
                 "max_triangle_gradient", "range_radius", "constraint_active",
                 "stalled", "max_pairwise_sup_distance", "energy_spread"}};

  void add_trial(int trial, const TrialOutcome& outcome) {
    const SolveResult& r = outcome.result;
    csv.add_row({"trial", std::to_string(trial), outcome.init_label,
                 std::to_string(outcome.seed), r.converged ? "true" : "false",
                 std::to_string(r.iterations), format17(r.eps_final),
                 format17(r.report.p_energy), format17(r.report.riemannian_gradient_norm),
                 format17(r.report.el_residual_norm),
                 format17(r.report.max_triangle_gradient),
                 format17(r.report.range_radius),
                 std::to_string(r.constraint_active_count),
                 r.line_search_stalled ? "true" : "false", "", ""});
  }

  void add_summary(double max_distance, double spread) {
    csv.add_row({"summary", "", "", "", "", "", "", "", "", "", "", "", "", "",
                 format17(max_distance), format17(spread)});
  }
};

CsvWriter make_oracle_csv() {
  return CsvWriter{{"name", "seed", "samples", "lhs", "rhs", "margin", "witness"}};
}

void add_oracle_row(CsvWriter& csv, const std::string& name, std::uint64_t seed,
                    int samples, const InequalityMargin& m) {
  csv.add_row({name, std::to_string(seed), std::to_string(samples), format17(m.lhs),
               format17(m.rhs), format17(m.margin), join_witness(m.witness)});
}

// Collects trace rows in memory; written to file once the trial finishes.
class TraceBuffer {
public:
  TraceSink sink() {
    return [this](const TraceRow& row) { rows_.push_back(row); };
  }

  void write(const fs::path& path) const {
    CsvWriter csv({"iteration", "eps", "energy", "grad_norm", "step"});
    for (const auto& r : rows_) {
      csv.add_row({std::to_string(r.iteration), format17(r.eps), format17(r.energy),
                   format17(r.grad_norm), format17(r.step)});
    }
    csv.write(path);
  }

private:
  std::vector<TraceRow> rows_;
};

InitMode init_mode_from_config(const SolverBlockConfig& solver, int ambient_dim) {
  if (solver.init == "harmonic_extension") return InitMode::harmonic_extension();
  if (solver.init == "random_in_ball") return InitMode::random_in_ball();
  if (solver.init == "constant") {
    if (static_cast<int>(solver.constant_point.size()) != ambient_dim) {
      throw ConfigInvalid("solver.constant_point must have ambient_dim entries",
                          "solver.constant_point", 0);
    }
    return InitMode::constant(to_vec(solver.constant_point));
  }
  throw ConfigInvalid("unknown solver.init `" + solver.init + "`", "solver.init", 0);
}

SolverConfig build_solver_config(const RunConfig& config, const TargetManifold& target) {
  const auto& s = config.solver;
  if (!s.has_p) {
    throw ConfigInvalid("missing required field solver.p", "solver.p", 0);
  }
  SolverConfig out;
  out.p = s.p;
  out.eps_schedule = s.eps_schedule;
  out.grad_tolerance = s.grad_tolerance;
  out.max_iterations = s.max_iterations;
  out.armijo = {s.armijo_step, s.armijo_shrink, s.armijo_slope};
  out.seed = s.seed;
  if (s.ball_auto || s.ball_radius != 0.0) {
    GeodesicBall ball;
    ball.radius = s.ball_auto ? 0.5 * small_range_radius(target) : s.ball_radius;
    const std::vector<double>& center =
        s.ball_center.empty() ? config.boundary.center : s.ball_center;
    if (static_cast<int>(center.size()) != target.ambient_dim) {
      throw ConfigInvalid("ball center must have ambient_dim entries",
                          "solver.ball_center", 0);
    }
    ball.center = to_vec(center);
    out.ball = std::move(ball);
  }
  return out;
}

struct Workspace {
  TargetManifold target;
  std::shared_ptr<const DomainMesh> mesh;
  BoundaryData boundary;
  SolverConfig solver;
};

Workspace build_workspace(const RunConfig& config) {
  Workspace w;
  w.target = build_manifold(config.manifold);
  w.mesh = build_mesh(config.mesh);
  w.boundary = boundary_generator(config.boundary.generator, config.boundary, *w.mesh,
                                  w.target);
  w.solver = build_solver_config(config, w.target);
  if (w.solver.ball && config.boundary.generator == "polar_cap" &&
      config.boundary.rho >= small_range_radius(w.target)) {
    throw ParamOutOfRange(
        "polar cap radius must stay below the small-range radius when a ball "
        "constraint is active");
  }
  return w;
}

double euclidean_range_radius(const ManifoldMap& map, const Vec& center) {
  double r = 0.0;
  for (Eigen::Index v = 0; v < map.values.rows(); ++v) {
    r = std::max(r, (map.values.row(v).transpose() - center).norm());
  }
  return r;
}

void write_timings(const fs::path& outdir, const std::vector<TrialOutcome>& trials) {
  CsvWriter csv({"trial", "label", "wall_seconds"});
  for (size_t i = 0; i < trials.size(); ++i) {
    std::ostringstream t;
    t << trials[i].wall_seconds;
    csv.add_row({std::to_string(i), trials[i].init_label, t.str()});
  }
  csv.write(outdir / "timings.csv");
}

int command_solve(const RunConfig& config, const fs::path& outdir) {
  Workspace w = build_workspace(config);
  write_mesh_file(outdir / "mesh.txt", *w.mesh);

  const InitMode mode = init_mode_from_config(config.solver, w.target.ambient_dim);
  const ManifoldMap init = initialize_map(w.mesh, w.target, w.boundary, w.solver, mode);
  TraceBuffer trace;
  const auto start = std::chrono::steady_clock::now();
  SolveResult result = solve(w.target, w.boundary, w.solver, init, trace.sink());
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  trace.write(outdir / "trace_trial_0.csv");
  write_map_file(outdir / "map_trial_0.txt", result.map.values);

  ReportTable table;
  TrialOutcome outcome{config.solver.init, config.solver.seed, result, elapsed.count()};
  table.add_trial(0, outcome);
  table.csv.write(outdir / "report.csv");
  write_timings(outdir, {outcome});

  std::cout << "solve: converged=" << (result.converged ? "true" : "false")
            << " iterations=" << result.iterations
            << " energy=" << format17(result.report.p_energy)
            << " grad_norm=" << format17(result.report.riemannian_gradient_norm) << "\n";
  return (!result.converged && config.strict) ? 3 : 0;
}

int command_uniqueness(const RunConfig& config, const fs::path& outdir) {
  Workspace w = build_workspace(config);
  if (!w.solver.ball) {
    throw ConfigInvalid("uniqueness needs solver.ball_radius > 0 or `auto`",
                        "solver.ball_radius", 0);
  }
  write_mesh_file(outdir / "mesh.txt", *w.mesh);

  std::vector<std::unique_ptr<TraceBuffer>> traces(
      static_cast<size_t>(config.solver.trials) + 1);
  for (auto& t : traces) t = std::make_unique<TraceBuffer>();
  const TraceFactory factory = [&traces](int index, const std::string&) {
    return traces[static_cast<size_t>(index)]->sink();
  };
  ExperimentReport report =
      uniqueness_experiment(w.mesh, w.target, w.boundary, w.solver,
                            config.solver.trials, config.threads, factory);

  ReportTable table;
  for (size_t i = 0; i < report.trials.size(); ++i) {
    table.add_trial(static_cast<int>(i), report.trials[i]);
    traces[i]->write(outdir / ("trace_trial_" + std::to_string(i) + ".csv"));
    write_map_file(outdir / ("map_trial_" + std::to_string(i) + ".txt"),
                   report.trials[i].result.map.values);
  }
  table.add_summary(report.max_pairwise_sup_distance, report.energy_spread);
  table.csv.write(outdir / "report.csv");
  write_timings(outdir, report.trials);

  // Stability margins on each converged solution, against its own Euclidean
  // enclosing radius.
  if (config.oracles.stability_fields > 0) {
    CsvWriter oracle_csv = make_oracle_csv();
    for (size_t i = 0; i < report.trials.size(); ++i) {
      const SolveResult& r = report.trials[i].result;
      if (!r.converged) continue;
      GeodesicBall euclidean;
      euclidean.center = w.solver.ball->center;
      euclidean.radius = euclidean_range_radius(r.map, euclidean.center);
      const std::uint64_t seed = config.oracles.seed_validate + i;
      const InequalityMargin worst = stability_check_randomized(
          r.map, euclidean, w.solver.p, config.oracles.stability_fields, seed);
      add_oracle_row(oracle_csv, "stability_trial_" + std::to_string(i), seed,
                     config.oracles.stability_fields, worst);
    }
    oracle_csv.write(outdir / "oracle_report.csv");
  }

  std::cout << "uniqueness: converged " << report.converged_count << "/"
            << report.trials.size()
            << " max_pairwise_sup_distance=" << format17(report.max_pairwise_sup_distance)
            << " energy_spread=" << format17(report.energy_spread) << "\n";
  const bool all_converged =
      report.converged_count == static_cast<int>(report.trials.size());
  return (!all_converged && config.strict) ? 3 : 0;
}

int command_nonuniqueness(const RunConfig& config, const fs::path& outdir) {
  Workspace w = build_workspace(config);
  if (w.solver.ball) {
    throw ConfigInvalid("nonuniqueness-demo runs unconstrained; set ball_radius = 0",
                        "solver.ball_radius", 0);
  }
  write_mesh_file(outdir / "mesh.txt", *w.mesh);

  const Vec north = detail::project_robust(w.target, to_vec(config.boundary.center));
  const Vec south = detail::project_robust(w.target, (-north).eval());
  std::vector<TrialOutcome> outcomes;
  int index = 0;
  for (const Vec& pole : {north, south}) {
    TraceBuffer trace;
    const auto start = std::chrono::steady_clock::now();
    const ManifoldMap init =
        initialize_map(w.mesh, w.target, w.boundary, w.solver, InitMode::constant(pole));
    SolveResult result = solve(w.target, w.boundary, w.solver, init, trace.sink());
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;
    trace.write(outdir / ("trace_trial_" + std::to_string(index) + ".csv"));
    write_map_file(outdir / ("map_trial_" + std::to_string(index) + ".txt"),
                   result.map.values);
    outcomes.push_back({index == 0 ? "constant_north" : "constant_south", 0,
                        std::move(result), elapsed.count()});
    ++index;
  }

  const double distance =
      sup_vertex_distance(outcomes[0].result.map, outcomes[1].result.map);
  const double gap = std::abs(outcomes[0].result.report.p_energy -
                              outcomes[1].result.report.p_energy);
  ReportTable table;
  table.add_trial(0, outcomes[0]);
  table.add_trial(1, outcomes[1]);
  table.add_summary(distance, gap);
  table.csv.write(outdir / "report.csv");
  write_timings(outdir, outcomes);

  std::cout << "nonuniqueness-demo: sup_distance=" << format17(distance)
            << " energy_gap=" << format17(gap) << "\n";
  const bool all_converged =
      outcomes[0].result.converged && outcomes[1].result.converged;
  return (!all_converged && config.strict) ? 3 : 0;
}

int command_oracles(const RunConfig& config, const fs::path& outdir) {
  CsvWriter csv = make_oracle_csv();
  const auto& o = config.oracles;

  // Vector inequalities over every (dim, q) cell: record the worst margin.
  for (size_t di = 0; di < o.dims.size(); ++di) {
    for (size_t qi = 0; qi < o.q_values.size(); ++qi) {
      const int dim = o.dims[di];
      const double q = o.q_values[qi];
      const std::uint64_t seed =
          o.seed_estimate + 1000 * static_cast<std::uint64_t>(di) + qi;
      rng::Engine gen(seed);
      InequalityMargin worst_mono, worst_lip;
      bool first = true;
      for (int s = 0; s < o.samples; ++s) {
        const Vec x = rng::gaussian(gen, dim);
        const Vec y = rng::gaussian(gen, dim);
        const InequalityMargin mono = check_monotonicity_inequality(x, y, q);
        const InequalityMargin lip = check_lipschitz_inequality(x, y, q);
        if (first || mono.margin / mono.scale() < worst_mono.margin / worst_mono.scale()) {
          worst_mono = mono;
        }
        if (first || lip.margin / lip.scale() < worst_lip.margin / worst_lip.scale()) {
          worst_lip = lip;
        }
        first = false;
      }
      std::ostringstream label;
      label << "_dim" << dim << "_q" << format17(q);
      add_oracle_row(csv, "monotonicity" + label.str(), seed, o.samples, worst_mono);
      add_oracle_row(csv, "power_lipschitz" + label.str(), seed, o.samples, worst_lip);
    }
  }

  // Second-fundamental-form difference bound: estimate on one seed, validate
  // with 5% headroom on a disjoint seed, on the standard fixtures plus the
  // configured manifold when it differs.
  std::vector<std::pair<std::string, TargetManifold>> fixtures = {
      {"unit_sphere", make_unit_sphere()}, {"ellipsoid_2_1_1", make_ellipsoid(2, 1, 1)}};
  const TargetManifold configured = build_manifold(config.manifold);
  if (configured.kind == ManifoldKind::Torus ||
      (configured.kind == ManifoldKind::Sphere && configured.params[0] != 1.0) ||
      (configured.kind == ManifoldKind::Ellipsoid &&
       configured.params != Eigen::Vector3d(2, 1, 1))) {
    fixtures.emplace_back("configured_" + config.manifold.kind, configured);
  }
  for (const auto& [label, manifold] : fixtures) {
    const double c_hat = estimate_sff_constant(manifold, o.samples, o.seed_estimate);
    InequalityMargin estimate_row;
    estimate_row.lhs = 0.0;
    estimate_row.rhs = c_hat;
    estimate_row.margin = c_hat;
    add_oracle_row(csv, "sff_constant_" + label, o.seed_estimate, o.samples,
                   estimate_row);
    const InequalityMargin worst =
        check_sff_inequality(manifold, c_hat, o.samples, o.seed_validate);
    add_oracle_row(csv, "sff_difference_" + label, o.seed_validate, o.samples, worst);
  }

  csv.write(outdir / "report.csv");
  std::cout << "oracles: report written to " << (outdir / "report.csv").string() << "\n";
  return 0;
}

int command_sweep(const RunConfig& config, const fs::path& outdir) {
  const TargetManifold target = build_manifold(config.manifold);
  const auto mesh = build_mesh(config.mesh);
  write_mesh_file(outdir / "mesh.txt", *mesh);

  CsvWriter csv({"row", "p", "rho", "trials", "converged",
                 "max_pairwise_sup_distance", "energy_spread", "status"});
  for (double p : config.sweep.p_values) {
    for (double rho : config.sweep.rho_values) {
      RunConfig cell = config;
      cell.solver.p = p;
      cell.solver.has_p = true;
      cell.boundary.rho = rho;
      cell.boundary.generator = "polar_cap";
      std::string status = "ok";
      double distance = 0.0, spread = 0.0;
      int converged = 0;
      try {
        const BoundaryData boundary =
            boundary_generator("polar_cap", cell.boundary, *mesh, target);
        const SolverConfig solver = build_solver_config(cell, target);
        if (!solver.ball) {
          throw ConfigInvalid("sweep needs solver.ball_radius > 0 or `auto`",
                              "solver.ball_radius", 0);
        }
        ExperimentReport report = uniqueness_experiment(
            mesh, target, boundary, solver, cell.solver.trials, config.threads);
        distance = report.max_pairwise_sup_distance;
        spread = report.energy_spread;
        converged = report.converged_count;
      } catch (const ConfigInvalid&) {
        throw;  // configuration problems abort the whole sweep
      } catch (const Error& e) {
        status = std::string("infeasible: ") + e.what();
      }
      csv.add_row({"cell", format17(p), format17(rho),
                   std::to_string(config.solver.trials + 1), std::to_string(converged),
                   format17(distance), format17(spread), status});
    }
  }
  csv.write(outdir / "report.csv");
  std::cout << "sweep: report written to " << (outdir / "report.csv").string() << "\n";
  return 0;
}

}  // namespace

TargetManifold build_manifold(const ManifoldConfig& config) {
  TargetManifold m;
  if (config.kind == "sphere") {
    m = make_sphere(config.radius, config.ambient_dim);
  } else if (config.kind == "ellipsoid") {
    if (config.semi_axes.size() != 3) {
      throw ConfigInvalid("manifold.semi_axes needs three entries", "manifold.semi_axes",
                          0);
    }
    m = make_ellipsoid(config.semi_axes[0], config.semi_axes[1], config.semi_axes[2]);
  } else if (config.kind == "torus") {
    if (config.radii.size() != 2) {
      throw ConfigInvalid("manifold.radii needs two entries (major minor)",
                          "manifold.radii", 0);
    }
    m = make_torus(config.radii[0], config.radii[1]);
  } else {
    throw ConfigInvalid("unknown manifold.kind `" + config.kind + "`", "manifold.kind",
                        0);
  }
  if (config.projection_tolerance <= 0.0) {
    throw ConfigInvalid("manifold.projection_tolerance must be positive",
                        "manifold.projection_tolerance", 0);
  }
  m.projection_tolerance = config.projection_tolerance;
  return m;
}

std::shared_ptr<const DomainMesh> build_mesh(const MeshConfig& config) {
  if (config.builder == "square") {
    return std::make_shared<const DomainMesh>(build_unit_square_grid(config.n_per_side));
  }
  if (config.builder == "disk") {
    return std::make_shared<const DomainMesh>(build_unit_disk_mesh(config.refinement));
  }
  if (config.builder == "file") {
    if (config.path.empty()) {
      throw ConfigInvalid("mesh.builder = file needs mesh.path", "mesh.path", 0);
    }
    return std::make_shared<const DomainMesh>(read_mesh_file(config.path));
  }
  throw ConfigInvalid("unknown mesh.builder `" + config.builder + "`", "mesh.builder", 0);
}

BoundaryData boundary_generator(const std::string& name, const BoundaryConfig& params,
                                const DomainMesh& mesh, const TargetManifold& target) {
  BoundaryData data;
  if (name == "polar_cap" || name == "equator") {
    if (target.kind != ManifoldKind::Sphere) {
      throw UnsupportedTarget("cap boundary generators need a sphere target");
    }
    const double radius = target.params[0];
    const double rho = (name == "equator") ? 0.5 * kPi * radius : params.rho;
    if (rho < 0.0 || rho > kPi * radius) {
      throw ParamOutOfRange("cap radius must lie in [0, pi * R]");
    }
    if (static_cast<int>(params.center.size()) != target.ambient_dim) {
      throw ParamOutOfRange("cap center must have ambient_dim entries");
    }
    Vec center = to_vec(params.center);
    detail::require_on_manifold(target, center, "boundary cap center");
    const auto [e1, e2] = cap_frame(target, center);
    const Vec p_hat = center / radius;

    const std::vector<int> loop = boundary_loop(mesh);
    const std::vector<double> arc = boundary_arc_parameter(mesh, loop);
    const double angle = rho / radius;
    for (size_t i = 0; i < loop.size(); ++i) {
      const double turn = 2.0 * kPi * arc[i];
      const Vec value =
          radius * (std::cos(angle) * p_hat +
                    std::sin(angle) * (std::cos(turn) * e1 + std::sin(turn) * e2));
      data.values[loop[i]] = value;
    }
    return data;
  }
  if (name == "custom") {
    if (params.path.empty()) {
      throw ParamOutOfRange("custom boundary generator needs boundary.path");
    }
    const Eigen::MatrixXd values = read_map_file(params.path);
    if (values.rows() != mesh.num_vertices() || values.cols() != target.ambient_dim) {
      throw ParamOutOfRange("custom boundary map has the wrong shape for this mesh");
    }
    for (int v : mesh.boundary_vertices) data.values[v] = values.row(v).transpose();
    return data;
  }
  throw UnknownGenerator("unknown boundary generator `" + name + "`");
}

int run_config(RunConfig config) {
  try {
    const fs::path outdir = config.outdir;
    fs::create_directories(outdir);
    {
      std::ofstream canonical(outdir / "config.canonical");
      if (!canonical) throw IoError("cannot write config.canonical");
      canonical << serialize_config(config);
    }
    if (config.command == "solve") return command_solve(config, outdir);
    if (config.command == "uniqueness") return command_uniqueness(config, outdir);
    if (config.command == "nonuniqueness-demo") return command_nonuniqueness(config, outdir);
    if (config.command == "oracles") return command_oracles(config, outdir);
    if (config.command == "sweep") return command_sweep(config, outdir);
    throw ConfigInvalid("unknown command `" + config.command + "`", "run.command", 0);
  } catch (const ConfigInvalid& e) {
    std::cerr << "configuration error";
    if (!e.field().empty()) std::cerr << " [" << e.field() << "]";
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << ": " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int run(const std::filesystem::path& config_path, const CliOverrides& overrides) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigInvalid& e) {
    std::cerr << "configuration error";
    if (!e.field().empty()) std::cerr << " [" << e.field() << "]";
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << ": " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (overrides.command) config.command = *overrides.command;
  if (overrides.outdir) config.outdir = *overrides.outdir;
  if (overrides.strict) config.strict = *overrides.strict;
  if (overrides.threads) config.threads = *overrides.threads;
  return run_config(std::move(config));
}

}  // namespace pharmap
