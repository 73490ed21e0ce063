#include "pharmap/solver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>

#include "pharmap/rng.hpp"

namespace pharmap {

namespace {

void validate_config(const TargetManifold& target, const SolverConfig& config) {
  if (config.p < 2.0) throw ParamOutOfRange("solver requires p >= 2");
  if (config.eps_schedule.empty()) throw ParamOutOfRange("eps schedule is empty");
  for (size_t i = 1; i < config.eps_schedule.size(); ++i) {
    if (config.eps_schedule[i] > config.eps_schedule[i - 1]) {
      throw ParamOutOfRange("eps schedule must be nonincreasing");
    }
  }
  if (config.eps_schedule.back() < 0.0) {
    throw ParamOutOfRange("eps schedule must end at a value >= 0");
  }
  if (config.grad_tolerance <= 0.0) throw ParamOutOfRange("grad_tolerance must be > 0");
  if (config.max_iterations < 1) throw ParamOutOfRange("max_iterations must be >= 1");
  const auto& a = config.armijo;
  if (a.initial_step <= 0.0 || a.shrink <= 0.0 || a.shrink >= 1.0 || a.slope <= 0.0 ||
      a.slope >= 1.0) {
    throw ParamOutOfRange("armijo parameters out of range");
  }
  if (config.ball) {
    detail::require_on_manifold(target, config.ball->center, "solver ball center");
    if (!(config.ball->radius > 0.0) ||
        config.ball->radius >= small_range_radius(target)) {
      throw ParamOutOfRange("ball radius must lie in (0, small_range_radius)");
    }
  }
}

// Componentwise linear Laplace solve with Dirichlet data, P1 stiffness.
Eigen::MatrixXd harmonic_extension_values(const DomainMesh& mesh,
                                          const BoundaryData& boundary, int k) {
  const int nv = mesh.num_vertices();
  const int ni = static_cast<int>(mesh.interior_vertices.size());
  std::vector<int> interior_index(nv, -1);
  for (int i = 0; i < ni; ++i) interior_index[mesh.interior_vertices[i]] = i;

  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(nv, k);
  for (const auto& [v, val] : boundary.values) values.row(v) = val.transpose();
  if (ni == 0) return values;

  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ni, k);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto& g = mesh.gradient_coefficients[t];
    for (int a = 0; a < 3; ++a) {
      if (interior_index[tri[a]] < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const double kab = mesh.triangle_areas[t] * g.row(a).dot(g.row(b));
        if (interior_index[tri[b]] >= 0) {
          triplets.emplace_back(interior_index[tri[a]], interior_index[tri[b]], kab);
        } else {
          rhs.row(interior_index[tri[a]]) -= kab * values.row(tri[b]);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> stiffness(ni, ni);
  stiffness.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(stiffness);
  if (ldlt.info() != Eigen::Success) throw Error("harmonic extension factorization failed");
  const Eigen::MatrixXd solution = ldlt.solve(rhs);
  for (int i = 0; i < ni; ++i) values.row(mesh.interior_vertices[i]) = solution.row(i);
  return values;
}

}  // namespace

void validate_boundary_data(const DomainMesh& mesh, const TargetManifold& target,
                            const BoundaryData& boundary,
                            const std::optional<GeodesicBall>& ball) {
  if (boundary.values.size() != mesh.boundary_vertices.size()) {
    throw InfeasibleBoundary("boundary data must cover exactly the boundary vertices");
  }
  for (const auto& [v, val] : boundary.values) {
    if (v < 0 || v >= mesh.num_vertices() || !mesh.boundary_flag[v]) {
      throw InfeasibleBoundary("boundary value at non-boundary vertex " +
                               std::to_string(v));
    }
    if (target.on_manifold_defect(val) > target.projection_tolerance) {
      throw InfeasibleBoundary("boundary value at vertex " + std::to_string(v) +
                               " is not on the target manifold");
    }
    if (ball && geodesic_distance(target, ball->center, val) > ball->radius + 1e-12) {
      throw InfeasibleBoundary("boundary value at vertex " + std::to_string(v) +
                               " lies outside the constraint ball");
    }
  }
}

ManifoldMap initialize_map(std::shared_ptr<const DomainMesh> mesh,
                           const TargetManifold& target, const BoundaryData& boundary,
                           const SolverConfig& config, const InitMode& mode) {
  validate_config(target, config);
  validate_boundary_data(*mesh, target, boundary, config.ball);
  const int k = target.ambient_dim;

  ManifoldMap map;
  map.mesh = mesh;
  map.target = target;

  auto clamp_to_ball = [&](const Vec& y) -> Vec {
    return config.ball ? project_to_geodesic_ball(target, *config.ball, y) : y;
  };

  switch (mode.kind) {
    case InitMode::Kind::Constant: {
      if (mode.constant_point.size() != k) {
        throw ParamOutOfRange("constant initialization point has wrong dimension");
      }
      const Vec p = clamp_to_ball(detail::project_robust(target, mode.constant_point));
      map.values = Eigen::MatrixXd::Zero(mesh->num_vertices(), k);
      for (int v : mesh->interior_vertices) map.values.row(v) = p.transpose();
      break;
    }
    case InitMode::Kind::HarmonicExtension: {
      map.values = harmonic_extension_values(*mesh, boundary, k);
      for (int v : mesh->interior_vertices) {
        map.values.row(v) =
            clamp_to_ball(detail::project_robust(target, map.values.row(v))).transpose();
      }
      break;
    }
    case InitMode::Kind::RandomInBall: {
      if (!config.ball) {
        throw ParamOutOfRange("random_in_ball initialization needs an active ball");
      }
      // Uniform in normal-coordinate radius: radius U[0, r), direction
      // uniform on the tangent unit sphere at the center.
      rng::Engine gen(config.seed);
      map.values = Eigen::MatrixXd::Zero(mesh->num_vertices(), k);
      for (int v : mesh->interior_vertices) {
        Vec dir;
        do {
          dir = tangent_project(target, config.ball->center, rng::gaussian(gen, k));
        } while (dir.norm() < 1e-9);
        dir.normalize();
        const double rho = config.ball->radius * rng::uniform01(gen);
        map.values.row(v) =
            sphere_exponential(target, config.ball->center, rho * dir).transpose();
      }
      break;
    }
  }
  for (const auto& [v, val] : boundary.values) map.values.row(v) = val.transpose();
  return map;
}

namespace {

struct RetractionOutcome {
  Eigen::MatrixXd values;
  int ball_projected = 0;
  bool feasible = false;  // false when a step left the tubular neighborhood
};

RetractionOutcome retract(const TargetManifold& target,
                          const std::optional<GeodesicBall>& ball,
                          const DomainMesh& mesh, const Eigen::MatrixXd& base,
                          const Eigen::MatrixXd& gradient, double step) {
  RetractionOutcome out;
  out.values = base;
  for (int v : mesh.interior_vertices) {
    const Vec moved = base.row(v).transpose() - step * gradient.row(v).transpose();
    Vec y;
    try {
      y = project_to_manifold(target, moved);
    } catch (const OutsideTubularNeighborhood&) {
      return out;  // step too large, caller shrinks
    }
    if (ball) {
      const Vec clipped = project_to_geodesic_ball(target, *ball, y);
      if ((clipped - y).norm() > 0.0) ++out.ball_projected;
      y = clipped;
    }
    out.values.row(v) = y.transpose();
  }
  out.feasible = true;
  return out;
}

}  // namespace

SolveResult solve(const TargetManifold& target, const BoundaryData& boundary,
                  const SolverConfig& config, const ManifoldMap& init,
                  const TraceSink& trace) {
  validate_config(target, config);
  const DomainMesh& mesh = *init.mesh;
  validate_boundary_data(mesh, target, boundary, config.ball);
  for (const auto& [v, val] : boundary.values) {
    if ((init.values.row(v).transpose() - val).norm() != 0.0) {
      throw InfeasibleBoundary("initial map does not match the boundary data");
    }
  }
  for (int v : mesh.interior_vertices) {
    if (target.on_manifold_defect(init.values.row(v)) >
        detail::on_manifold_threshold(target)) {
      throw PointNotOnManifold("initial map leaves the target manifold at vertex " +
                               std::to_string(v));
    }
  }

  SolveResult result;
  result.map = init;
  result.eps_final = config.eps_schedule.back();

  const int ni = static_cast<int>(mesh.interior_vertices.size());
  const double ni_scale = ni > 0 ? std::sqrt(static_cast<double>(ni)) : 1.0;
  double last_step = 0.0;
  bool final_stage_converged = ni == 0;

  for (double eps : config.eps_schedule) {
    double energy = p_energy(result.map, config.p, eps);
    bool stage_converged = ni == 0;
    // A stall ends the stage, not the schedule: the next eps changes the
    // landscape. The flag reports the state of the final stage.
    result.line_search_stalled = false;
    for (long iter = 0; iter < config.max_iterations && !stage_converged; ++iter) {
      const Eigen::MatrixXd gradient = energy_gradient(result.map, config.p, eps);
      const double grad_norm = gradient.norm() / ni_scale;
      if (trace) trace({result.iterations, eps, energy, grad_norm, last_step});
      if (grad_norm <= config.grad_tolerance) {
        stage_converged = true;
        break;
      }
      const double decrement = gradient.squaredNorm();
      double step = config.armijo.initial_step;
      bool accepted = false;
      while (step >= 1e-14) {
        RetractionOutcome trial =
            retract(target, config.ball, mesh, result.map.values, gradient, step);
        if (trial.feasible) {
          const ManifoldMap trial_map{init.mesh, target, std::move(trial.values)};
          const double trial_energy = p_energy(trial_map, config.p, eps);
          if (trial_energy <= energy - config.armijo.slope * step * decrement) {
            result.map.values = trial_map.values;
            result.constraint_active_count = trial.ball_projected;
            energy = trial_energy;
            accepted = true;
            break;
          }
        }
        step *= config.armijo.shrink;
      }
      if (!accepted) {
        result.line_search_stalled = true;
        break;
      }
      last_step = step;
      ++result.iterations;
    }
    final_stage_converged = stage_converged;
  }

  result.converged = final_stage_converged;
  result.report = energy_report(result.map, config.p, result.eps_final, config.ball);
  return result;
}

double sup_vertex_distance(const ManifoldMap& a, const ManifoldMap& b) {
  if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols()) {
    throw Error("sup_vertex_distance: maps have different shapes");
  }
  double worst = 0.0;
  for (Eigen::Index v = 0; v < a.values.rows(); ++v) {
    worst = std::max(worst, (a.values.row(v) - b.values.row(v)).norm());
  }
  return worst;
}

ExperimentReport uniqueness_experiment(std::shared_ptr<const DomainMesh> mesh,
                                       const TargetManifold& target,
                                       const BoundaryData& boundary,
                                       const SolverConfig& config, int trials,
                                       int threads, const TraceFactory& trace_factory) {
  if (trials < 2) throw ParamOutOfRange("uniqueness experiment needs trials >= 2");
  if (!config.ball) throw ParamOutOfRange("uniqueness experiment needs an active ball");
  validate_config(target, config);

  struct Job {
    std::string label;
    std::uint64_t seed;
    InitMode mode;
  };
  std::vector<Job> jobs;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t seed = config.seed + 1 + static_cast<std::uint64_t>(t);
    jobs.push_back({"random_in_ball", seed, InitMode::random_in_ball()});
  }
  jobs.push_back({"harmonic_extension", 0, InitMode::harmonic_extension()});

  auto run_job = [&](size_t index) -> TrialOutcome {
    const Job& job = jobs[index];
    SolverConfig trial_config = config;
    if (job.mode.kind == InitMode::Kind::RandomInBall) trial_config.seed = job.seed;
    const TraceSink trace =
        trace_factory ? trace_factory(static_cast<int>(index), job.label) : nullptr;
    const auto start = std::chrono::steady_clock::now();
    const ManifoldMap init =
        initialize_map(mesh, target, boundary, trial_config, job.mode);
    SolveResult result = solve(target, boundary, trial_config, init, trace);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return {job.label, job.seed, std::move(result), elapsed.count()};
  };

  ExperimentReport report;
  report.trials.resize(jobs.size());
  if (threads <= 1) {
    for (size_t i = 0; i < jobs.size(); ++i) report.trials[i] = run_job(i);
  } else {
    for (size_t base = 0; base < jobs.size(); base += static_cast<size_t>(threads)) {
      std::vector<std::future<TrialOutcome>> batch;
      const size_t end = std::min(jobs.size(), base + static_cast<size_t>(threads));
      for (size_t i = base; i < end; ++i) {
        batch.push_back(std::async(std::launch::async, run_job, i));
      }
      for (size_t i = base; i < end; ++i) report.trials[i] = batch[i - base].get();
    }
  }

  std::vector<const TrialOutcome*> converged;
  for (const auto& trial : report.trials) {
    if (trial.result.converged) converged.push_back(&trial);
  }
  report.converged_count = static_cast<int>(converged.size());
  double emin = std::numeric_limits<double>::infinity(), emax = 0.0;
  for (size_t i = 0; i < converged.size(); ++i) {
    emin = std::min(emin, converged[i]->result.report.p_energy);
    emax = std::max(emax, converged[i]->result.report.p_energy);
    for (size_t j = i + 1; j < converged.size(); ++j) {
      report.max_pairwise_sup_distance =
          std::max(report.max_pairwise_sup_distance,
                   sup_vertex_distance(converged[i]->result.map, converged[j]->result.map));
    }
  }
  report.energy_spread = converged.empty() ? 0.0 : emax - emin;
  return report;
}

}  // namespace pharmap
