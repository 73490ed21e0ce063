#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pharmap/energy.hpp"

namespace pharmap {

struct ArmijoParams {
  double initial_step = 1.0;
  double shrink = 0.5;
  double slope = 1e-4;
};

/// Parameters of one minimization run. The eps schedule is the regularization
/// continuation; it must be nonincreasing and end at a value >= 0 (usually 0).
struct SolverConfig {
  double p = 2.0;
  std::optional<GeodesicBall> ball;
  std::vector<double> eps_schedule{1e-1, 1e-2, 1e-3, 0.0};
  double grad_tolerance = 1e-8;
  int max_iterations = 50000;  // per eps stage
  ArmijoParams armijo;
  std::uint64_t seed = 1;
};

struct InitMode {
  enum class Kind { HarmonicExtension, RandomInBall, Constant };
  Kind kind = Kind::HarmonicExtension;
  Vec constant_point;

  static InitMode harmonic_extension() { return {Kind::HarmonicExtension, {}}; }
  static InitMode random_in_ball() { return {Kind::RandomInBall, {}}; }
  static InitMode constant(Vec p) { return {Kind::Constant, std::move(p)}; }
};

struct SolveResult {
  ManifoldMap map;
  EnergyReport report;
  long iterations = 0;  // accepted descent steps, all stages
  bool converged = false;
  double eps_final = 0.0;
  int constraint_active_count = 0;  // vertices ball-projected on the final step
  bool line_search_stalled = false;
};

struct TraceRow {
  long iteration;
  double eps;
  double energy;  // regularized, at the row's eps
  double grad_norm;
  double step;  // last accepted step size, 0 before the first step
};
using TraceSink = std::function<void(const TraceRow&)>;

/// Feasible starting map: boundary values copied exactly, interior values on
/// the manifold and inside the closed ball when one is active.
ManifoldMap initialize_map(std::shared_ptr<const DomainMesh> mesh,
                           const TargetManifold& target, const BoundaryData& boundary,
                           const SolverConfig& config, const InitMode& mode);

/// Projected gradient descent with nearest-point retraction and Armijo
/// backtracking, run through the eps continuation schedule. Returns the first
/// iterate of the final stage meeting grad_tolerance, or the last iterate
/// with converged = false. A stalled line search is reported, not fatal.
SolveResult solve(const TargetManifold& target, const BoundaryData& boundary,
                  const SolverConfig& config, const ManifoldMap& init,
                  const TraceSink& trace = nullptr);

struct TrialOutcome {
  std::string init_label;
  std::uint64_t seed = 0;
  SolveResult result;
  double wall_seconds = 0.0;
};

struct ExperimentReport {
  std::vector<TrialOutcome> trials;
  double max_pairwise_sup_distance = 0.0;  // over converged trials
  double energy_spread = 0.0;              // over converged trials
  int converged_count = 0;
};

/// Makes a per-iteration trace sink for trial `index`; may return nullptr.
using TraceFactory = std::function<TraceSink(int index, const std::string& label)>;

/// Runs `trials` random-in-ball initializations (seeds config.seed + 1 + t)
/// plus one harmonic extension, solves each, and reports the maximum pairwise
/// sup distance and the energy spread over the converged runs. Trials are
/// independent; `threads` > 1 runs them concurrently with identical results.
ExperimentReport uniqueness_experiment(std::shared_ptr<const DomainMesh> mesh,
                                       const TargetManifold& target,
                                       const BoundaryData& boundary,
                                       const SolverConfig& config, int trials,
                                       int threads = 1,
                                       const TraceFactory& trace_factory = nullptr);

/// Max over vertices of the ambient Euclidean distance between two maps on
/// the same mesh.
double sup_vertex_distance(const ManifoldMap& a, const ManifoldMap& b);

/// Validates boundary data against mesh, manifold, and optional ball.
void validate_boundary_data(const DomainMesh& mesh, const TargetManifold& target,
                            const BoundaryData& boundary,
                            const std::optional<GeodesicBall>& ball);

}  // namespace pharmap
