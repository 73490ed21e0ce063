#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "pharmap/config.hpp"
#include "pharmap/solver.hpp"

namespace pharmap {

/// Command-line overrides applied on top of the configuration file.
struct CliOverrides {
  std::optional<std::string> command;
  std::optional<std::string> outdir;
  std::optional<bool> strict;
  std::optional<int> threads;
};

/// Executes the configured command and writes all artifacts under the output
/// directory. Returns the process exit code: 0 on success, 2 on validation
/// errors, 3 on solver non-convergence in strict mode.
int run(const std::filesystem::path& config_path, const CliOverrides& overrides = {});

/// Same, from an already-parsed configuration.
int run_config(RunConfig config);

TargetManifold build_manifold(const ManifoldConfig& config);
std::shared_ptr<const DomainMesh> build_mesh(const MeshConfig& config);

/// Named Dirichlet data generators. polar_cap maps the boundary loop onto the
/// circle of geodesic radius rho about the center, at angle proportional to
/// the boundary arc-length parameter; equator is the quarter-turn case;
/// custom loads a map file restricted to the boundary vertices.
BoundaryData boundary_generator(const std::string& name, const BoundaryConfig& params,
                                const DomainMesh& mesh, const TargetManifold& target);

}  // namespace pharmap
