#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pharmap {

/// Run configuration, parsed from a sectioned key-value text file (UTF-8,
/// '#' comment lines, `[section]` headers, `key = value` entries, vector
/// values space-separated). The canonical serialization writes every section
/// and key in a fixed order with 17-significant-digit numbers, so
/// parse -> serialize -> parse is the identity on the canonical form.

struct ManifoldConfig {
  std::string kind = "sphere";  // sphere | ellipsoid | torus
  double radius = 1.0;
  int ambient_dim = 3;
  std::vector<double> semi_axes{2.0, 1.0, 1.0};
  std::vector<double> radii{2.0, 1.0};  // major, minor
  double projection_tolerance = 1e-10;
};

struct MeshConfig {
  std::string builder = "disk";  // square | disk | file
  int n_per_side = 16;
  int refinement = 4;
  std::string path;
};

struct BoundaryConfig {
  std::string generator = "polar_cap";  // polar_cap | equator | custom
  double rho = 0.3;
  std::vector<double> center{0.0, 0.0, 1.0};
  std::string path;
};

struct SolverBlockConfig {
  bool has_p = false;
  double p = 0.0;  // required for every command that solves
  double ball_radius = 0.0;  // 0 disables the constraint
  bool ball_auto = false;    // "auto" = half the small-range radius
  std::vector<double> ball_center;  // empty: boundary center
  std::vector<double> eps_schedule{1e-1, 1e-2, 1e-3, 0.0};
  double grad_tolerance = 1e-8;
  int max_iterations = 50000;
  double armijo_step = 1.0;
  double armijo_shrink = 0.5;
  double armijo_slope = 1e-4;
  std::uint64_t seed = 1;
  int trials = 10;
  std::string init = "harmonic_extension";  // harmonic_extension | random_in_ball | constant
  std::vector<double> constant_point;
};

struct OracleBlockConfig {
  int samples = 100000;
  std::uint64_t seed_estimate = 101;
  std::uint64_t seed_validate = 202;
  std::vector<int> dims{1, 2, 3, 8};
  std::vector<double> q_values{0.0, 0.5, 1.0, 2.0, 6.0};
  int stability_fields = 100;
};

struct SweepBlockConfig {
  std::vector<double> p_values{2.0, 3.0, 4.0};
  std::vector<double> rho_values{0.15, 0.3, 0.45};
};

struct RunConfig {
  std::string command = "solve";  // solve | uniqueness | nonuniqueness-demo | oracles | sweep
  std::string outdir = "out";
  bool strict = false;
  int threads = 1;

  ManifoldConfig manifold;
  MeshConfig mesh;
  BoundaryConfig boundary;
  SolverBlockConfig solver;
  OracleBlockConfig oracles;
  SweepBlockConfig sweep;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

}  // namespace pharmap
