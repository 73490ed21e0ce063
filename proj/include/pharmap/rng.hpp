#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace pharmap::rng {

using Engine = std::mt19937_64;

/// Uniform draw in [0, 1) from the top 53 bits of the engine output.
/// Implemented directly (not via std::uniform_real_distribution) so streams
/// are identical across standard-library implementations.
inline double uniform01(Engine& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Standard normal draw via Box-Muller. Consumes exactly two engine outputs
/// per call; no state is cached between calls.
inline double normal(Engine& gen) {
  double u1 = uniform01(gen);
  double u2 = uniform01(gen);
  // Guard the log against an exact zero draw.
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Vector of independent standard normals.
inline Eigen::VectorXd gaussian(Engine& gen, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(gen);
  return v;
}

}  // namespace pharmap::rng
