#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "pharmap/errors.hpp"

namespace pharmap {

/// A triangulated flat 2-D source domain with the flat Euclidean metric.
/// Immutable after construction; the per-triangle gradient coefficient tables
/// make the piecewise-linear gradient a 3x2-times-values product.
struct DomainMesh {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise

  std::vector<char> boundary_flag;     // per vertex
  std::vector<int> boundary_vertices;  // sorted
  std::vector<int> interior_vertices;  // sorted

  std::vector<double> triangle_areas;
  /// Row i is the gradient of the hat function of corner i on that triangle,
  /// so grad(values) = coefficients^T * values.
  std::vector<Eigen::Matrix<double, 3, 2>> gradient_coefficients;

  std::vector<std::vector<int>> vertex_triangles;
  std::vector<std::vector<int>> vertex_neighbors;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  double total_area() const;
};

/// Diagonal-split n x n grid on the unit square: (n+1)^2 vertices, 2n^2
/// counterclockwise triangles.
DomainMesh build_unit_square_grid(int n_per_side);

/// Concentric-ring triangulation of the unit disk: a center vertex, ring j of
/// 6j vertices at radius j/refinement, fan plus ring stitching between rings.
DomainMesh build_unit_disk_mesh(int refinement);

/// Validates topology and builds the cached quantities. Throws Error for
/// degenerate triangles (area <= 1e-14), wrong orientation, or non-manifold
/// edges.
DomainMesh finalize_mesh(std::vector<Eigen::Vector2d> vertices,
                         std::vector<std::array<int, 3>> triangles);

/// Constant gradient of the affine interpolant of three vertex values.
Eigen::Vector2d triangle_gradient(const DomainMesh& mesh, int t,
                                  const Eigen::Vector3d& vertex_values);

/// Boundary vertices ordered counterclockwise along the (single) boundary
/// loop, starting at the smallest boundary vertex index.
std::vector<int> boundary_loop(const DomainMesh& mesh);

/// Normalized cumulative arc-length parameter in [0,1) for each loop vertex,
/// aligned with boundary_loop order.
std::vector<double> boundary_arc_parameter(const DomainMesh& mesh,
                                           const std::vector<int>& loop);

}  // namespace pharmap
