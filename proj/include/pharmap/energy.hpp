#pragma once

#include <Eigen/Core>
#include <map>
#include <memory>
#include <optional>

#include "pharmap/geometry.hpp"
#include "pharmap/mesh.hpp"

namespace pharmap {

/// Dirichlet data: prescribed ambient values at boundary vertices. Every
/// value must lie on the target manifold, and inside the closed ball when a
/// ball constraint is active.
struct BoundaryData {
  std::map<int, Vec> values;
};

/// A discrete map from the mesh into the target manifold: one ambient point
/// per vertex, stored as rows of a (vertices x ambient_dim) matrix.
struct ManifoldMap {
  std::shared_ptr<const DomainMesh> mesh;
  TargetManifold target;
  Eigen::MatrixXd values;

  int ambient_dim() const { return static_cast<int>(values.cols()); }
};

/// Summary diagnostics of a map. riemannian_gradient_norm is the Frobenius
/// norm of the assembled Riemannian gradient divided by sqrt(interior vertex
/// count), matching the solver's convergence metric.
struct EnergyReport {
  double p_energy = 0.0;                  // unregularized
  double riemannian_gradient_norm = 0.0;  // at the eps it was computed with
  double el_residual_norm = 0.0;
  double max_triangle_gradient = 0.0;
  double range_radius = 0.0;  // max geodesic distance from the ball center
};

/// Discrete regularized p-energy
///   (1/p) sum_T area(T) (|grad u|_T^2 + eps^2)^(p/2).
/// With eps = 0 this is the exact p-energy of the piecewise-linear map.
double p_energy(const ManifoldMap& u, double p, double eps);

/// Riemannian gradient of the regularized energy: the Euclidean gradient with
/// respect to vertex positions, tangent-projected at each vertex, zero rows
/// on boundary vertices.
Eigen::MatrixXd energy_gradient(const ManifoldMap& u, double p, double eps);

/// Weak-form defect of the Euler-Lagrange system against one test field phi
/// (rows per vertex, zero on the boundary):
///   integral |grad u|^(p-2) grad u . grad phi  -  curvature term . phi,
/// assembled per triangle with the curvature contraction evaluated at the
/// projected barycenter. Zero for exact p-harmonic maps, any phi.
double el_residual(const ManifoldMap& u, double p, const Eigen::MatrixXd& phi);

/// Residual norm: max of |el_residual| over the canonical family of
/// interior-vertex hat fields in tangent directions, each normalized by its
/// discrete W^{1,p} norm.
double el_residual_norm(const ManifoldMap& u, double p);

/// Discrete W^{1,p} norm of a vertex field (barycenter values for the
/// zero-order part), used to normalize test fields.
double w1p_norm(const DomainMesh& mesh, const Eigen::MatrixXd& field, double p);

/// Full diagnostics at the given exponent; gradient norm evaluated at eps.
EnergyReport energy_report(const ManifoldMap& u, double p, double eps,
                           const std::optional<GeodesicBall>& ball);

namespace detail {

/// 2 x k Jacobian of the piecewise-linear map on triangle t.
Eigen::MatrixXd triangle_jacobian(const DomainMesh& mesh, const Eigen::MatrixXd& values,
                                  int t);

}  // namespace detail

}  // namespace pharmap
