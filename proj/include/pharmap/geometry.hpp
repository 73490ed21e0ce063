#pragma once

#include <Eigen/Core>

#include "pharmap/errors.hpp"

namespace pharmap {

using Vec = Eigen::VectorXd;

enum class ManifoldKind { Sphere, Ellipsoid, Torus };

/// An embedded compact target manifold N in R^k, together with the constants
/// the small-range theory consumes. All supported targets are smooth
/// hypersurfaces, so a single unit normal field drives the tangent projector
/// and the second fundamental form.
///
/// Construct through make_sphere / make_ellipsoid / make_torus; the factory
/// fills the geometric constants. Values are immutable and freely copyable.
struct TargetManifold {
  ManifoldKind kind = ManifoldKind::Sphere;
  int ambient_dim = 3;
  int intrinsic_dim = 2;

  /// Shape parameters. Sphere: (radius, 0, 0). Ellipsoid: semi-axes (a, b, c).
  /// Torus: (major radius, minor radius, 0).
  Eigen::Vector3d params = Eigen::Vector3d::Zero();

  /// Injectivity radius i_N. Exact for the sphere; a documented conservative
  /// lower bound for the ellipsoid and the torus.
  double injectivity_radius = 0.0;

  /// Upper bound K on the sectional curvature.
  double sectional_curvature_bound = 0.0;

  /// The curvature contribution to the small-range radius, stored already in
  /// length units as pi / (2 sqrt(K)) so the normalization is decided once.
  double curvature_term_length = 0.0;

  /// Acceptable on-manifold defect for projected points and boundary data.
  double projection_tolerance = 1e-10;

  /// Half width of the tubular neighborhood inside which the nearest-point
  /// projection is used. Conservative per-kind constants.
  double tubular_width() const;

  /// Approximate geometric distance from y to the manifold. Cheap closed
  /// forms per kind; used for validation, not for projection itself.
  double on_manifold_defect(const Vec& y) const;

  /// Outward unit normal at a point on (or very near) the manifold.
  Vec unit_normal(const Vec& y) const;
};

TargetManifold make_sphere(double radius, int ambient_dim = 3);
TargetManifold make_unit_sphere(int ambient_dim = 3);
TargetManifold make_ellipsoid(double a, double b, double c);
TargetManifold make_torus(double major_radius, double minor_radius);

/// Closed geodesic ball B(center, radius) on a target manifold. The center is
/// a point of N; the radius is a geodesic length.
struct GeodesicBall {
  Vec center;
  double radius = 0.0;
};

/// Nearest-point projection onto N. Closed form for sphere and torus; damped
/// Newton on the Lagrange condition for the ellipsoid. Throws
/// OutsideTubularNeighborhood when x is farther from N than tubular_width().
Vec project_to_manifold(const TargetManifold& m, const Vec& x);

/// Orthogonal projection of V onto the tangent space of N at y.
Vec tangent_project(const TargetManifold& m, const Vec& y, const Vec& V);

/// Second fundamental form A(y)(Y, Z): the normal-valued symmetric bilinear
/// form of the embedding, with the Gauss-formula orientation; on the unit
/// sphere A(y)(Y, Z) = -(Y . Z) y. Inputs must be tangent at y.
Vec second_fundamental_form(const TargetManifold& m, const Vec& y, const Vec& Y,
                            const Vec& Z);

/// Geodesic distance on N. Closed form on the sphere. For ellipsoid and torus
/// it is computed by geodesic shooting, valid only for pairs within a small
/// geodesically convex region; outside it throws DistanceNotComputable.
double geodesic_distance(const TargetManifold& m, const Vec& y, const Vec& z);

/// Small-range radius r_N = min(i_N, pi / (2 sqrt(K))).
double small_range_radius(const TargetManifold& m);

/// Projection of y in N onto the closed geodesic ball: y itself when inside,
/// otherwise the point at distance ball.radius on the minimizing geodesic
/// from the center toward y. Sphere targets only.
Vec project_to_geodesic_ball(const TargetManifold& m, const GeodesicBall& ball,
                             const Vec& y);

/// Exponential map on the sphere: the point at geodesic distance |v| from y
/// in the tangent direction v. Sphere targets only.
Vec sphere_exponential(const TargetManifold& m, const Vec& y, const Vec& v);

namespace detail {

/// Bilinear extension of the second fundamental form without the tangency
/// validation of the public operation. Used by the energy assembly, where the
/// discrete gradients are tangent-projected before the call.
Vec sff_bilinear(const TargetManifold& m, const Vec& y, const Vec& Y, const Vec& Z);

/// Nearest-point projection without the tubular-width guard. Used by map
/// initialization, where inputs may start far from N. A zero-direction input
/// on the sphere falls back to a deterministic axis point.
Vec project_robust(const TargetManifold& m, const Vec& x);

/// Validation helper: throws PointNotOnManifold when the defect of y exceeds
/// the manifold's acceptance threshold.
void require_on_manifold(const TargetManifold& m, const Vec& y, const char* op);

/// Acceptance threshold for "is this point on N" checks.
double on_manifold_threshold(const TargetManifold& m);

}  // namespace detail

}  // namespace pharmap
