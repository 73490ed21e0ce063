#pragma once

#include <cstdint>
#include <vector>

#include "pharmap/energy.hpp"
#include "pharmap/rng.hpp"

namespace pharmap {

/// Two sides of an inequality, oriented so margin = rhs - lhs >= 0 means the
/// inequality holds, together with the inputs that produced the worst case.
struct InequalityMargin {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  std::vector<double> witness;

  /// max(|lhs|, |rhs|, 1): the scale against which rounding slack is judged.
  double scale() const;
};

/// Monotonicity of the p-Laplacian vector field:
///   (|X|^q X - |Y|^q Y) . (X - Y)  >=  (1/2)(|X|^q + |Y|^q) |X - Y|^2.
InequalityMargin check_monotonicity_inequality(const Vec& X, const Vec& Y, double q);

/// Lipschitz bound for Z -> |Z|^q Z:
///   | |X|^q X - |Y|^q Y |  <=  (q+1)(|X|^q + |Y|^q) |X - Y|.
InequalityMargin check_lipschitz_inequality(const Vec& X, const Vec& Y, double q);

/// Empirical constant for the second-fundamental-form difference bound:
/// the max over sampled (y, z, Y, Z), with unit tangent vectors, of
///   |A(y)(Y,Y) - A(z)(Z,Z)| / [ (|Y|^2+|Z|^2)|y-z| + (|Y|+|Z|)|Y-Z| ].
/// Deterministic per seed; coincident samples are redrawn.
double estimate_sff_constant(const TargetManifold& m, int samples, std::uint64_t seed);

/// Verifies the difference bound with constant 1.05 * C over fresh samples;
/// returns the worst margin. Pass C from estimate_sff_constant on a disjoint
/// seed, so the 5% headroom makes the estimate falsifiable rather than
/// self-validating.
InequalityMargin check_sff_inequality(const TargetManifold& m, double C, int samples,
                                      std::uint64_t seed);

/// Stability inequality for a small-range map u with Euclidean enclosing
/// radius r = ball.radius around ball.center:
///   integral |grad u|^p |phi|^2  <=  16 r^2 integral |grad u|^(p-2) |grad phi|^2,
/// with P1 quadrature and |phi|^2 taken at triangle barycenters. phi must
/// vanish on boundary vertices. Throws NotSmallRange when max |u - center|
/// exceeds r.
InequalityMargin stability_check(const ManifoldMap& u, const GeodesicBall& ball,
                                 double p, const Eigen::MatrixXd& phi);

/// Randomized variant: `trials` test fields, each a random interior bump
/// smoothed by one Jacobi averaging pass and normalized in W^{1,p}. Returns
/// the worst margin; all margins via the optional out parameter.
InequalityMargin stability_check_randomized(const ManifoldMap& u,
                                            const GeodesicBall& ball, double p,
                                            int trials, std::uint64_t seed,
                                            std::vector<InequalityMargin>* all = nullptr);

namespace detail {

/// Deterministic sample of a point on the manifold.
Vec sample_manifold_point(const TargetManifold& m, rng::Engine& gen);

/// Deterministic unit tangent vector at y.
Vec sample_unit_tangent(const TargetManifold& m, const Vec& y, rng::Engine& gen);

}  // namespace detail

}  // namespace pharmap
