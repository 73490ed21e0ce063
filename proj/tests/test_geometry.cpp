#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pharmap/geometry.hpp"
#include "pharmap/oracles.hpp"
#include "pharmap/rng.hpp"

using namespace pharmap;

namespace {

constexpr double kPi = std::numbers::pi;

Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

// Second-order finite difference of t -> project(y + tY); its normal
// component is the second fundamental form of the curve's velocity. On the
// sphere the curve's acceleration is purely normal, so the raw difference is
// the oracle there.
Vec sff_fd_raw(const TargetManifold& m, const Vec& y, const Vec& Y, double h) {
  return (project_to_manifold(m, y + h * Y) - 2.0 * y + project_to_manifold(m, y - h * Y)) /
         (h * h);
}

Vec sff_fd_normal(const TargetManifold& m, const Vec& y, const Vec& Y, double h) {
  const Vec raw = sff_fd_raw(m, y, Y, h);
  const Vec n = m.unit_normal(y);
  return raw.dot(n) * n;
}

// Brute-force nearest point on the ellipsoid over a dense parameter grid.
Vec ellipsoid_brute_force_nearest(const TargetManifold& m, const Vec& x, int nu, int nv) {
  Vec best = v3(m.params[0], 0, 0);
  double best_d2 = (best - x).squaredNorm();
  for (int i = 0; i < nu; ++i) {
    const double theta = 2.0 * kPi * i / nu;
    for (int j = 0; j <= nv; ++j) {
      const double phi = kPi * j / nv;
      const Vec p = v3(m.params[0] * std::sin(phi) * std::cos(theta),
                       m.params[1] * std::sin(phi) * std::sin(theta),
                       m.params[2] * std::cos(phi));
      const double d2 = (p - x).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = p;
      }
    }
  }
  return best;
}

}  // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("sphere constants") {
  const TargetManifold unit = make_unit_sphere();
  CHECK(unit.intrinsic_dim == 2);
  CHECK(small_range_radius(unit) == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(unit.injectivity_radius == doctest::Approx(kPi).epsilon(1e-15));

  const TargetManifold big = make_sphere(2.0);
  CHECK(small_range_radius(big) == doctest::Approx(kPi).epsilon(1e-15));

  // Pinched torus: the injectivity term is the smaller one.
  const TargetManifold pinched = make_torus(1.2, 1.0);
  CHECK(small_range_radius(pinched) == doctest::Approx(pinched.injectivity_radius));
  CHECK(pinched.injectivity_radius < pinched.curvature_term_length);
}

TEST_CASE("sphere projection") {
  const TargetManifold m = make_unit_sphere();
  CHECK((project_to_manifold(m, v3(2, 0, 0)) - v3(1, 0, 0)).norm() == 0.0);

  const Vec on = v3(0, 0.6, 0.8);
  CHECK((project_to_manifold(m, on) - on).norm() <= 1e-15);

  // Inward of the reach guard the projection refuses.
  CHECK_THROWS_AS(project_to_manifold(m, v3(0.1, 0, 0)), OutsideTubularNeighborhood);
}

TEST_CASE("ellipsoid projection against brute force") {
  const TargetManifold m = make_ellipsoid(2, 1, 1);
  CHECK((project_to_manifold(m, v3(3, 0, 0)) - v3(2, 0, 0)).norm() <= 1e-10);

  rng::Engine gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec y = detail::sample_manifold_point(m, gen);
    const double offset = (rng::uniform01(gen) - 0.5) * 0.8 * m.tubular_width();
    const Vec x = y + offset * m.unit_normal(y);
    const Vec projected = project_to_manifold(m, x);
    CHECK(m.on_manifold_defect(projected) <= m.projection_tolerance);
    const Vec brute = ellipsoid_brute_force_nearest(m, x, 720, 360);
    // The brute-force grid is coarse; the projected point must not lose to it.
    CHECK((x - projected).norm() <= (x - brute).norm() + 1e-9);
    CHECK((projected - brute).norm() <= 2e-2);
  }
}

TEST_CASE("torus projection") {
  const TargetManifold m = make_torus(2, 1);
  // Outer equator point, displaced radially.
  CHECK((project_to_manifold(m, v3(3.3, 0, 0)) - v3(3, 0, 0)).norm() <= 1e-12);
  // Top of the tube.
  CHECK((project_to_manifold(m, v3(2, 0, 1.4)) - v3(2, 0, 1)).norm() <= 1e-12);
  // On the symmetry axis and near the spine the projection refuses.
  CHECK_THROWS_AS(project_to_manifold(m, v3(0, 0, 0.2)), OutsideTubularNeighborhood);
  CHECK_THROWS_AS(project_to_manifold(m, v3(2.1, 0, 0)), OutsideTubularNeighborhood);
}

TEST_CASE("projection idempotence on all targets") {
  const std::vector<TargetManifold> targets = {make_unit_sphere(), make_ellipsoid(2, 1, 1),
                                               make_torus(2, 1)};
  rng::Engine gen(11);
  for (const auto& m : targets) {
    for (int trial = 0; trial < 10000; ++trial) {
      const Vec y = detail::sample_manifold_point(m, gen);
      const double offset = (rng::uniform01(gen) - 0.5) * 0.9 * m.tubular_width();
      const Vec x = y + offset * m.unit_normal(y);
      const Vec once = project_to_manifold(m, x);
      const Vec twice = project_to_manifold(m, once);
      REQUIRE((twice - once).norm() <= 2.0 * m.projection_tolerance);
    }
  }
}

TEST_CASE("tangent projection") {
  const TargetManifold m = make_unit_sphere();
  CHECK((tangent_project(m, v3(0, 0, 1), v3(1, 0, 3)) - v3(1, 0, 0)).norm() <= 1e-15);

  // Idempotence: a tangent vector is unchanged.
  const Vec t = tangent_project(m, v3(0, 0, 1), v3(0.3, -0.4, 0.9));
  CHECK((tangent_project(m, v3(0, 0, 1), t) - t).norm() <= 1e-15);

  CHECK_THROWS_AS(tangent_project(m, v3(0, 0, 2), v3(1, 0, 0)), PointNotOnManifold);
}

TEST_CASE("torus normal from a finite-difference parameterization") {
  const TargetManifold m = make_torus(2, 1);
  const Vec y = v3(3, 0, 0);  // outer equator
  auto param = [&](double theta, double phi) {
    return v3((2 + std::cos(phi)) * std::cos(theta), (2 + std::cos(phi)) * std::sin(theta),
              std::sin(phi));
  };
  const double d = 1e-6;
  const Vec t_theta = (param(d, 0) - param(-d, 0)) / (2 * d);
  const Vec t_phi = (param(0, d) - param(0, -d)) / (2 * d);
  Vec normal(3);
  normal << t_theta[1] * t_phi[2] - t_theta[2] * t_phi[1],
      t_theta[2] * t_phi[0] - t_theta[0] * t_phi[2],
      t_theta[0] * t_phi[1] - t_theta[1] * t_phi[0];
  normal.normalize();
  CHECK(tangent_project(m, y, normal).norm() <= 1e-8);
}

TEST_CASE("second fundamental form on the unit sphere") {
  const TargetManifold m = make_unit_sphere();
  const Vec y = v3(0, 0, 1);
  const Vec e1 = v3(1, 0, 0), e2 = v3(0, 1, 0);

  CHECK((second_fundamental_form(m, y, e1, e1) - v3(0, 0, -1)).norm() <= 1e-14);
  CHECK(second_fundamental_form(m, y, Vec::Zero(3), e1).norm() == 0.0);
  CHECK(second_fundamental_form(m, y, e1, e2).norm() <= 1e-14);

  // Against the finite-difference oracle, including the polarized cross term.
  const Vec fd_11 = sff_fd_raw(m, y, e1, 1e-4);
  CHECK((second_fundamental_form(m, y, e1, e1) - fd_11).norm() <= 1e-6);
  const Vec fd_plus = sff_fd_raw(m, y, (e1 + e2).eval(), 1e-4);
  const Vec fd_minus = sff_fd_raw(m, y, (e1 - e2).eval(), 1e-4);
  const Vec fd_cross = (fd_plus - fd_minus) / 4.0;
  CHECK((second_fundamental_form(m, y, e1, e2) - fd_cross).norm() <= 1e-6);

  CHECK_THROWS_AS(second_fundamental_form(m, y, v3(0, 0, 1), e1), NonTangentInput);
}

TEST_CASE("second fundamental form symmetry, bilinearity, normality") {
  const std::vector<TargetManifold> targets = {make_unit_sphere(), make_ellipsoid(2, 1, 1),
                                               make_torus(2, 1)};
  rng::Engine gen(23);
  for (const auto& m : targets) {
    for (int trial = 0; trial < 200; ++trial) {
      const Vec y = detail::sample_manifold_point(m, gen);
      const Vec Y = detail::sample_unit_tangent(m, y, gen);
      const Vec Z = detail::sample_unit_tangent(m, y, gen);
      const Vec a_yz = second_fundamental_form(m, y, Y, Z);
      const Vec a_zy = second_fundamental_form(m, y, Z, Y);
      const double scale = std::max(1.0, a_yz.norm());
      REQUIRE((a_yz - a_zy).norm() / scale <= 1e-10);
      const Vec a_scaled = second_fundamental_form(m, y, (2.5 * Y).eval(), Z);
      REQUIRE((a_scaled - 2.5 * a_yz).norm() / scale <= 1e-10);
      REQUIRE(tangent_project(m, y, a_yz).norm() <= 1e-8);
    }
  }
}

TEST_CASE("second fundamental form matches finite differences with order >= 1.8") {
  const TargetManifold m = make_unit_sphere();
  rng::Engine gen(31);
  double err_coarse = 0.0, err_fine = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Vec y = detail::sample_manifold_point(m, gen);
    const Vec Y = detail::sample_unit_tangent(m, y, gen);
    const Vec closed = second_fundamental_form(m, y, Y, Y);
    err_coarse = std::max(err_coarse, (closed - sff_fd_raw(m, y, Y, 1e-2)).norm());
    err_fine = std::max(err_fine, (closed - sff_fd_raw(m, y, Y, 1e-3)).norm());
  }
  const double order = std::log10(err_coarse / err_fine);
  CHECK(order >= 1.8);
}

TEST_CASE("second fundamental form on ellipsoid and torus against normal-part FD") {
  const std::vector<TargetManifold> targets = {make_ellipsoid(2, 1, 1), make_torus(2, 1)};
  rng::Engine gen(37);
  for (const auto& m : targets) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vec y = detail::sample_manifold_point(m, gen);
      const Vec Y = detail::sample_unit_tangent(m, y, gen);
      const Vec closed = second_fundamental_form(m, y, Y, Y);
      const Vec fd = sff_fd_normal(m, y, Y, 1e-4);
      REQUIRE((closed - fd).norm() <= 1e-5 * std::max(1.0, closed.norm()));
    }
  }
}

TEST_CASE("geodesic distance on the sphere") {
  const TargetManifold m = make_unit_sphere();
  CHECK(geodesic_distance(m, v3(1, 0, 0), v3(0, 1, 0)) ==
        doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(geodesic_distance(m, v3(0, 0.6, 0.8), v3(0, 0.6, 0.8)) == 0.0);
  CHECK(geodesic_distance(m, v3(0, 0, 1), v3(0, 0, -1)) ==
        doctest::Approx(kPi).epsilon(1e-14));
}

TEST_CASE("sphere triangle inequality") {
  const TargetManifold m = make_unit_sphere();
  rng::Engine gen(41);
  for (int trial = 0; trial < 10000; ++trial) {
    const Vec a = detail::sample_manifold_point(m, gen);
    const Vec b = detail::sample_manifold_point(m, gen);
    const Vec c = detail::sample_manifold_point(m, gen);
    REQUIRE(geodesic_distance(m, a, c) <=
            geodesic_distance(m, a, b) + geodesic_distance(m, b, c) + 1e-10);
  }
}

TEST_CASE("geodesic distance by shooting on torus meridians") {
  const TargetManifold m = make_torus(2, 1);
  // Points on a common meridian circle (a geodesic of the torus): the
  // distance is the minor radius times the angle difference.
  auto meridian = [&](double phi) { return v3(2 + std::cos(phi), 0, std::sin(phi)); };
  for (double dphi : {0.05, 0.15, 0.3}) {
    const double d = geodesic_distance(m, meridian(0.2), meridian(0.2 + dphi));
    CHECK(d == doctest::Approx(dphi).epsilon(1e-5));
  }
  // Symmetry.
  const double ab = geodesic_distance(m, meridian(0.1), meridian(0.4));
  const double ba = geodesic_distance(m, meridian(0.4), meridian(0.1));
  CHECK(ab == doctest::Approx(ba).epsilon(1e-6));
  // Far pairs are refused.
  CHECK_THROWS_AS(geodesic_distance(m, v3(3, 0, 0), v3(-3, 0, 0)), DistanceNotComputable);
}

TEST_CASE("geodesic distance by shooting on the ellipsoid equator") {
  const TargetManifold m = make_ellipsoid(2, 1, 1);
  // The z = 0 ellipse is a geodesic (fixed-point set of a reflection); its
  // arc length between nearby points is a quadrature oracle.
  auto equator = [&](double t) { return v3(2 * std::cos(t), std::sin(t), 0); };
  const double t0 = 0.3, t1 = 0.5;
  double arc = 0.0;
  const int steps = 20000;
  for (int i = 0; i < steps; ++i) {
    const double ta = t0 + (t1 - t0) * i / steps;
    const double tb = t0 + (t1 - t0) * (i + 1) / steps;
    arc += (equator(tb) - equator(ta)).norm();
  }
  const double d = geodesic_distance(m, equator(t0), equator(t1));
  CHECK(d == doctest::Approx(arc).epsilon(1e-4));
}

TEST_CASE("geodesic ball projection") {
  const TargetManifold m = make_unit_sphere();
  GeodesicBall ball{v3(0, 0, 1), kPi / 4};

  const Vec inside = v3(0, std::sin(0.2), std::cos(0.2));
  CHECK((project_to_geodesic_ball(m, ball, inside) - inside).norm() == 0.0);

  const Vec projected = project_to_geodesic_ball(m, ball, v3(1, 0, 0));
  CHECK((projected - v3(std::sqrt(2) / 2, 0, std::sqrt(2) / 2)).norm() <= 1e-12);
  CHECK(geodesic_distance(m, ball.center, projected) ==
        doctest::Approx(ball.radius).epsilon(1e-12));

  // A point at exactly the radius is a fixed point.
  const Vec rim = v3(std::sin(kPi / 4), 0, std::cos(kPi / 4));
  CHECK((project_to_geodesic_ball(m, ball, rim) - rim).norm() == 0.0);

  const TargetManifold torus = make_torus(2, 1);
  GeodesicBall tball{v3(3, 0, 0), 0.3};
  CHECK_THROWS_AS(project_to_geodesic_ball(torus, tball, v3(2, 0, 1)), UnsupportedTarget);
}

TEST_CASE("spheres in higher ambient dimension") {
  const TargetManifold m = make_unit_sphere(4);
  CHECK(m.intrinsic_dim == 3);
  Vec a = Vec::Zero(4), b = Vec::Zero(4);
  a[0] = 1.0;
  b[2] = 1.0;
  CHECK(geodesic_distance(m, a, b) == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK((project_to_manifold(m, (2.0 * a).eval()) - a).norm() == 0.0);
  Vec t = Vec::Zero(4);
  t[1] = 1.0;
  CHECK((second_fundamental_form(m, a, t, t) + a).norm() <= 1e-14);

  rng::Engine gen(53);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec y = detail::sample_manifold_point(m, gen);
    const Vec Y = detail::sample_unit_tangent(m, y, gen);
    REQUIRE(std::abs(Y.dot(y)) <= 1e-12);
  }
}

TEST_CASE("sphere exponential map") {
  const TargetManifold m = make_unit_sphere();
  const Vec y = v3(0, 0, 1);
  const Vec step = sphere_exponential(m, y, v3(kPi / 2, 0, 0));
  CHECK((step - v3(1, 0, 0)).norm() <= 1e-14);
  CHECK((sphere_exponential(m, y, Vec::Zero(3)) - y).norm() == 0.0);
  // Geodesic distance equals the tangent length.
  const Vec z = sphere_exponential(m, y, v3(0.2, 0.3, 0));
  CHECK(geodesic_distance(m, y, z) == doctest::Approx(std::hypot(0.2, 0.3)).epsilon(1e-12));
}

TEST_SUITE_END();
