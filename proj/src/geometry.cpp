#include "pharmap/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pharmap {

namespace {

constexpr double kPi = std::numbers::pi;

double clamp_unit(double x) { return std::min(1.0, std::max(-1.0, x)); }

std::string describe(const Vec& v) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

// Level-set data F(x) = 0 describing each hypersurface, with gradient and
// Hessian. The sphere uses F = (|x|^2 - R^2)/2 so the Hessian is the identity.

Vec level_gradient(const TargetManifold& m, const Vec& y) {
  switch (m.kind) {
    case ManifoldKind::Sphere:
      return y;
    case ManifoldKind::Ellipsoid: {
      Vec g(3);
      for (int i = 0; i < 3; ++i) g[i] = y[i] / (m.params[i] * m.params[i]);
      return g;
    }
    case ManifoldKind::Torus: {
      const double rho = std::hypot(y[0], y[1]);
      const double major = m.params[0];
      Vec g(3);
      if (rho < 1e-300) {
        g.setZero();
        g[2] = y[2];
        return g;
      }
      const double f = 1.0 - major / rho;
      g[0] = f * y[0];
      g[1] = f * y[1];
      g[2] = y[2];
      return g;
    }
  }
  throw Error("unknown manifold kind");
}

Eigen::MatrixXd level_hessian(const TargetManifold& m, const Vec& y) {
  const int k = m.ambient_dim;
  switch (m.kind) {
    case ManifoldKind::Sphere:
      return Eigen::MatrixXd::Identity(k, k);
    case ManifoldKind::Ellipsoid: {
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
      for (int i = 0; i < 3; ++i) h(i, i) = 1.0 / (m.params[i] * m.params[i]);
      return h;
    }
    case ManifoldKind::Torus: {
      const double rho = std::hypot(y[0], y[1]);
      const double major = m.params[0];
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
      const double rho3 = rho * rho * rho;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          h(i, j) = (i == j ? 1.0 - major / rho : 0.0) + major * y[i] * y[j] / rho3;
        }
      }
      h(2, 2) = 1.0;
      return h;
    }
  }
  throw Error("unknown manifold kind");
}

double min_semi_axis(const TargetManifold& m) {
  return std::min({m.params[0], m.params[1], m.params[2]});
}

// Nearest point on the ellipsoid via the Lagrange condition
// y_i = x_i a_i^2 / (a_i^2 + t). The residual
//   g(t) = (1/2) (sum_i x_i^2 a_i^2 / (a_i^2 + t)^2 - 1)
// is strictly decreasing on t > -min a_i^2, so safeguarded Newton finds the
// unique root on that branch, which is the nearest point whenever x is within
// the reach of the surface. Returns false when no root exists on the branch
// (x on a symmetry axis beyond the focal set).
bool ellipsoid_lagrange_solve(const TargetManifold& m, const Vec& x, Vec& out) {
  const Eigen::Vector3d a2 = m.params.array().square();
  const double tmin = -a2.minCoeff();

  auto residual = [&](double t, double& g, double& dg) {
    g = -0.5;
    dg = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double d = a2[i] + t;
      const double w = x[i] * x[i] * a2[i];
      g += 0.5 * w / (d * d);
      dg -= w / (d * d * d);
    }
  };

  // Bracket: g -> +inf as t -> tmin+ (when the corresponding x component is
  // nonzero) and g -> -1/2 as t -> +inf.
  double lo = tmin;
  double hi = std::max(1.0, x.norm()) * std::max(1.0, m.params.maxCoeff());
  double g, dg;
  residual(hi, g, dg);
  int guard = 0;
  while (g > 0.0 && guard++ < 60) {
    hi *= 2.0;
    residual(hi, g, dg);
  }
  if (g > 0.0) return false;

  double glo_probe, dglo;
  residual(tmin + 1e-9 * (hi - tmin), glo_probe, dglo);
  if (glo_probe < 0.0) return false;  // no sign change on the branch

  double t = 0.0;
  if (t <= lo || t >= hi) t = 0.5 * (lo + hi);
  for (int it = 0; it < 80; ++it) {
    residual(t, g, dg);
    if (std::abs(g) < 1e-15) break;
    if (g > 0.0) lo = t; else hi = t;
    double step = (dg != 0.0) ? -g / dg : 0.0;
    double next = t + step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }

  out.resize(3);
  for (int i = 0; i < 3; ++i) out[i] = x[i] * a2[i] / (a2[i] + t);
  return true;
}

// Dense parameter-grid fallback for the robust ellipsoid projection; only
// reachable for inputs far outside the tubular neighborhood.
Vec ellipsoid_grid_nearest(const TargetManifold& m, const Vec& x) {
  Vec best(3);
  double best_d2 = std::numeric_limits<double>::infinity();
  const int nu = 96, nv = 48;
  for (int i = 0; i < nu; ++i) {
    const double theta = 2.0 * kPi * (i + 0.5) / nu;
    for (int j = 0; j < nv; ++j) {
      const double phi = kPi * (j + 0.5) / nv;
      Vec p(3);
      p[0] = m.params[0] * std::sin(phi) * std::cos(theta);
      p[1] = m.params[1] * std::sin(phi) * std::sin(theta);
      p[2] = m.params[2] * std::cos(phi);
      const double d2 = (p - x).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = p;
      }
    }
  }
  return best;
}

Vec torus_project_core(const TargetManifold& m, const Vec& x, bool robust,
                       bool& ok, double& dist) {
  const double major = m.params[0], minor = m.params[1];
  const double rho = std::hypot(x[0], x[1]);
  Vec spine(3);
  if (rho < 1e-300) {
    if (!robust) {
      ok = false;
      return x;
    }
    spine << major, 0.0, 0.0;
  } else {
    spine << major * x[0] / rho, major * x[1] / rho, 0.0;
  }
  Vec d = x - spine;
  double dd = d.norm();
  if (dd < 1e-300) {
    if (!robust) {
      ok = false;
      return x;
    }
    d.setZero();
    d[2] = 1.0;
    dd = 1.0;
  }
  dist = std::abs(dd - minor);
  ok = true;
  return spine + (minor / dd) * d;
}

// Orthonormal basis of the tangent space at y, deterministic: Gram-Schmidt of
// the ambient axes against the unit normal, skipping near-parallel axes.
Eigen::MatrixXd tangent_basis(const TargetManifold& m, const Vec& y) {
  const int k = m.ambient_dim;
  const Vec n = m.unit_normal(y);
  Eigen::MatrixXd basis(k, k - 1);
  int col = 0;
  for (int axis = 0; axis < k && col < k - 1; ++axis) {
    Vec v = Vec::Zero(k);
    v[axis] = 1.0;
    v -= v.dot(n) * n;
    for (int c = 0; c < col; ++c) v -= v.dot(basis.col(c)) * basis.col(c);
    const double len = v.norm();
    if (len > 1e-7) basis.col(col++) = v / len;
  }
  if (col != k - 1) throw Error("tangent basis construction failed");
  return basis;
}

struct GeodesicState {
  Vec pos;
  Vec vel;
};

// Unit-speed geodesic: acceleration is the second fundamental form of the
// velocity with itself. One RK4 step followed by projection back to the
// manifold and renormalization of the speed.
GeodesicState geodesic_step(const TargetManifold& m, const GeodesicState& s, double h) {
  auto acc = [&](const Vec& p, const Vec& v) {
    return detail::sff_bilinear(m, p, v, v);
  };
  const Vec k1p = s.vel, k1v = acc(s.pos, s.vel);
  const Vec k2p = s.vel + 0.5 * h * k1v, k2v = acc(s.pos + 0.5 * h * k1p, k2p);
  const Vec k3p = s.vel + 0.5 * h * k2v, k3v = acc(s.pos + 0.5 * h * k2p, k3p);
  const Vec k4p = s.vel + h * k3v, k4v = acc(s.pos + h * k3p, k4p);
  GeodesicState out;
  out.pos = s.pos + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  out.vel = s.vel + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  out.pos = detail::project_robust(m, out.pos);
  out.vel = tangent_project(m, out.pos, out.vel);
  const double speed = out.vel.norm();
  if (speed < 1e-300) throw DistanceNotComputable("geodesic integration degenerated");
  out.vel /= speed;
  return out;
}

Vec geodesic_endpoint(const TargetManifold& m, const Vec& y, const Vec& dir,
                      double length, double max_step, Vec* end_vel) {
  GeodesicState s{y, dir};
  if (length <= 0.0) {
    if (end_vel) *end_vel = dir;
    return y;
  }
  const int n = std::max(16, static_cast<int>(std::ceil(length / max_step)));
  const double h = length / n;
  for (int i = 0; i < n; ++i) s = geodesic_step(m, s, h);
  if (end_vel) *end_vel = s.vel;
  return s.pos;
}

// Two-parameter shooting: find (angle, arc length) so the geodesic from y
// hits z. Valid only inside a small convex region; Gauss-Newton with a
// finite-difference column for the angle.
double shoot_geodesic_distance(const TargetManifold& m, const Vec& y, const Vec& z) {
  const double feature =
      (m.kind == ManifoldKind::Torus) ? m.params[1] : min_semi_axis(m);
  const double chord = (y - z).norm();
  if (chord < 1e-14) return 0.0;
  if (chord > 0.5 * feature) {
    throw DistanceNotComputable(
        "points are outside the supported geodesically convex region");
  }

  const Eigen::MatrixXd basis = tangent_basis(m, y);
  const Vec w = tangent_project(m, y, z - y);
  if (w.norm() < 1e-14) {
    throw DistanceNotComputable("chord is normal to the surface at the base point");
  }
  double theta = std::atan2(w.dot(basis.col(1)), w.dot(basis.col(0)));
  double s = chord;
  const double max_step = feature / 100.0;

  auto dir_of = [&](double th) -> Vec {
    return std::cos(th) * basis.col(0) + std::sin(th) * basis.col(1);
  };

  Vec end_vel;
  Vec r = geodesic_endpoint(m, y, dir_of(theta), s, max_step, &end_vel) - z;
  for (int it = 0; it < 60; ++it) {
    if (r.norm() <= 1e-8) return s;
    const double dth = 1e-6;
    Vec r_th = geodesic_endpoint(m, y, dir_of(theta + dth), s, max_step, nullptr) - z;
    Eigen::MatrixXd J(m.ambient_dim, 2);
    J.col(0) = (r_th - r) / dth;
    J.col(1) = end_vel;
    Eigen::Vector2d step = J.colPivHouseholderQr().solve(-r);

    double scale = 1.0;
    bool improved = false;
    for (int half = 0; half < 25; ++half) {
      const double th_try = theta + scale * step[0];
      const double s_try = std::max(0.0, s + scale * step[1]);
      Vec vel_try;
      Vec r_try = geodesic_endpoint(m, y, dir_of(th_try), s_try, max_step, &vel_try) - z;
      if (r_try.norm() < r.norm()) {
        theta = th_try;
        s = s_try;
        r = r_try;
        end_vel = vel_try;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;
  }
  if (r.norm() <= 1e-8) return s;
  throw DistanceNotComputable("geodesic shooting did not converge");
}

}  // namespace

double TargetManifold::tubular_width() const {
  switch (kind) {
    case ManifoldKind::Sphere:
      return params[0] / 2.0;
    case ManifoldKind::Ellipsoid:
      return min_semi_axis(*this) / 2.0;
    case ManifoldKind::Torus:
      return params[1] / 2.0;
  }
  throw Error("unknown manifold kind");
}

double TargetManifold::on_manifold_defect(const Vec& y) const {
  switch (kind) {
    case ManifoldKind::Sphere:
      return std::abs(y.norm() - params[0]);
    case ManifoldKind::Ellipsoid: {
      double f = -0.5;
      for (int i = 0; i < 3; ++i) {
        f += 0.5 * y[i] * y[i] / (params[i] * params[i]);
      }
      const double gn = level_gradient(*this, y).norm();
      return std::abs(f) / std::max(gn, 1e-12);
    }
    case ManifoldKind::Torus: {
      const double rho = std::hypot(y[0], y[1]);
      if (rho < 1e-300) return params[0];
      const double dd = std::hypot(rho - params[0], y[2]);
      return std::abs(dd - params[1]);
    }
  }
  throw Error("unknown manifold kind");
}

Vec TargetManifold::unit_normal(const Vec& y) const {
  Vec g = level_gradient(*this, y);
  const double n = g.norm();
  if (n < 1e-300) throw Error("normal undefined at this point");
  return g / n;
}

TargetManifold make_sphere(double radius, int ambient_dim) {
  if (radius <= 0.0) throw ParamOutOfRange("sphere radius must be positive");
  if (ambient_dim < 2) throw ParamOutOfRange("ambient dimension must be at least 2");
  TargetManifold m;
  m.kind = ManifoldKind::Sphere;
  m.ambient_dim = ambient_dim;
  m.intrinsic_dim = ambient_dim - 1;
  m.params << radius, 0.0, 0.0;
  m.injectivity_radius = kPi * radius;
  m.sectional_curvature_bound = 1.0 / (radius * radius);
  m.curvature_term_length = kPi * radius / 2.0;
  return m;
}

TargetManifold make_unit_sphere(int ambient_dim) { return make_sphere(1.0, ambient_dim); }

TargetManifold make_ellipsoid(double a, double b, double c) {
  if (a <= 0.0 || b <= 0.0 || c <= 0.0) {
    throw ParamOutOfRange("ellipsoid semi-axes must be positive");
  }
  TargetManifold m;
  m.kind = ManifoldKind::Ellipsoid;
  m.ambient_dim = 3;
  m.intrinsic_dim = 2;
  m.params << a, b, c;
  // Sectional curvature peaks at the tip of the longest axis.
  const double amax = std::max({a, b, c});
  const double amin = std::min({a, b, c});
  const double prod_others = a * b * c / amax;
  m.sectional_curvature_bound = (amax * amax) / (prod_others * prod_others);
  m.curvature_term_length = kPi / (2.0 * std::sqrt(m.sectional_curvature_bound));
  // Conservative bound: the conjugate-point radius or half the shortest
  // cross-section loop, whichever is smaller.
  m.injectivity_radius =
      std::min(kPi / std::sqrt(m.sectional_curvature_bound), kPi * amin);
  return m;
}

TargetManifold make_torus(double major_radius, double minor_radius) {
  if (minor_radius <= 0.0 || major_radius <= minor_radius) {
    throw ParamOutOfRange("torus requires major radius > minor radius > 0");
  }
  TargetManifold m;
  m.kind = ManifoldKind::Torus;
  m.ambient_dim = 3;
  m.intrinsic_dim = 2;
  m.params << major_radius, minor_radius, 0.0;
  m.sectional_curvature_bound = 1.0 / (minor_radius * (major_radius + minor_radius));
  m.curvature_term_length = kPi / (2.0 * std::sqrt(m.sectional_curvature_bound));
  // Meridian half-loop and waist half-loop, whichever pinches first.
  m.injectivity_radius =
      std::min(kPi * minor_radius, kPi * (major_radius - minor_radius));
  return m;
}

Vec project_to_manifold(const TargetManifold& m, const Vec& x) {
  if (x.size() != m.ambient_dim) throw Error("ambient dimension mismatch");
  // On the outward side the nearest point is unique at any distance for all
  // three targets, so the width guards the inward side only, where the
  // projection degenerates at the medial axis.
  const double width = m.tubular_width();
  switch (m.kind) {
    case ManifoldKind::Sphere: {
      const double r = x.norm();
      if (r <= m.params[0] - width) {
        throw OutsideTubularNeighborhood(
            "point at inward distance " + std::to_string(m.params[0] - r) +
            " from the sphere, width " + std::to_string(width));
      }
      return (m.params[0] / r) * x;
    }
    case ManifoldKind::Ellipsoid: {
      Vec y;
      if (!ellipsoid_lagrange_solve(m, x, y)) {
        throw OutsideTubularNeighborhood("ellipsoid projection has no principal root at " +
                                         describe(x));
      }
      double f = -0.5;
      for (int i = 0; i < 3; ++i) f += 0.5 * x[i] * x[i] / (m.params[i] * m.params[i]);
      const double dist = (x - y).norm();
      if (f < 0.0 && dist >= width) {
        throw OutsideTubularNeighborhood("point at inward distance " +
                                         std::to_string(dist) +
                                         " from the ellipsoid, width " +
                                         std::to_string(width));
      }
      if (m.on_manifold_defect(y) > m.projection_tolerance) {
        throw Error("ellipsoid projection did not reach tolerance");
      }
      return y;
    }
    case ManifoldKind::Torus: {
      bool ok = false;
      double dist = 0.0;
      const double minor = m.params[1];
      Vec y = torus_project_core(m, x, /*robust=*/false, ok, dist);
      const double rho = std::hypot(x[0], x[1]);
      const double spine_distance =
          rho < 1e-300 ? 0.0 : std::hypot(rho - m.params[0], x[2]);
      if (!ok || (spine_distance < minor && minor - spine_distance >= width)) {
        throw OutsideTubularNeighborhood("point too close to the torus spine");
      }
      return y;
    }
  }
  throw Error("unknown manifold kind");
}

Vec tangent_project(const TargetManifold& m, const Vec& y, const Vec& V) {
  detail::require_on_manifold(m, y, "tangent_project");
  const Vec n = m.unit_normal(y);
  return V - V.dot(n) * n;
}

Vec second_fundamental_form(const TargetManifold& m, const Vec& y, const Vec& Y,
                            const Vec& Z) {
  detail::require_on_manifold(m, y, "second_fundamental_form");
  const Vec n = m.unit_normal(y);
  const double tol_y = 1e-6 * (1.0 + Y.norm());
  const double tol_z = 1e-6 * (1.0 + Z.norm());
  if (std::abs(Y.dot(n)) > tol_y || std::abs(Z.dot(n)) > tol_z) {
    throw NonTangentInput("second_fundamental_form requires tangent inputs");
  }
  return detail::sff_bilinear(m, y, Y, Z);
}

double geodesic_distance(const TargetManifold& m, const Vec& y, const Vec& z) {
  detail::require_on_manifold(m, y, "geodesic_distance");
  detail::require_on_manifold(m, z, "geodesic_distance");
  if (m.kind == ManifoldKind::Sphere) {
    const double radius = m.params[0];
    const double half_chord = 0.5 * (y - z).norm() / radius;
    return 2.0 * radius * std::asin(clamp_unit(half_chord));
  }
  return shoot_geodesic_distance(m, y, z);
}

double small_range_radius(const TargetManifold& m) {
  return std::min(m.injectivity_radius, m.curvature_term_length);
}

Vec project_to_geodesic_ball(const TargetManifold& m, const GeodesicBall& ball,
                             const Vec& y) {
  if (m.kind != ManifoldKind::Sphere) {
    throw UnsupportedTarget("geodesic-ball projection is implemented for sphere targets only");
  }
  detail::require_on_manifold(m, y, "project_to_geodesic_ball");
  detail::require_on_manifold(m, ball.center, "project_to_geodesic_ball(center)");
  const double d = geodesic_distance(m, ball.center, y);
  if (d <= ball.radius) return y;

  const double radius = m.params[0];
  const Vec p_hat = ball.center / radius;
  const Vec y_hat = y / radius;
  const double psi = d / radius;
  Vec dir = y_hat - std::cos(psi) * p_hat;
  const double len = dir.norm();
  if (len < 1e-14) {
    // Antipodal: the minimizing geodesic is not unique; take a deterministic
    // tangent direction.
    for (int axis = 0; axis < m.ambient_dim; ++axis) {
      Vec v = Vec::Zero(m.ambient_dim);
      v[axis] = 1.0;
      dir = v - v.dot(p_hat) * p_hat;
      if (dir.norm() > 0.5) break;
    }
    dir.normalize();
  } else {
    dir /= len;
  }
  const double phi = ball.radius / radius;
  return radius * (std::cos(phi) * p_hat + std::sin(phi) * dir);
}

Vec sphere_exponential(const TargetManifold& m, const Vec& y, const Vec& v) {
  if (m.kind != ManifoldKind::Sphere) {
    throw UnsupportedTarget("exponential map is implemented for sphere targets only");
  }
  detail::require_on_manifold(m, y, "sphere_exponential");
  const double radius = m.params[0];
  const Vec t = tangent_project(m, y, v);
  const double len = t.norm();
  if (len < 1e-300) return y;
  const double theta = len / radius;
  return std::cos(theta) * y + std::sin(theta) * (radius / len) * t;
}

namespace detail {

Vec sff_bilinear(const TargetManifold& m, const Vec& y, const Vec& Y, const Vec& Z) {
  const Vec g = level_gradient(m, y);
  const double gn = g.norm();
  if (gn < 1e-300) throw Error("second fundamental form undefined at this point");
  const Eigen::MatrixXd h = level_hessian(m, y);
  const double quad = Y.dot(h * Z);
  return (-quad / (gn * gn)) * g;
}

Vec project_robust(const TargetManifold& m, const Vec& x) {
  switch (m.kind) {
    case ManifoldKind::Sphere: {
      const double r = x.norm();
      // Near the center the direction is numerical noise; pick the first
      // axis point deterministically instead of normalizing garbage.
      if (r < 1e-12 * m.params[0]) {
        Vec y = Vec::Zero(m.ambient_dim);
        y[0] = m.params[0];
        return y;
      }
      return (m.params[0] / r) * x;
    }
    case ManifoldKind::Ellipsoid: {
      Vec y;
      if (ellipsoid_lagrange_solve(m, x, y)) return y;
      return ellipsoid_grid_nearest(m, x);
    }
    case ManifoldKind::Torus: {
      bool ok = false;
      double dist = 0.0;
      Vec y = torus_project_core(m, x, /*robust=*/true, ok, dist);
      return y;
    }
  }
  throw Error("unknown manifold kind");
}

double on_manifold_threshold(const TargetManifold& m) {
  return std::max(100.0 * m.projection_tolerance, 1e-8);
}

void require_on_manifold(const TargetManifold& m, const Vec& y, const char* op) {
  if (y.size() != m.ambient_dim) {
    throw Error(std::string(op) + ": ambient dimension mismatch");
  }
  const double defect = m.on_manifold_defect(y);
  if (defect > on_manifold_threshold(m)) {
    throw PointNotOnManifold(std::string(op) + ": point " + describe(y) +
                             " has on-manifold defect " + std::to_string(defect));
  }
}

}  // namespace detail

}  // namespace pharmap
