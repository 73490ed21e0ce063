#include "pharmap/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pharmap/summation.hpp"

namespace pharmap {

double InequalityMargin::scale() const {
  return std::max({std::abs(lhs), std::abs(rhs), 1.0});
}

namespace {

double power_q(double base, double q) {
  if (q == 0.0) return 1.0;
  if (q == 1.0) return base;
  if (q == 2.0) return base * base;
  return std::pow(base, q);
}

std::vector<double> flatten(std::initializer_list<const Vec*> vecs, double q) {
  std::vector<double> out;
  out.push_back(q);
  for (const Vec* v : vecs) {
    for (int i = 0; i < v->size(); ++i) out.push_back((*v)[i]);
  }
  return out;
}

}  // namespace

InequalityMargin check_monotonicity_inequality(const Vec& X, const Vec& Y, double q) {
  if (q < 0.0) throw ParamOutOfRange("monotonicity inequality requires q >= 0");
  if (X.size() != Y.size()) throw Error("vector dimension mismatch");
  const double xq = power_q(X.norm(), q);
  const double yq = power_q(Y.norm(), q);
  InequalityMargin m;
  m.lhs = 0.5 * (xq + yq) * (X - Y).squaredNorm();
  m.rhs = (xq * X - yq * Y).dot(X - Y);
  m.margin = m.rhs - m.lhs;
  m.witness = flatten({&X, &Y}, q);
  return m;
}

InequalityMargin check_lipschitz_inequality(const Vec& X, const Vec& Y, double q) {
  if (q < 0.0) throw ParamOutOfRange("lipschitz inequality requires q >= 0");
  if (X.size() != Y.size()) throw Error("vector dimension mismatch");
  const double xq = power_q(X.norm(), q);
  const double yq = power_q(Y.norm(), q);
  InequalityMargin m;
  m.lhs = (xq * X - yq * Y).norm();
  m.rhs = (q + 1.0) * (xq + yq) * (X - Y).norm();
  m.margin = m.rhs - m.lhs;
  m.witness = flatten({&X, &Y}, q);
  return m;
}

namespace detail {

Vec sample_manifold_point(const TargetManifold& m, rng::Engine& gen) {
  switch (m.kind) {
    case ManifoldKind::Sphere: {
      Vec v;
      do {
        v = rng::gaussian(gen, m.ambient_dim);
      } while (v.norm() < 1e-9);
      return (m.params[0] / v.norm()) * v;
    }
    case ManifoldKind::Ellipsoid: {
      Vec v;
      do {
        v = rng::gaussian(gen, 3);
      } while (v.norm() < 1e-9);
      v.normalize();
      for (int i = 0; i < 3; ++i) v[i] *= m.params[i];
      return v;
    }
    case ManifoldKind::Torus: {
      const double theta = 2.0 * std::numbers::pi * rng::uniform01(gen);
      const double phi = 2.0 * std::numbers::pi * rng::uniform01(gen);
      const double major = m.params[0], minor = m.params[1];
      Vec v(3);
      v[0] = (major + minor * std::cos(phi)) * std::cos(theta);
      v[1] = (major + minor * std::cos(phi)) * std::sin(theta);
      v[2] = minor * std::sin(phi);
      return v;
    }
  }
  throw Error("unknown manifold kind");
}

Vec sample_unit_tangent(const TargetManifold& m, const Vec& y, rng::Engine& gen) {
  Vec t;
  do {
    t = tangent_project(m, y, rng::gaussian(gen, m.ambient_dim));
  } while (t.norm() < 1e-9);
  return t / t.norm();
}

}  // namespace detail

namespace {

struct SffSample {
  Vec y, z, Y, Z;
  double ratio_denominator;
  double difference;
};

// The ratio peaks as z -> y with nearly transported tangents, so independent
// uniform pairs make the empirical max a heavy-tailed statistic. Mixing in
// correlated pairs at log-uniform separations (and transported tangents half
// the time) concentrates samples where the ratio is large, which makes the
// per-seed maximum a stable estimate of the supremum.
SffSample draw_sff_sample(const TargetManifold& m, rng::Engine& gen) {
  const double feature = m.params.maxCoeff();
  SffSample s;
  do {
    s.y = detail::sample_manifold_point(m, gen);
    if (rng::uniform01(gen) < 0.25) {
      s.z = detail::sample_manifold_point(m, gen);
    } else {
      const double log_lo = std::log(1e-4 * feature);
      const double log_hi = std::log(2.0 * feature);
      const double separation =
          std::exp(log_lo + (log_hi - log_lo) * rng::uniform01(gen));
      Vec direction;
      do {
        direction = rng::gaussian(gen, m.ambient_dim);
      } while (direction.norm() < 1e-9);
      direction.normalize();
      s.z = detail::project_robust(m, s.y + separation * direction);
    }
    s.Y = detail::sample_unit_tangent(m, s.y, gen);
    if (rng::uniform01(gen) < 0.5) {
      s.Z = detail::sample_unit_tangent(m, s.z, gen);
    } else {
      Vec transported = tangent_project(m, s.z, s.Y);
      if (transported.norm() < 1e-9) {
        s.Z = detail::sample_unit_tangent(m, s.z, gen);
      } else {
        s.Z = transported.normalized();
      }
    }
    s.ratio_denominator = (s.Y.squaredNorm() + s.Z.squaredNorm()) * (s.y - s.z).norm() +
                          (s.Y.norm() + s.Z.norm()) * (s.Y - s.Z).norm();
  } while (s.ratio_denominator < 1e-12);
  s.difference = (second_fundamental_form(m, s.y, s.Y, s.Y) -
                  second_fundamental_form(m, s.z, s.Z, s.Z))
                     .norm();
  return s;
}

}  // namespace

double estimate_sff_constant(const TargetManifold& m, int samples, std::uint64_t seed) {
  if (samples < 1) throw ParamOutOfRange("estimate_sff_constant needs samples >= 1");
  rng::Engine gen(seed);
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const SffSample s = draw_sff_sample(m, gen);
    best = std::max(best, s.difference / s.ratio_denominator);
  }
  return best;
}

InequalityMargin check_sff_inequality(const TargetManifold& m, double C, int samples,
                                      std::uint64_t seed) {
  if (samples < 1) throw ParamOutOfRange("check_sff_inequality needs samples >= 1");
  rng::Engine gen(seed);
  InequalityMargin worst;
  bool first = true;
  for (int i = 0; i < samples; ++i) {
    const SffSample s = draw_sff_sample(m, gen);
    InequalityMargin margin;
    margin.lhs = s.difference;
    margin.rhs = 1.05 * C * s.ratio_denominator;
    margin.margin = margin.rhs - margin.lhs;
    if (first || margin.margin < worst.margin) {
      margin.witness = flatten({&s.y, &s.z, &s.Y, &s.Z}, 0.0);
      margin.witness[0] = static_cast<double>(i);
      worst = std::move(margin);
      first = false;
    }
  }
  return worst;
}

InequalityMargin stability_check(const ManifoldMap& u, const GeodesicBall& ball,
                                 double p, const Eigen::MatrixXd& phi) {
  const DomainMesh& mesh = *u.mesh;
  if (phi.rows() != u.values.rows() || phi.cols() != u.values.cols()) {
    throw Error("stability_check: test field has wrong shape");
  }
  for (int v : mesh.boundary_vertices) {
    if (phi.row(v).norm() != 0.0) {
      throw Error("stability_check: test field must vanish on the boundary");
    }
  }
  // The hypothesis is Euclidean: every vertex value inside the Euclidean ball
  // of radius r about the center.
  const double r = ball.radius;
  for (Eigen::Index v = 0; v < u.values.rows(); ++v) {
    const double d = (u.values.row(v).transpose() - ball.center).norm();
    if (d > r + 1e-12) {
      throw NotSmallRange("map leaves the Euclidean ball: vertex distance " +
                          std::to_string(d) + " > radius " + std::to_string(r));
    }
  }

  CompensatedSum lhs, rhs;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Eigen::MatrixXd ju = detail::triangle_jacobian(mesh, u.values, t);
    const Eigen::MatrixXd jphi = detail::triangle_jacobian(mesh, phi, t);
    const Vec bary_phi = (phi.row(tri[0]) + phi.row(tri[1]) + phi.row(tri[2])) / 3.0;
    const double s = ju.squaredNorm();
    const double area = mesh.triangle_areas[t];
    lhs.add(area * power_q(s, 0.5 * p) * bary_phi.squaredNorm());
    rhs.add(area * power_q(s, 0.5 * (p - 2.0)) * jphi.squaredNorm());
  }
  InequalityMargin m;
  m.lhs = lhs.value();
  m.rhs = 16.0 * r * r * rhs.value();
  m.margin = m.rhs - m.lhs;
  return m;
}

InequalityMargin stability_check_randomized(const ManifoldMap& u,
                                            const GeodesicBall& ball, double p,
                                            int trials, std::uint64_t seed,
                                            std::vector<InequalityMargin>* all) {
  if (trials < 1) throw ParamOutOfRange("stability check needs trials >= 1");
  const DomainMesh& mesh = *u.mesh;
  const int k = u.ambient_dim();
  rng::Engine gen(seed);
  InequalityMargin worst;
  bool first = true;
  for (int trial = 0; trial < trials; ++trial) {
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(u.values.rows(), k);
    for (int v : mesh.interior_vertices) {
      phi.row(v) = rng::gaussian(gen, k).transpose();
    }
    // One Jacobi averaging pass spreads each bump over its neighbors; the
    // boundary stays pinned at zero.
    Eigen::MatrixXd smoothed = phi;
    for (int v : mesh.interior_vertices) {
      Vec acc = phi.row(v).transpose();
      for (int w : mesh.vertex_neighbors[v]) acc += phi.row(w).transpose();
      smoothed.row(v) = acc.transpose() / (1.0 + mesh.vertex_neighbors[v].size());
    }
    const double norm = w1p_norm(mesh, smoothed, p);
    if (norm > 0.0) smoothed /= norm;
    InequalityMargin m = stability_check(u, ball, p, smoothed);
    m.witness = {static_cast<double>(trial), static_cast<double>(seed)};
    if (all) all->push_back(m);
    if (first || m.margin < worst.margin) {
      worst = m;
      first = false;
    }
  }
  return worst;
}

}  // namespace pharmap
