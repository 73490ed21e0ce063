#include "pharmap/energy.hpp"

#include <cmath>

#include "pharmap/summation.hpp"

namespace pharmap {

namespace {

// (s + eps^2)^(q/2) with the q == 0 case pinned to 1 so p = 2 never calls pow.
double half_power(double s, double eps, double q) {
  const double base = s + eps * eps;
  if (q == 0.0) return 1.0;
  if (q == 2.0) return base;
  return std::pow(base, 0.5 * q);
}

// Contraction of the curvature term on one triangle: the second fundamental
// form summed over the frame directions, with each discrete gradient row
// tangent-projected at the projected barycenter so the bilinear extension
// sees true tangent inputs.
Vec curvature_contraction(const TargetManifold& target, const Vec& barycenter_on_n,
                          const Eigen::MatrixXd& jacobian) {
  Vec total = Vec::Zero(jacobian.cols());
  for (int alpha = 0; alpha < 2; ++alpha) {
    const Vec row = tangent_project(target, barycenter_on_n, jacobian.row(alpha));
    total += detail::sff_bilinear(target, barycenter_on_n, row, row);
  }
  return total;
}

}  // namespace

namespace detail {

Eigen::MatrixXd triangle_jacobian(const DomainMesh& mesh, const Eigen::MatrixXd& values,
                                  int t) {
  const auto& tri = mesh.triangles[t];
  Eigen::Matrix<double, 3, Eigen::Dynamic> local(3, values.cols());
  local.row(0) = values.row(tri[0]);
  local.row(1) = values.row(tri[1]);
  local.row(2) = values.row(tri[2]);
  return mesh.gradient_coefficients[t].transpose() * local;
}

}  // namespace detail

double p_energy(const ManifoldMap& u, double p, double eps) {
  if (p < 2.0) throw Error("p_energy requires p >= 2");
  if (eps < 0.0) throw Error("p_energy requires eps >= 0");
  const DomainMesh& mesh = *u.mesh;
  CompensatedSum sum;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::MatrixXd j = detail::triangle_jacobian(mesh, u.values, t);
    sum.add(mesh.triangle_areas[t] * half_power(j.squaredNorm(), eps, p));
  }
  return sum.value() / p;
}

Eigen::MatrixXd energy_gradient(const ManifoldMap& u, double p, double eps) {
  if (p < 2.0) {
    if (eps == 0.0) {
      const DomainMesh& mesh = *u.mesh;
      for (int t = 0; t < mesh.num_triangles(); ++t) {
        if (detail::triangle_jacobian(mesh, u.values, t).squaredNorm() == 0.0) {
          throw DegenerateGradient(
              "energy density is not differentiable at a vanishing gradient for p < 2");
        }
      }
    }
    throw Error("energy_gradient requires p >= 2");
  }
  const DomainMesh& mesh = *u.mesh;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(u.values.rows(), u.values.cols());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::MatrixXd j = detail::triangle_jacobian(mesh, u.values, t);
    const double weight =
        mesh.triangle_areas[t] * half_power(j.squaredNorm(), eps, p - 2.0);
    const Eigen::MatrixXd local = weight * (mesh.gradient_coefficients[t] * j);
    const auto& tri = mesh.triangles[t];
    for (int c = 0; c < 3; ++c) grad.row(tri[c]) += local.row(c);
  }
  for (int v : mesh.boundary_vertices) grad.row(v).setZero();
  for (int v : mesh.interior_vertices) {
    grad.row(v) = tangent_project(u.target, u.values.row(v), grad.row(v)).transpose();
  }
  return grad;
}

double el_residual(const ManifoldMap& u, double p, const Eigen::MatrixXd& phi) {
  if (p < 2.0) throw Error("el_residual requires p >= 2");
  const DomainMesh& mesh = *u.mesh;
  CompensatedSum defect;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::MatrixXd ju = detail::triangle_jacobian(mesh, u.values, t);
    const Eigen::MatrixXd jphi = detail::triangle_jacobian(mesh, phi, t);
    const double s = ju.squaredNorm();
    const double weight = half_power(s, 0.0, p - 2.0);
    if (weight == 0.0) continue;
    const auto& tri = mesh.triangles[t];
    const Vec bary =
        (u.values.row(tri[0]) + u.values.row(tri[1]) + u.values.row(tri[2])) / 3.0;
    const Vec bary_phi = (phi.row(tri[0]) + phi.row(tri[1]) + phi.row(tri[2])) / 3.0;
    // Barycenter projection without the step-size guard: the barycenter of
    // on-manifold vertex values sits inside the tubular neighborhood for any
    // reasonably resolved map.
    const Vec on_n = detail::project_robust(u.target, bary);
    const Vec curv = curvature_contraction(u.target, on_n, ju);
    const double gradient_pairing = (ju.array() * jphi.array()).sum();
    // The curvature term of the Euler-Lagrange system is the negative of the
    // Gauss-formula second fundamental form, so the defect adds the
    // contraction rather than subtracting it.
    defect.add(mesh.triangle_areas[t] * weight * (gradient_pairing + curv.dot(bary_phi)));
  }
  return defect.value();
}

double w1p_norm(const DomainMesh& mesh, const Eigen::MatrixXd& field, double p) {
  CompensatedSum sum;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec bary = (field.row(tri[0]) + field.row(tri[1]) + field.row(tri[2])) / 3.0;
    const Eigen::MatrixXd j = detail::triangle_jacobian(mesh, field, t);
    sum.add(mesh.triangle_areas[t] *
            (std::pow(bary.norm(), p) + std::pow(j.norm(), p)));
  }
  return std::pow(sum.value(), 1.0 / p);
}

double el_residual_norm(const ManifoldMap& u, double p) {
  const DomainMesh& mesh = *u.mesh;
  const int k = u.ambient_dim();
  double worst = 0.0;
  // A hat field is supported on the star of its vertex, so both the defect
  // and the W^{1,p} norm are assembled over that star only.
  for (int v : mesh.interior_vertices) {
    const Vec n = u.target.unit_normal(u.values.row(v));
    std::vector<Vec> dirs;
    for (int axis = 0; axis < k && static_cast<int>(dirs.size()) < k - 1; ++axis) {
      Vec d = Vec::Zero(k);
      d[axis] = 1.0;
      d -= d.dot(n) * n;
      for (const Vec& prev : dirs) d -= d.dot(prev) * prev;
      if (d.norm() > 1e-7) dirs.push_back(d.normalized());
    }
    for (const Vec& d : dirs) {
      CompensatedSum defect;
      CompensatedSum norm_p;
      for (int t : mesh.vertex_triangles[v]) {
        const auto& tri = mesh.triangles[t];
        int corner = 0;
        while (tri[corner] != v) ++corner;
        const Eigen::MatrixXd ju = detail::triangle_jacobian(mesh, u.values, t);
        const double s = ju.squaredNorm();
        const double weight = half_power(s, 0.0, p - 2.0);
        // grad(hat_v * d) = g_corner outer d; phi at the barycenter is d/3.
        const Eigen::Vector2d g = mesh.gradient_coefficients[t].row(corner).transpose();
        const Vec bary_phi = d / 3.0;
        if (weight > 0.0) {
          const Vec bary =
              (u.values.row(tri[0]) + u.values.row(tri[1]) + u.values.row(tri[2])) / 3.0;
          const Vec on_n = detail::project_robust(u.target, bary);
          const Vec curv = curvature_contraction(u.target, on_n, ju);
          const double gradient_pairing = (ju.transpose() * g).dot(d);
          defect.add(mesh.triangle_areas[t] * weight *
                     (gradient_pairing + curv.dot(bary_phi)));
        }
        norm_p.add(mesh.triangle_areas[t] *
                   (std::pow(bary_phi.norm(), p) + std::pow(g.norm(), p)));
      }
      const double norm = std::pow(norm_p.value(), 1.0 / p);
      if (norm > 0.0) worst = std::max(worst, std::abs(defect.value()) / norm);
    }
  }
  return worst;
}

EnergyReport energy_report(const ManifoldMap& u, double p, double eps,
                           const std::optional<GeodesicBall>& ball) {
  const DomainMesh& mesh = *u.mesh;
  EnergyReport report;
  report.p_energy = p_energy(u, p, 0.0);
  const Eigen::MatrixXd grad = energy_gradient(u, p, eps);
  const int interior = static_cast<int>(mesh.interior_vertices.size());
  report.riemannian_gradient_norm =
      interior > 0 ? grad.norm() / std::sqrt(static_cast<double>(interior)) : 0.0;
  report.el_residual_norm = el_residual_norm(u, p);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    report.max_triangle_gradient =
        std::max(report.max_triangle_gradient,
                 detail::triangle_jacobian(mesh, u.values, t).norm());
  }
  if (ball) {
    for (Eigen::Index v = 0; v < u.values.rows(); ++v) {
      report.range_radius = std::max(
          report.range_radius, geodesic_distance(u.target, ball->center, u.values.row(v)));
    }
  }
  return report;
}

}  // namespace pharmap
