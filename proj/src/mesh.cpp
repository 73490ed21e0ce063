#include "pharmap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "pharmap/summation.hpp"

namespace pharmap {

namespace {

double signed_area(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                   const Eigen::Vector2d& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

Eigen::Vector2d rotate_ccw(const Eigen::Vector2d& v) { return {-v.y(), v.x()}; }

}  // namespace

double DomainMesh::total_area() const {
  CompensatedSum s;
  for (double a : triangle_areas) s.add(a);
  return s.value();
}

DomainMesh finalize_mesh(std::vector<Eigen::Vector2d> vertices,
                         std::vector<std::array<int, 3>> triangles) {
  DomainMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  const int nv = mesh.num_vertices();
  const int nt = mesh.num_triangles();
  if (nv < 3 || nt < 1) throw Error("mesh needs at least one triangle");

  mesh.triangle_areas.resize(nt);
  mesh.gradient_coefficients.resize(nt);
  mesh.vertex_triangles.assign(nv, {});

  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int c = 0; c < 3; ++c) {
      if (tri[c] < 0 || tri[c] >= nv) throw Error("triangle vertex index out of range");
      mesh.vertex_triangles[tri[c]].push_back(t);
    }
    const Eigen::Vector2d &a = mesh.vertices[tri[0]], &b = mesh.vertices[tri[1]],
                          &c = mesh.vertices[tri[2]];
    const double area = signed_area(a, b, c);
    if (area <= 1e-14) {
      throw Error("triangle " + std::to_string(t) +
                  " is degenerate or clockwise (signed area " + std::to_string(area) + ")");
    }
    mesh.triangle_areas[t] = area;
    // Gradient of hat i: the opposite edge rotated a quarter turn, over twice
    // the area. Exact for affine data.
    Eigen::Matrix<double, 3, 2> g;
    g.row(0) = rotate_ccw(c - b).transpose() / (2.0 * area);
    g.row(1) = rotate_ccw(a - c).transpose() / (2.0 * area);
    g.row(2) = rotate_ccw(b - a).transpose() / (2.0 * area);
    mesh.gradient_coefficients[t] = g;
  }

  // Edge incidence: boundary edges belong to exactly one triangle, interior
  // edges to exactly two.
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& tri : mesh.triangles) {
    for (int c = 0; c < 3; ++c) {
      int i = tri[c], j = tri[(c + 1) % 3];
      edge_count[{std::min(i, j), std::max(i, j)}]++;
    }
  }
  mesh.boundary_flag.assign(nv, 0);
  std::set<std::pair<int, int>> neighbor_pairs;
  for (const auto& [edge, count] : edge_count) {
    if (count > 2) throw Error("non-manifold edge in mesh");
    if (count == 1) {
      mesh.boundary_flag[edge.first] = 1;
      mesh.boundary_flag[edge.second] = 1;
    }
    neighbor_pairs.insert(edge);
  }

  mesh.vertex_neighbors.assign(nv, {});
  for (const auto& [i, j] : neighbor_pairs) {
    mesh.vertex_neighbors[i].push_back(j);
    mesh.vertex_neighbors[j].push_back(i);
  }
  for (auto& nbrs : mesh.vertex_neighbors) std::sort(nbrs.begin(), nbrs.end());

  for (int v = 0; v < nv; ++v) {
    if (mesh.vertex_triangles[v].empty()) throw Error("isolated vertex in mesh");
    (mesh.boundary_flag[v] ? mesh.boundary_vertices : mesh.interior_vertices).push_back(v);
  }
  return mesh;
}

DomainMesh build_unit_square_grid(int n_per_side) {
  if (n_per_side < 2) throw ParamOutOfRange("square grid needs n_per_side >= 2");
  const int n = n_per_side;
  std::vector<Eigen::Vector2d> vertices;
  vertices.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
    }
  }
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1),
                v11 = vid(i + 1, j + 1);
      triangles.push_back({v00, v10, v11});
      triangles.push_back({v00, v11, v01});
    }
  }
  return finalize_mesh(std::move(vertices), std::move(triangles));
}

DomainMesh build_unit_disk_mesh(int refinement) {
  if (refinement < 1) throw ParamOutOfRange("disk mesh needs refinement >= 1");
  const int rings = refinement;
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::vector<int>> ring_ids(rings + 1);
  vertices.emplace_back(0.0, 0.0);
  ring_ids[0] = {0};
  for (int j = 1; j <= rings; ++j) {
    const int count = 6 * j;
    const double radius = static_cast<double>(j) / rings;
    for (int i = 0; i < count; ++i) {
      const double angle = 2.0 * std::numbers::pi * i / count;
      ring_ids[j].push_back(static_cast<int>(vertices.size()));
      vertices.emplace_back(radius * std::cos(angle), radius * std::sin(angle));
    }
  }

  std::vector<std::array<int, 3>> triangles;
  // Center fan.
  for (int i = 0; i < 6; ++i) {
    triangles.push_back({0, ring_ids[1][i], ring_ids[1][(i + 1) % 6]});
  }
  // Stitch consecutive rings with a two-pointer walk over angles.
  for (int j = 2; j <= rings; ++j) {
    const auto& inner = ring_ids[j - 1];
    const auto& outer = ring_ids[j];
    const int na = static_cast<int>(inner.size());
    const int nb = static_cast<int>(outer.size());
    int a = 0, b = 0;
    while (a < na || b < nb) {
      bool advance_outer;
      if (a == na) {
        advance_outer = true;
      } else if (b == nb) {
        advance_outer = false;
      } else {
        advance_outer =
            static_cast<double>(b + 1) / nb <= static_cast<double>(a + 1) / na;
      }
      if (advance_outer) {
        triangles.push_back({inner[a % na], outer[b % nb], outer[(b + 1) % nb]});
        ++b;
      } else {
        triangles.push_back({inner[a % na], outer[b % nb], inner[(a + 1) % na]});
        ++a;
      }
    }
  }
  return finalize_mesh(std::move(vertices), std::move(triangles));
}

Eigen::Vector2d triangle_gradient(const DomainMesh& mesh, int t,
                                  const Eigen::Vector3d& vertex_values) {
  if (t < 0 || t >= mesh.num_triangles()) throw Error("triangle index out of range");
  return mesh.gradient_coefficients[t].transpose() * vertex_values;
}

std::vector<int> boundary_loop(const DomainMesh& mesh) {
  // Directed boundary edges, oriented as they appear in their unique
  // triangle; for counterclockwise triangles this walks the loop
  // counterclockwise.
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& tri : mesh.triangles) {
    for (int c = 0; c < 3; ++c) {
      int i = tri[c], j = tri[(c + 1) % 3];
      edge_count[{std::min(i, j), std::max(i, j)}]++;
    }
  }
  std::map<int, int> next;
  for (const auto& tri : mesh.triangles) {
    for (int c = 0; c < 3; ++c) {
      int i = tri[c], j = tri[(c + 1) % 3];
      if (edge_count[{std::min(i, j), std::max(i, j)}] == 1) next[i] = j;
    }
  }
  if (next.empty()) throw Error("mesh has no boundary");

  const int start = mesh.boundary_vertices.front();
  std::vector<int> loop;
  int v = start;
  do {
    loop.push_back(v);
    auto it = next.find(v);
    if (it == next.end()) throw Error("boundary loop is not closed");
    v = it->second;
    if (loop.size() > mesh.boundary_vertices.size()) {
      throw Error("boundary walk did not close");
    }
  } while (v != start);
  if (loop.size() != mesh.boundary_vertices.size()) {
    throw Error("mesh boundary has more than one loop");
  }
  return loop;
}

std::vector<double> boundary_arc_parameter(const DomainMesh& mesh,
                                           const std::vector<int>& loop) {
  const int n = static_cast<int>(loop.size());
  std::vector<double> cumulative(n, 0.0);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    cumulative[i] = total;
    total += (mesh.vertices[loop[(i + 1) % n]] - mesh.vertices[loop[i]]).norm();
  }
  for (double& s : cumulative) s /= total;
  return cumulative;
}

}  // namespace pharmap
