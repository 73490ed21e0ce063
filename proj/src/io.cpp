#include "pharmap/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pharmap {

std::string format17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_mesh_file(const std::filesystem::path& path, const DomainMesh& mesh) {
  auto out = open_output(path);
  out << mesh.num_vertices() << " " << mesh.num_triangles() << "\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    out << format17(mesh.vertices[v].x()) << " " << format17(mesh.vertices[v].y()) << " "
        << (mesh.boundary_flag[v] ? 1 : 0) << "\n";
  }
  for (const auto& tri : mesh.triangles) {
    out << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
  }
  if (!out) throw IoError("failed writing " + path.string());
}

DomainMesh read_mesh_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  int nv = 0, nt = 0;
  if (!(in >> nv >> nt) || nv < 3 || nt < 1) {
    throw IoError("mesh file " + path.string() + ": bad header");
  }
  std::vector<Eigen::Vector2d> vertices(nv);
  std::vector<char> flags(nv);
  for (int v = 0; v < nv; ++v) {
    double x, y;
    int b;
    if (!(in >> x >> y >> b) || (b != 0 && b != 1)) {
      throw IoError("mesh file " + path.string() + ": bad vertex line " +
                    std::to_string(v));
    }
    vertices[v] = {x, y};
    flags[v] = static_cast<char>(b);
  }
  std::vector<std::array<int, 3>> triangles(nt);
  for (int t = 0; t < nt; ++t) {
    if (!(in >> triangles[t][0] >> triangles[t][1] >> triangles[t][2])) {
      throw IoError("mesh file " + path.string() + ": bad triangle line " +
                    std::to_string(t));
    }
  }
  DomainMesh mesh;
  try {
    mesh = finalize_mesh(std::move(vertices), std::move(triangles));
  } catch (const Error& e) {
    throw IoError("mesh file " + path.string() + ": " + e.what());
  }
  // The stored flags must agree with the mesh topology.
  for (int v = 0; v < nv; ++v) {
    if (mesh.boundary_flag[v] != flags[v]) {
      throw IoError("mesh file " + path.string() + ": boundary flag of vertex " +
                    std::to_string(v) + " disagrees with the edge topology");
    }
  }
  return mesh;
}

void write_map_file(const std::filesystem::path& path, const Eigen::MatrixXd& values) {
  auto out = open_output(path);
  out << values.rows() << " " << values.cols() << "\n";
  for (Eigen::Index v = 0; v < values.rows(); ++v) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      out << (j ? " " : "") << format17(values(v, j));
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Eigen::MatrixXd read_map_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  Eigen::Index nv = 0, k = 0;
  if (!(in >> nv >> k) || nv < 1 || k < 2) {
    throw IoError("map file " + path.string() + ": bad header");
  }
  Eigen::MatrixXd values(nv, k);
  for (Eigen::Index v = 0; v < nv; ++v) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!(in >> values(v, j))) {
        throw IoError("map file " + path.string() + ": bad value at row " +
                      std::to_string(v));
      }
    }
  }
  return values;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw Error("csv row width mismatch");
  rows_.push_back(cells);
}

std::string CsvWriter::str() const {
  std::ostringstream os;
  for (size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << header_[i];
  os << "\n";
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

void CsvWriter::write(const std::filesystem::path& path) const {
  auto out = open_output(path);
  out << str();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace pharmap
