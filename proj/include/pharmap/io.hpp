#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "pharmap/mesh.hpp"

namespace pharmap {

/// Shortest decimal form with 17 significant digits; round-trips doubles
/// exactly, so rewriting a parsed file is byte-identical.
std::string format17(double x);

/// Mesh file format: line 1 "V T", then V lines "x y b" with b the boundary
/// flag, then T lines "i j k" of zero-based counterclockwise indices.
void write_mesh_file(const std::filesystem::path& path, const DomainMesh& mesh);
DomainMesh read_mesh_file(const std::filesystem::path& path);

/// Map file format: line 1 "V k", then V lines of k ambient coordinates in
/// mesh vertex order.
void write_map_file(const std::filesystem::path& path, const Eigen::MatrixXd& values);
Eigen::MatrixXd read_map_file(const std::filesystem::path& path);

/// Minimal CSV emitter: quoting-free numeric report rows, one header.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(const std::vector<std::string>& cells);
  std::string str() const;
  void write(const std::filesystem::path& path) const;

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace pharmap
