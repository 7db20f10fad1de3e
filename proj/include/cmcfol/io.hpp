#pragma once

#include <map>
#include <string>

#include "cmcfol/solver.hpp"

namespace cmcfol {

/// 17 significant digits: lossless double round trips, byte-stable output.
std::string fmt17(double x);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// FNV-1a of raw bytes; used as the inputs hash of report records.
std::uint64_t fnv1a(const std::string& bytes);

struct RunConfig {
  std::complex<double> tau{0.0, 1.0};
  std::vector<MarkedPoint> marked;
  int resolution = 32;
  GradingSpec grading{4, 1e-3};
  int truncation = 16;

  Geometry geometry = Geometry::Minkowski;
  Complex q{0.0, 0.0};
  std::vector<double> h_grid;
  std::vector<double> k_grid;
  double flow_time = 0.0;
  std::vector<double> t_grid;
  bool dump_leaves = false;

  SolverOptions solver;
  std::string output_dir = "out";

  MarkedSurface build_surface() const {
    return build_torus_mesh(tau, marked, grading, resolution);
  }
};

RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// Mesh dump: vertices, faces and per-vertex field blocks, plus KEY metadata
/// lines; floats at 17 significant digits so reload is exact.
std::string mesh_dump(const MarkedSurface& surface,
                      const std::vector<std::pair<std::string, Eigen::VectorXd>>& fields,
                      const std::map<std::string, std::string>& keys = {});

struct MeshDumpData {
  MarkedSurface surface;
  std::vector<std::pair<std::string, Eigen::VectorXd>> fields;
  std::map<std::string, std::string> keys;

  const Eigen::VectorXd& field(const std::string& name) const;
};

MeshDumpData read_mesh_dump(const std::string& text);

/// Embedding dump for the CLI round trip: the mesh plus the uniformizing and
/// CMC conformal factors and the (geometry, H, q) header keys.
std::string dump_embedding(const EmbeddingData& data, const Eigen::VectorXd& uniformizing);
EmbeddingData embedding_from_dump(const MeshDumpData& dump, int truncation);

std::string solver_log_csv(const ConformalSolution& sol);

} // namespace cmcfol
