#ifndef PEVS_OFFLINE_HPP
#define PEVS_OFFLINE_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pevs/problems.hpp"

namespace pevs {

/// Per-parameter eigenpairs for the m_s lowest eigen-indices, sign-aligned.
struct SnapshotSet {
  ProblemKind problem = ProblemKind::Crossing;
  MeshDescriptor mesh;
  std::vector<ParameterPoint> parameters;  // length n_s
  std::vector<Vector> eigenvalues;         // [j][i], j in 0..m_s-1, i in 0..n_s-1
  std::vector<DenseMatrix> eigenvectors;   // [j]: n_h x n_s, B-normalized columns

  std::size_t num_parameters() const { return parameters.size(); }
  std::size_t num_indices() const { return eigenvalues.size(); }
};

struct TrainTestSplit {
  std::vector<ParameterPoint> training;
  std::vector<ParameterPoint> test;
};

/// Options for snapshot generation; n for the 1D nonlinear solve reuses n_per_dim.
struct SnapshotOptions {
  double scf_tol = 1e-10;
  std::size_t scf_max_iter = 200;
};

SnapshotSet generate_snapshots(ProblemKind kind, const std::vector<ParameterPoint>& grid,
                               std::size_t m_s, std::size_t n_per_dim,
                               const SnapshotOptions& opts = {});

/// Fixes the eigenvector gauge: the first column of each index gets its
/// largest-magnitude component positive, and consecutive columns keep a
/// nonnegative B-inner product in grid traversal order.
SnapshotSet align_signs(SnapshotSet raw);

/// The training/test parameter grids used by each model problem.
TrainTestSplit default_split(ProblemKind kind, std::uint64_t seed = 42);

/// MATLAB-style inclusive range start:step:end (endpoint kept within 1e-12).
std::vector<double> range_grid(double start, double step, double end);

}  // namespace pevs

#endif
