#ifndef PEVS_POD_HPP
#define PEVS_POD_HPP

#include <cstddef>

#include "pevs/linalg.hpp"
#include "pevs/matrix.hpp"

namespace pevs {

/// Truncated POD basis for one eigen-index's snapshot matrix.
struct PODBasis {
  DenseMatrix basis;        // n_h x N_j, orthonormal columns
  Vector singular_values;   // full descending list from the SVD
  double truncation_tol = 0.0;
  std::size_t eigen_index = 0;

  std::size_t reduced_dim() const { return basis.cols(); }
  std::size_t full_dim() const { return basis.rows(); }
};

/// Dominant left singular vectors of S; keeps the smallest N with
/// sigma_{N+1} <= tol * sigma_1 (at least one). `fixed_dim` overrides the
/// tolerance with an explicit reduced dimension when nonzero.
PODBasis pod_basis(const DenseMatrix& snapshots, double tol, std::size_t fixed_dim = 0);

/// Reduced coefficients V^T u.
Vector reduce(const PODBasis& basis, const Vector& u);

/// Reconstruction V c.
Vector reconstruct(const PODBasis& basis, const Vector& c);

}  // namespace pevs

#endif
