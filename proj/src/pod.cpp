#include "pevs/pod.hpp"

#include <algorithm>

namespace pevs {

PODBasis pod_basis(const DenseMatrix& snapshots, double tol, std::size_t fixed_dim) {
  if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("pod_basis: tol must be in (0, 1)");
  SvdResult svd = thin_svd(snapshots);
  if (svd.singular_values.empty() || svd.singular_values[0] == 0.0)
    throw DegenerateSnapshot("pod_basis: snapshot matrix is zero");

  const std::size_t r = svd.singular_values.size();
  std::size_t keep;
  if (fixed_dim > 0) {
    keep = std::min(fixed_dim, r);
  } else {
    keep = r;
    for (std::size_t n = 1; n < r; ++n) {
      if (svd.singular_values[n] <= tol * svd.singular_values[0]) {
        keep = n;
        break;
      }
    }
  }
  keep = std::min(keep, snapshots.cols());

  PODBasis basis;
  basis.truncation_tol = tol;
  basis.singular_values = svd.singular_values;
  basis.basis = DenseMatrix(snapshots.rows(), keep);
  for (std::size_t j = 0; j < keep; ++j)
    for (std::size_t i = 0; i < snapshots.rows(); ++i)
      basis.basis(i, j) = svd.left_vectors(i, j);
  return basis;
}

Vector reduce(const PODBasis& basis, const Vector& u) {
  if (u.size() != basis.full_dim()) throw DimensionMismatch("reduce: vector size mismatch");
  Vector c(basis.reduced_dim(), 0.0);
  for (std::size_t j = 0; j < basis.reduced_dim(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < basis.full_dim(); ++i) s += basis.basis(i, j) * u[i];
    c[j] = s;
  }
  return c;
}

Vector reconstruct(const PODBasis& basis, const Vector& c) {
  if (c.size() != basis.reduced_dim())
    throw DimensionMismatch("reconstruct: coefficient size mismatch");
  Vector u(basis.full_dim(), 0.0);
  for (std::size_t j = 0; j < basis.reduced_dim(); ++j)
    for (std::size_t i = 0; i < basis.full_dim(); ++i) u[i] += basis.basis(i, j) * c[j];
  return u;
}

}  // namespace pevs
