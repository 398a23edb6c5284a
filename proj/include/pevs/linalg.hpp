#ifndef PEVS_LINALG_HPP
#define PEVS_LINALG_HPP

#include <cstddef>
#include <utility>

#include "pevs/matrix.hpp"

namespace pevs {

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
class SpdFactor {
 public:
  explicit SpdFactor(DenseMatrix lower) : lower_(std::move(lower)) {}

  std::size_t dim() const { return lower_.rows(); }
  const DenseMatrix& lower() const { return lower_; }

 private:
  DenseMatrix lower_;
};

/// Factor a symmetric positive definite matrix as L*L^T.
/// Throws NotPositiveDefinite on a nonpositive pivot, DimensionMismatch
/// if the input is not square or not symmetric to 1e-12 relative.
SpdFactor cholesky_spd(const DenseMatrix& m);

/// Solve A x = b given the Cholesky factor of A.
Vector solve_spd(const SpdFactor& f, const Vector& b);

struct EigResult {
  Vector eigenvalues;      // ascending, length k
  DenseMatrix eigenvectors;  // n x k, B-orthonormal columns
};

/// k smallest eigenpairs of the symmetric generalized problem A u = lambda B u,
/// B positive definite. Eigenvectors are B-orthonormal.
EigResult sym_generalized_eig(const DenseMatrix& a, const DenseMatrix& b, std::size_t k);

/// Standard-form reduction C = L^{-1} A L^{-T} for symmetric A, given the
/// Cholesky factor of B. Splitting the generalized solve this way lets a
/// parameter sweep reuse the reduction of each affine operator term.
DenseMatrix reduce_to_standard(const SpdFactor& f, const DenseMatrix& a);

/// Maps standard-form eigenvectors back: columns L^{-T} z are B-orthonormal.
DenseMatrix back_transform(const SpdFactor& f, const DenseMatrix& z);

/// k smallest eigenpairs of a symmetric standard problem (B = identity).
EigResult sym_standard_eig(const DenseMatrix& c, std::size_t k);

struct SvdResult {
  DenseMatrix left_vectors;   // m x r, orthonormal columns
  Vector singular_values;     // descending, nonnegative, length r
  DenseMatrix right_vectors;  // n x r
};

/// Thin SVD S = U diag(sigma) V^T with r = min(rows, cols).
SvdResult thin_svd(const DenseMatrix& s);

}  // namespace pevs

#endif
