#include "pevs/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace pevs {

namespace {

void require_symmetric(const DenseMatrix& m, const char* who) {
  if (m.rows() != m.cols()) throw DimensionMismatch(std::string(who) + ": matrix not square");
  double scale = 0.0, dev = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      scale = std::max(scale, std::max(std::fabs(m(i, j)), std::fabs(m(j, i))));
      dev = std::max(dev, std::fabs(m(i, j) - m(j, i)));
    }
  if (dev > 1e-12 * std::max(scale, 1.0))
    throw DimensionMismatch(std::string(who) + ": matrix not symmetric");
}

}  // namespace

SpdFactor cholesky_spd(const DenseMatrix& m) {
  require_symmetric(m, "cholesky_spd");
  const lapack_int n = static_cast<lapack_int>(m.rows());
  // Row-major symmetric input equals its column-major transpose, so the
  // storage can be handed to LAPACK directly.
  DenseMatrix work = m;
  lapack_int info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', n, work.data(), n);
  if (info > 0)
    throw NotPositiveDefinite("cholesky_spd: pivot " + std::to_string(info) + " not positive");
  if (info < 0) throw Error("cholesky_spd: bad argument to dpotrf");
  // dpotrf('L') on column-major storage leaves L in what row-major indexing
  // sees as the upper triangle; transpose into a clean lower factor.
  DenseMatrix lower(m.rows(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j) lower(i, j) = work(j, i);
  return SpdFactor(std::move(lower));
}

Vector solve_spd(const SpdFactor& f, const Vector& b) {
  const std::size_t n = f.dim();
  if (b.size() != n) throw DimensionMismatch("solve_spd: rhs size mismatch");
  const DenseMatrix& l = f.lower();
  Vector x = b;
  // Forward substitution L y = b.
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= l(i, j) * x[j];
    x[i] = s / l(i, i);
  }
  // Back substitution L^T x = y.
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= l(j, ii) * x[j];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

EigResult sym_generalized_eig(const DenseMatrix& a, const DenseMatrix& b, std::size_t k) {
  require_symmetric(a, "sym_generalized_eig(A)");
  require_symmetric(b, "sym_generalized_eig(B)");
  const std::size_t n = a.rows();
  if (b.rows() != n) throw DimensionMismatch("sym_generalized_eig: A/B size mismatch");
  if (k < 1 || k > n) throw DimensionMismatch("sym_generalized_eig: k out of range");

  const lapack_int ni = static_cast<lapack_int>(n);
  DenseMatrix aw = a, bw = b;
  Vector w(n);
  DenseMatrix z(n, k);  // column-major n x k below
  std::vector<double> zbuf(n * k);
  std::vector<lapack_int> ifail(n);
  lapack_int m_found = 0;
  lapack_int info = LAPACKE_dsygvx(
      LAPACK_COL_MAJOR, 1, 'V', 'I', 'L', ni, aw.data(), ni, bw.data(), ni,
      0.0, 0.0, 1, static_cast<lapack_int>(k), 2.0 * LAPACKE_dlamch('S'),
      &m_found, w.data(), zbuf.data(), ni, ifail.data());
  if (info > 0 && info <= ni)
    throw ConvergenceFailure("sym_generalized_eig: " + std::to_string(info) +
                             " eigenvectors failed to converge");
  if (info > ni)
    throw NotPositiveDefinite("sym_generalized_eig: B is not positive definite");
  if (info < 0) throw Error("sym_generalized_eig: bad argument to dsygvx");
  if (static_cast<std::size_t>(m_found) < k)
    throw ConvergenceFailure("sym_generalized_eig: found fewer eigenpairs than requested");

  EigResult res;
  res.eigenvalues.assign(w.begin(), w.begin() + k);
  res.eigenvectors = DenseMatrix(n, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) res.eigenvectors(i, j) = zbuf[j * n + i];
  return res;
}

extern "C" void dtrsm_(const char* side, const char* uplo, const char* transa,
                       const char* diag, const lapack_int* m, const lapack_int* n,
                       const double* alpha, const double* a, const lapack_int* lda,
                       double* b, const lapack_int* ldb);

DenseMatrix reduce_to_standard(const SpdFactor& f, const DenseMatrix& a) {
  require_symmetric(a, "reduce_to_standard");
  const std::size_t n = f.dim();
  if (a.rows() != n) throw DimensionMismatch("reduce_to_standard: size mismatch");
  const lapack_int ni = static_cast<lapack_int>(n);
  const double one = 1.0;
  // The row-major lower factor's buffer reads as the upper factor U = L^T in
  // column-major terms, so C = U^{-T} A U^{-1}.
  const double* u = f.lower().data();
  DenseMatrix c(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c(i, j) = 0.5 * (a(i, j) + a(j, i));
  dtrsm_("L", "U", "T", "N", &ni, &ni, &one, u, &ni, c.data(), &ni);
  dtrsm_("R", "U", "N", "N", &ni, &ni, &one, u, &ni, c.data(), &ni);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (c(i, j) + c(j, i));
      c(i, j) = avg;
      c(j, i) = avg;
    }
  return c;
}

DenseMatrix back_transform(const SpdFactor& f, const DenseMatrix& z) {
  const std::size_t n = f.dim(), k = z.cols();
  if (z.rows() != n) throw DimensionMismatch("back_transform: size mismatch");
  const lapack_int ni = static_cast<lapack_int>(n);
  const lapack_int ki = static_cast<lapack_int>(k);
  const double one = 1.0;
  std::vector<double> zb(n * k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) zb[j * n + i] = z(i, j);
  dtrsm_("L", "U", "N", "N", &ni, &ki, &one, f.lower().data(), &ni, zb.data(), &ni);
  DenseMatrix out(n, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) out(i, j) = zb[j * n + i];
  return out;
}

EigResult sym_standard_eig(const DenseMatrix& c, std::size_t k) {
  require_symmetric(c, "sym_standard_eig");
  const std::size_t n = c.rows();
  if (k < 1 || k > n) throw DimensionMismatch("sym_standard_eig: k out of range");

  const lapack_int ni = static_cast<lapack_int>(n);
  DenseMatrix cw = c;
  Vector w(n);
  std::vector<double> zbuf(n * k);
  std::vector<lapack_int> ifail(n);
  lapack_int m_found = 0;
  lapack_int info = LAPACKE_dsyevx(
      LAPACK_COL_MAJOR, 'V', 'I', 'L', ni, cw.data(), ni, 0.0, 0.0, 1,
      static_cast<lapack_int>(k), 2.0 * LAPACKE_dlamch('S'), &m_found, w.data(),
      zbuf.data(), ni, ifail.data());
  if (info > 0)
    throw ConvergenceFailure("sym_standard_eig: " + std::to_string(info) +
                             " eigenvectors failed to converge");
  if (info < 0) throw Error("sym_standard_eig: bad argument to dsyevx");
  if (static_cast<std::size_t>(m_found) < k)
    throw ConvergenceFailure("sym_standard_eig: found fewer eigenpairs than requested");

  EigResult res;
  res.eigenvalues.assign(w.begin(), w.begin() + k);
  res.eigenvectors = DenseMatrix(n, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) res.eigenvectors(i, j) = zbuf[j * n + i];
  return res;
}

SvdResult thin_svd(const DenseMatrix& s) {
  if (s.empty()) throw DimensionMismatch("thin_svd: empty matrix");
  const std::size_t m = s.rows(), n = s.cols(), r = std::min(m, n);
  // dgesdd wants column-major; feed the transpose and swap U/V afterwards.
  DenseMatrix st = s.transposed();  // row-major n x m == column-major m x n
  Vector sigma(r);
  std::vector<double> u(m * r), vt(r * n);
  lapack_int info = LAPACKE_dgesdd(
      LAPACK_COL_MAJOR, 'S', static_cast<lapack_int>(m), static_cast<lapack_int>(n),
      st.data(), static_cast<lapack_int>(m), sigma.data(), u.data(),
      static_cast<lapack_int>(m), vt.data(), static_cast<lapack_int>(r));
  if (info > 0) throw ConvergenceFailure("thin_svd: dgesdd did not converge");
  if (info < 0) throw Error("thin_svd: bad argument to dgesdd");

  SvdResult res;
  res.singular_values = std::move(sigma);
  res.left_vectors = DenseMatrix(m, r);
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i < m; ++i) res.left_vectors(i, j) = u[j * m + i];
  res.right_vectors = DenseMatrix(n, r);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < r; ++i) res.right_vectors(j, i) = vt[j * r + i];
  return res;
}

}  // namespace pevs
