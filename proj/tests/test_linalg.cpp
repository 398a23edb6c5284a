#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pevs/errors.hpp"
#include "pevs/linalg.hpp"
#include "pevs/matrix.hpp"

using namespace pevs;

namespace {

// Deterministic RNG for test fixtures.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  double next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    return double(z >> 11) * (2.0 / 9007199254740992.0) - 1.0;  // [-1, 1)
  }
};

DenseMatrix random_symmetric(std::size_t n, Rng& rng) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = rng.next();
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

DenseMatrix random_spd(std::size_t n, Rng& rng) {
  DenseMatrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = rng.next();
  DenseMatrix m = matmul(g.transposed(), g);
  for (std::size_t i = 0; i < n; ++i) m(i, i) += double(n);
  return m;
}

// Independent solve oracle: Gaussian elimination with partial pivoting.
Vector elimination_solve(DenseMatrix a, Vector b) {
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::fabs(a(i, k)) > std::fabs(a(piv, k))) piv = i;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
    x[ii] = s / a(ii, ii);
  }
  return x;
}

// Counts eigenvalues of A u = lambda B u strictly below sigma via the inertia
// of A - sigma B (number of negative pivots in an LDL^T sweep). Symmetric
// elimination without pivoting; a near-zero pivot nudges sigma and retries.
std::size_t count_eigs_below(const DenseMatrix& a, const DenseMatrix& b, double sigma) {
  const std::size_t n = a.rows();
  for (int attempt = 0; attempt < 40; ++attempt) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = a(i, j) - sigma * b(i, j);
    std::size_t negatives = 0;
    bool ok = true;
    for (std::size_t k = 0; k < n && ok; ++k) {
      const double pivot = m(k, k);
      if (std::fabs(pivot) < 1e-11) {
        ok = false;
        break;
      }
      if (pivot < 0.0) ++negatives;
      for (std::size_t i = k + 1; i < n; ++i) {
        const double f = m(i, k) / pivot;
        for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
      }
    }
    if (ok) return negatives;
    sigma += 1e-9 * (std::fabs(sigma) + 1.0) * double(attempt + 1);
  }
  FAIL("inertia oracle: could not find a factorizable shift");
  return 0;
}

// k-th smallest generalized eigenvalue (1-based) by bisection on the inertia count.
double bisect_eig(const DenseMatrix& a, const DenseMatrix& b, std::size_t k) {
  double lo = -1.0, hi = 1.0;
  while (count_eigs_below(a, b, lo) > 0) lo *= 2.0;
  while (count_eigs_below(a, b, hi) < k) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count_eigs_below(a, b, mid) >= k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Cyclic Jacobi eigenvalue iteration; independent spectrum oracle for the SVD.
Vector jacobi_eigenvalues(DenseMatrix m) {
  const std::size_t n = m.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
    if (off < 1e-26) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(m(p, q)) < 1e-300) continue;
        const double theta = 0.5 * std::atan2(2.0 * m(p, q), m(q, q) - m(p, p));
        const double c = std::cos(theta), s = std::sin(theta);
        for (std::size_t i = 0; i < n; ++i) {
          const double mp = m(i, p), mq = m(i, q);
          m(i, p) = c * mp - s * mq;
          m(i, q) = s * mp + c * mq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double mp = m(p, i), mq = m(q, i);
          m(p, i) = c * mp - s * mq;
          m(q, i) = s * mp + c * mq;
        }
      }
  }
  Vector w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = m(i, i);
  std::sort(w.begin(), w.end());
  return w;
}

}  // namespace

TEST_CASE("cholesky factors a known 2x2 SPD matrix") {
  DenseMatrix m(2, 2);
  m(0, 0) = 4.0;
  m(0, 1) = 2.0;
  m(1, 0) = 2.0;
  m(1, 1) = 3.0;
  const SpdFactor f = cholesky_spd(m);
  const DenseMatrix& l = f.lower();
  CHECK(l(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(l(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(l(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(l(0, 1) == 0.0);
}

TEST_CASE("cholesky reconstructs random SPD matrices") {
  Rng rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    const DenseMatrix m = random_spd(6, rng);
    const SpdFactor f = cholesky_spd(m);
    const DenseMatrix& l = f.lower();
    const DenseMatrix llt = matmul(l, l.transposed());
    double dev = 0.0;
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) dev = std::max(dev, std::fabs(llt(i, j) - m(i, j)));
    CHECK(dev < 1e-12 * m.frobenius_norm());
  }
}

TEST_CASE("cholesky rejects indefinite and asymmetric inputs") {
  DenseMatrix indef = DenseMatrix::identity(3);
  indef(2, 2) = -1.0;
  CHECK_THROWS_AS(cholesky_spd(indef), NotPositiveDefinite);

  DenseMatrix asym = DenseMatrix::identity(3);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(cholesky_spd(asym), DimensionMismatch);

  DenseMatrix rect(2, 3);
  CHECK_THROWS_AS(cholesky_spd(rect), DimensionMismatch);
}

TEST_CASE("solve_spd matches an elimination oracle") {
  Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    const DenseMatrix m = random_spd(7, rng);
    Vector b(7);
    for (double& v : b) v = rng.next();
    const Vector x = solve_spd(cholesky_spd(m), b);
    const Vector ref = elimination_solve(m, b);
    for (std::size_t i = 0; i < 7; ++i) CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-11));
  }

  CHECK_THROWS_AS(solve_spd(cholesky_spd(DenseMatrix::identity(3)), Vector(4)),
                  DimensionMismatch);
}

TEST_CASE("generalized eigensolver matches the inertia-bisection oracle") {
  Rng rng(23);
  for (int rep = 0; rep < 4; ++rep) {
    const DenseMatrix a = random_symmetric(6, rng);
    const DenseMatrix b = random_spd(6, rng);
    const EigResult eig = sym_generalized_eig(a, b, 6);
    for (std::size_t k = 0; k < 6; ++k) {
      const double ref = bisect_eig(a, b, k + 1);
      CHECK(eig.eigenvalues[k] == doctest::Approx(ref).epsilon(1e-9));
    }
    // Ascending order, residuals, and B-orthonormality.
    for (std::size_t k = 1; k < 6; ++k) CHECK(eig.eigenvalues[k] >= eig.eigenvalues[k - 1]);
    for (std::size_t k = 0; k < 6; ++k) {
      const Vector u = eig.eigenvectors.col(k);
      Vector r = matvec(a, u);
      const Vector bu = matvec(b, u);
      for (std::size_t i = 0; i < 6; ++i) r[i] -= eig.eigenvalues[k] * bu[i];
      CHECK(norm2(r) < 1e-9 * (std::fabs(eig.eigenvalues[k]) + 1.0));
      CHECK(dot(u, bu) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("generalized eigensolver validates arguments") {
  Rng rng(3);
  const DenseMatrix a = random_symmetric(4, rng);
  const DenseMatrix b = random_spd(4, rng);
  CHECK_THROWS_AS(sym_generalized_eig(a, b, 0), DimensionMismatch);
  CHECK_THROWS_AS(sym_generalized_eig(a, b, 5), DimensionMismatch);
  CHECK_THROWS_AS(sym_generalized_eig(a, random_spd(5, rng), 2), DimensionMismatch);

  DenseMatrix bad = DenseMatrix::identity(4);
  bad(3, 3) = -2.0;
  CHECK_THROWS_AS(sym_generalized_eig(a, bad, 2), NotPositiveDefinite);
}

TEST_CASE("standard-form reduction reproduces the generalized spectrum") {
  Rng rng(31);
  const std::size_t n = 8;
  const DenseMatrix a = random_symmetric(n, rng);
  const DenseMatrix b = random_spd(n, rng);
  const SpdFactor f = cholesky_spd(b);
  const DenseMatrix c = reduce_to_standard(f, a);

  const EigResult direct = sym_generalized_eig(a, b, n);
  EigResult std_eig = sym_standard_eig(c, n);
  for (std::size_t k = 0; k < n; ++k)
    CHECK(std_eig.eigenvalues[k] == doctest::Approx(direct.eigenvalues[k]).epsilon(1e-11));

  const DenseMatrix u = back_transform(f, std_eig.eigenvectors);
  for (std::size_t k = 0; k < n; ++k) {
    const Vector uk = u.col(k);
    Vector r = matvec(a, uk);
    const Vector bu = matvec(b, uk);
    for (std::size_t i = 0; i < n; ++i) r[i] -= std_eig.eigenvalues[k] * bu[i];
    CHECK(norm2(r) < 1e-10 * (std::fabs(std_eig.eigenvalues[k]) + 1.0));
    CHECK(dot(uk, bu) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("thin SVD matches a Jacobi Gram-spectrum oracle") {
  Rng rng(47);
  const std::size_t m = 9, n = 5;
  DenseMatrix s(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = rng.next();

  const SvdResult svd = thin_svd(s);
  REQUIRE(svd.singular_values.size() == n);
  for (std::size_t k = 1; k < n; ++k)
    CHECK(svd.singular_values[k] <= svd.singular_values[k - 1]);

  Vector gram_eigs = jacobi_eigenvalues(matmul(s.transposed(), s));  // ascending
  for (std::size_t k = 0; k < n; ++k) {
    const double sigma = svd.singular_values[k];
    CHECK(sigma * sigma == doctest::Approx(gram_eigs[n - 1 - k]).epsilon(1e-10));
  }

  // Orthonormal factors and exact reconstruction at full rank.
  const DenseMatrix utu = matmul(svd.left_vectors.transposed(), svd.left_vectors);
  const DenseMatrix vtv = matmul(svd.right_vectors.transposed(), svd.right_vectors);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double id = (i == j) ? 1.0 : 0.0;
      CHECK(std::fabs(utu(i, j) - id) < 1e-12);
      CHECK(std::fabs(vtv(i, j) - id) < 1e-12);
    }
  DenseMatrix usv(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        acc += svd.left_vectors(i, k) * svd.singular_values[k] * svd.right_vectors(j, k);
      usv(i, j) = acc;
    }
  double dev = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) dev = std::max(dev, std::fabs(usv(i, j) - s(i, j)));
  CHECK(dev < 1e-12 * s.frobenius_norm());

  CHECK_THROWS_AS(thin_svd(DenseMatrix()), DimensionMismatch);
}
