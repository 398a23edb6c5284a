#include "pevs/offline.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace pevs {

namespace {

std::string point_str(const ParameterPoint& mu) {
  std::string s = "(";
  for (std::size_t i = 0; i < mu.size(); ++i)
    s += (i ? ", " : "") + std::to_string(mu[i]);
  return s + ")";
}

// Deterministic uniforms in [0, 1) from a splitmix-style stream; independent of
// the standard library's unspecified distribution implementations.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : state_(seed) {}
  double next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return double(z >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// A numerically repeated eigenvalue makes the solver's basis for the cluster
// arbitrary. Diagonalizing the parameter-derivative of the operator within
// the cluster (first-order perturbation theory) picks the unique basis the
// neighboring eigenvector branches converge to; it uses only data at the
// current parameter. When the derivative does not split the cluster either,
// the solver's basis is kept.
void resolve_degenerate_clusters(EigResult& eig, const std::vector<DenseMatrix>& terms,
                                 const Vector& dtheta) {
  const std::size_t k = eig.eigenvalues.size();
  const std::size_t n = eig.eigenvectors.rows();
  const double tol = 1e-8;
  std::size_t a = 0;
  while (a < k) {
    std::size_t b = a;
    while (b + 1 < k && std::fabs(eig.eigenvalues[b + 1] - eig.eigenvalues[b]) <=
                            tol * std::max(std::fabs(eig.eigenvalues[b]), 1.0))
      ++b;
    const std::size_t c = b - a + 1;
    if (c >= 2) {
      // S = Z^T (sum_q dtheta_q C_q) Z over the cluster columns.
      DenseMatrix dz(n, c);
      for (std::size_t q = 0; q < terms.size(); ++q) {
        if (dtheta[q] == 0.0) continue;
        const DenseMatrix& t = terms[q];
        for (std::size_t r = 0; r < n; ++r) {
          const double* trow = t.data() + r * n;
          for (std::size_t j = 0; j < c; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += trow[i] * eig.eigenvectors(i, a + j);
            dz(r, j) += dtheta[q] * s;
          }
        }
      }
      DenseMatrix s(c, c);
      for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j) {
          double v = 0.0;
          for (std::size_t r = 0; r < n; ++r) v += eig.eigenvectors(r, a + i) * dz(r, j);
          s(i, j) = v;
        }
      for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = i + 1; j < c; ++j) {
          const double avg = 0.5 * (s(i, j) + s(j, i));
          s(i, j) = avg;
          s(j, i) = avg;
        }
      double trace = 0.0;
      for (std::size_t i = 0; i < c; ++i) trace += s(i, i);
      DenseMatrix dev = s;
      for (std::size_t i = 0; i < c; ++i) dev(i, i) -= trace / double(c);
      double dev_norm = 0.0, s_norm = 0.0;
      for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j) {
          dev_norm = std::max(dev_norm, std::fabs(dev(i, j)));
          s_norm = std::max(s_norm, std::fabs(s(i, j)));
        }
      if (dev_norm > 1e-8 * std::max(s_norm, 1.0)) {
        EigResult rot = sym_standard_eig(s, c);
        DenseMatrix znew(n, c);
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t j = 0; j < c; ++j) {
            double v = 0.0;
            for (std::size_t i = 0; i < c; ++i)
              v += eig.eigenvectors(r, a + i) * rot.eigenvectors(i, j);
            znew(r, j) = v;
          }
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t j = 0; j < c; ++j) eig.eigenvectors(r, a + j) = znew(r, j);
      }
    }
    a = b + 1;
  }
}

}  // namespace

std::vector<double> range_grid(double start, double step, double end) {
  if (!(step > 0.0)) throw ConfigError("range_grid: step must be positive");
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double v = start + step * double(i);
    if (v > end + 1e-12) break;
    grid.push_back(v);
  }
  if (grid.empty()) throw ConfigError("range_grid: empty range");
  return grid;
}

SnapshotSet generate_snapshots(ProblemKind kind, const std::vector<ParameterPoint>& grid,
                               std::size_t m_s, std::size_t n_per_dim,
                               const SnapshotOptions& opts) {
  if (grid.empty()) throw ConfigError("generate_snapshots: empty parameter grid");
  if (m_s < 1) throw ConfigError("generate_snapshots: m_s must be >= 1");
  if (kind == ProblemKind::Nonlinear1D && m_s != 1)
    throw ConfigError("generate_snapshots: nonlinear1d supports m_s = 1 only");
  const ParameterBox box = parameter_space(kind);
  for (const auto& mu : grid)
    if (!box.contains(mu))
      throw ParameterOutOfRange("generate_snapshots: parameter " + point_str(mu) +
                                " outside the admissible set");

  SnapshotSet snaps;
  snaps.problem = kind;
  snaps.mesh = problem_mesh(kind, n_per_dim);
  snaps.parameters = grid;
  const std::size_t n_h = snaps.mesh.num_unknowns();
  const std::size_t n_s = grid.size();
  snaps.eigenvalues.assign(m_s, Vector(n_s, 0.0));
  snaps.eigenvectors.assign(m_s, DenseMatrix(n_h, n_s));

  // For parameter-separable operators, reduce each affine term to standard
  // form once; per parameter only the standard symmetric solve remains.
  struct ReducedTerms {
    SpdFactor factor;
    std::vector<DenseMatrix> terms;
  };
  std::unique_ptr<ReducedTerms> reduced;
  if (has_affine_terms(kind)) {
    AffineEVP aff = affine_terms(kind, n_per_dim);
    SpdFactor factor = cholesky_spd(aff.mass);
    std::vector<DenseMatrix> terms;
    terms.reserve(aff.terms.size());
    for (const DenseMatrix& t : aff.terms) terms.push_back(reduce_to_standard(factor, t));
    reduced.reset(new ReducedTerms{std::move(factor), std::move(terms)});
  }

  for (std::size_t i = 0; i < n_s; ++i) {
    try {
      if (kind == ProblemKind::Nonlinear1D) {
        ScfResult r = solve_nonlinear_1d(grid[i], n_per_dim, opts.scf_tol, opts.scf_max_iter);
        snaps.eigenvalues[0][i] = r.eigenvalue;
        snaps.eigenvectors[0].set_col(i, r.eigenvector);
      } else if (reduced) {
        const Vector theta = affine_coefficients(kind, grid[i]);
        DenseMatrix c(n_h, n_h);
        for (std::size_t q = 0; q < theta.size(); ++q) {
          const DenseMatrix& t = reduced->terms[q];
          for (std::size_t r = 0; r < n_h; ++r)
            for (std::size_t s = 0; s < n_h; ++s) c(r, s) += theta[q] * t(r, s);
        }
        // Two spare eigenpairs so a cluster straddling index m_s can still be
        // resolved as a whole before discarding the extras.
        const std::size_t k_solve = std::min(n_h, m_s + 2);
        EigResult eig = sym_standard_eig(c, k_solve);
        resolve_degenerate_clusters(eig, reduced->terms,
                                    affine_coefficient_derivs(kind, grid[i]));
        eig.eigenvalues.resize(m_s);
        DenseMatrix kept(n_h, m_s);
        for (std::size_t j = 0; j < m_s; ++j)
          for (std::size_t r = 0; r < n_h; ++r) kept(r, j) = eig.eigenvectors(r, j);
        eig.eigenvectors = std::move(kept);
        eig.eigenvectors = back_transform(reduced->factor, eig.eigenvectors);
        for (std::size_t j = 0; j < m_s; ++j) {
          snaps.eigenvalues[j][i] = eig.eigenvalues[j];
          snaps.eigenvectors[j].set_col(i, eig.eigenvectors.col(j));
        }
      } else {
        DiscreteEVP evp = assemble(kind, grid[i], n_per_dim);
        EigResult eig = sym_generalized_eig(evp.stiffness, evp.mass, m_s);
        for (std::size_t j = 0; j < m_s; ++j) {
          snaps.eigenvalues[j][i] = eig.eigenvalues[j];
          snaps.eigenvectors[j].set_col(i, eig.eigenvectors.col(j));
        }
      }
    } catch (const Error& e) {
      throw ConvergenceFailure("generate_snapshots: failure at parameter " +
                               point_str(grid[i]) + ": " + e.what());
    }
  }
  return align_signs(std::move(snaps));
}

SnapshotSet align_signs(SnapshotSet raw) {
  const std::size_t n_s = raw.num_parameters();
  if (n_s == 0) return raw;
  const std::size_t n_h = raw.mesh.num_unknowns();

  DenseMatrix mass_cache;
  const bool parametric = mass_is_parametric(raw.problem);
  if (!parametric)
    mass_cache = assemble_mass(raw.problem, raw.parameters[0], raw.mesh.n_per_dim);

  for (std::size_t j = 0; j < raw.num_indices(); ++j) {
    DenseMatrix& u = raw.eigenvectors[j];
    // Gauge of the first column: largest-magnitude component positive.
    std::size_t imax = 0;
    for (std::size_t i = 1; i < n_h; ++i)
      if (std::fabs(u(i, 0)) > std::fabs(u(imax, 0))) imax = i;
    if (u(imax, 0) < 0.0)
      for (std::size_t i = 0; i < n_h; ++i) u(i, 0) = -u(i, 0);

    for (std::size_t c = 0; c + 1 < n_s; ++c) {
      const DenseMatrix& b =
          parametric
              ? (mass_cache = assemble_mass(raw.problem, raw.parameters[c + 1],
                                            raw.mesh.n_per_dim))
              : mass_cache;
      double ip = 0.0;
      for (std::size_t r = 0; r < n_h; ++r) {
        double bv = 0.0;
        for (std::size_t q = 0; q < n_h; ++q) bv += b(r, q) * u(q, c + 1);
        ip += u(r, c) * bv;
      }
      if (ip < 0.0)
        for (std::size_t r = 0; r < n_h; ++r) u(r, c + 1) = -u(r, c + 1);
    }
  }
  return raw;
}

TrainTestSplit default_split(ProblemKind kind, std::uint64_t seed) {
  TrainTestSplit split;
  auto lift = [](const std::vector<double>& g) {
    std::vector<ParameterPoint> pts;
    pts.reserve(g.size());
    for (double v : g) pts.push_back({v});
    return pts;
  };
  switch (kind) {
    case ProblemKind::Crossing:
      split.training = lift(range_grid(-0.9, 0.1, 0.9));
      split.test = lift(range_grid(-0.9, 0.05, 0.9));
      break;
    case ProblemKind::Oscillator:
      split.training = lift(range_grid(1.0, 0.4, 9.0));
      split.test = lift(range_grid(1.0, 0.2, 9.0));
      break;
    case ProblemKind::NonAffine:
      split.training = lift(range_grid(1.0, 0.4, 8.0));
      split.test = lift(range_grid(1.0, 0.2, 8.0));
      break;
    case ProblemKind::Nonlinear1D:
      split.training = lift(range_grid(1.0, 0.4, 9.0));
      split.test = lift(range_grid(1.0, 0.2, 9.0));
      break;
    case ProblemKind::TwoParam: {
      // 8x8 uniform lattice, row-major over (mu1, mu2).
      const std::vector<double> axis = range_grid(0.4, 1.0 / 7.0, 1.4 + 1e-9);
      for (double m1 : axis)
        for (double m2 : axis) split.training.push_back({m1, m2});
      UniformStream rng(seed);
      for (int i = 0; i < 30; ++i) {
        const double m1 = 0.4 + rng.next();
        const double m2 = 0.4 + rng.next();
        split.test.push_back({m1, m2});
      }
      break;
    }
  }
  return split;
}

}  // namespace pevs
