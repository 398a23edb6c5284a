#include "pevs/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pevs {

namespace {

constexpr double kPi = std::numbers::pi;

void check_range(double v, double lo, double hi, const std::string& what) {
  if (!(v >= lo - 1e-9 && v <= hi + 1e-9))
    throw ParameterOutOfRange(what + ": parameter " + std::to_string(v) + " outside [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

void check_dim(const ParameterPoint& mu, std::size_t d, const std::string& what) {
  if (mu.size() != d) throw DimensionMismatch(what + ": parameter dimension mismatch");
  for (double c : mu)
    if (!std::isfinite(c)) throw ParameterOutOfRange(what + ": non-finite parameter");
}

// 1D interior-node matrices for P1 elements on a uniform grid.
struct Tridiag {
  Vector diag, off;  // off[i] couples node i and i+1
};

Tridiag stiffness_1d(std::size_t m, double h) {
  Tridiag t{Vector(m, 2.0 / h), Vector(m > 0 ? m - 1 : 0, -1.0 / h)};
  return t;
}

Tridiag mass_1d(std::size_t m, double h) {
  Tridiag t{Vector(m, 4.0 * h / 6.0), Vector(m > 0 ? m - 1 : 0, h / 6.0)};
  return t;
}

// G(i,j) = integral of phi_j' phi_i; skew tridiagonal for interior hats.
DenseMatrix gradmass_1d(std::size_t m) {
  DenseMatrix g(m, m);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    g(i, i + 1) = 0.5;
    g(i + 1, i) = -0.5;
  }
  return g;
}

DenseMatrix to_dense(const Tridiag& t) {
  const std::size_t m = t.diag.size();
  DenseMatrix d(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    d(i, i) = t.diag[i];
    if (i + 1 < m) {
      d(i, i + 1) = t.off[i];
      d(i + 1, i) = t.off[i];
    }
  }
  return d;
}

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          k(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
    }
  return k;
}

void axpy_matrix(DenseMatrix& y, double alpha, const DenseMatrix& x) {
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += alpha * x(i, j);
}

// Tensor-product mass over the 2D mesh.
DenseMatrix tensor_mass(const MeshDescriptor& mesh) {
  const std::size_t m = mesh.interior_per_dim();
  return kron(to_dense(mass_1d(m, mesh.h(0))), to_dense(mass_1d(m, mesh.h(1))));
}

// Stiffness for -div(A grad u) with constant A = [[cxx, cxy], [cxy, cyy]].
DenseMatrix anisotropic_stiffness(const MeshDescriptor& mesh, double cxx, double cyy,
                                  double cxy) {
  const std::size_t m = mesh.interior_per_dim();
  const DenseMatrix kx = to_dense(stiffness_1d(m, mesh.h(0)));
  const DenseMatrix ky = to_dense(stiffness_1d(m, mesh.h(1)));
  const DenseMatrix mx = to_dense(mass_1d(m, mesh.h(0)));
  const DenseMatrix my = to_dense(mass_1d(m, mesh.h(1)));
  DenseMatrix k = kron(kx, my);
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (std::size_t j = 0; j < k.cols(); ++j) k(i, j) = cxx * k(i, j);
  axpy_matrix(k, cyy, kron(mx, ky));
  if (cxy != 0.0) {
    // Cross terms c (u_x v_y + u_y v_x); G is skew so the sum is -2c (G kron G).
    const DenseMatrix g = gradmass_1d(m);
    axpy_matrix(k, -2.0 * cxy, kron(g, g));
  }
  return k;
}

}  // namespace

std::string problem_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Crossing: return "crossing";
    case ProblemKind::Oscillator: return "oscillator";
    case ProblemKind::NonAffine: return "nonaffine";
    case ProblemKind::Nonlinear1D: return "nonlinear1d";
    case ProblemKind::TwoParam: return "twoparam";
  }
  throw Error("problem_name: bad kind");
}

ProblemKind problem_from_name(const std::string& name) {
  if (name == "crossing") return ProblemKind::Crossing;
  if (name == "oscillator") return ProblemKind::Oscillator;
  if (name == "nonaffine") return ProblemKind::NonAffine;
  if (name == "nonlinear1d") return ProblemKind::Nonlinear1D;
  if (name == "twoparam") return ProblemKind::TwoParam;
  throw ConfigError("unknown problem kind '" + name + "'");
}

std::size_t problem_dim(ProblemKind kind) {
  return kind == ProblemKind::TwoParam ? 2 : 1;
}

bool ParameterBox::contains(const ParameterPoint& mu) const {
  if (mu.size() != lo.size()) return false;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (!(mu[i] >= lo[i] - 1e-9 && mu[i] <= hi[i] + 1e-9)) return false;
  return true;
}

ParameterBox parameter_space(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Crossing: return {{-0.9}, {0.9}};
    case ProblemKind::Oscillator: return {{1.0}, {9.0}};
    case ProblemKind::NonAffine: return {{1.0}, {8.0}};
    case ProblemKind::Nonlinear1D: return {{1.0}, {9.0}};
    case ProblemKind::TwoParam: return {{0.4, 0.4}, {1.4, 1.4}};
  }
  throw Error("parameter_space: bad kind");
}

std::size_t MeshDescriptor::num_unknowns() const {
  std::size_t n = interior_per_dim();
  return space_dim == 2 ? n * n : n;
}

MeshDescriptor problem_mesh(ProblemKind kind, std::size_t n_per_dim) {
  if (n_per_dim < 4) throw ConfigError("n_per_dim must be >= 4");
  MeshDescriptor mesh;
  mesh.n_per_dim = n_per_dim;
  switch (kind) {
    case ProblemKind::Crossing:
      mesh.lo = {-1.0, -1.0};
      mesh.hi = {1.0, 1.0};
      break;
    case ProblemKind::Oscillator:
      mesh.lo = {-kPi / 2.0, -kPi / 2.0};
      mesh.hi = {kPi / 2.0, kPi / 2.0};
      break;
    case ProblemKind::NonAffine:
    case ProblemKind::TwoParam:
      mesh.lo = {0.0, 0.0};
      mesh.hi = {1.0, 1.0};
      break;
    case ProblemKind::Nonlinear1D:
      mesh.space_dim = 1;
      mesh.lo = {0.0, 0.0};
      mesh.hi = {1.0, 0.0};
      break;
  }
  return mesh;
}

namespace {

DiscreteEVP assemble_crossing_impl(const ParameterPoint& mu, std::size_t n_per_dim) {
  MeshDescriptor mesh = problem_mesh(ProblemKind::Crossing, n_per_dim);
  DiscreteEVP evp;
  evp.grid = mesh;
  evp.parameter = mu;
  evp.stiffness = anisotropic_stiffness(mesh, 1.0, 1.0 + mu[0], 0.0);
  evp.mass = tensor_mass(mesh);
  return evp;
}

DiscreteEVP assemble_oscillator_impl(const ParameterPoint& mu, std::size_t n_per_dim) {
  MeshDescriptor mesh = problem_mesh(ProblemKind::Oscillator, n_per_dim);
  DiscreteEVP evp;
  evp.grid = mesh;
  evp.parameter = mu;
  evp.stiffness = anisotropic_stiffness(mesh, 0.5, 0.5, 0.0);
  evp.mass = tensor_mass(mesh);

  // Potential (mu^2/2)(x^2+y^2) sampled at nodes, lumped via 1D mass row sums.
  const std::size_t m = mesh.interior_per_dim();
  const Tridiag m1x = mass_1d(m, mesh.h(0));
  Vector rowsum(m);
  for (std::size_t i = 0; i < m; ++i) {
    rowsum[i] = m1x.diag[i];
    if (i > 0) rowsum[i] += m1x.off[i - 1];
    if (i + 1 < m) rowsum[i] += m1x.off[i];
  }
  const double mu2 = mu[0] * mu[0];
  for (std::size_t i = 0; i < m; ++i) {
    const double x = mesh.node(0, i);
    for (std::size_t j = 0; j < m; ++j) {
      const double y = mesh.node(1, j);
      evp.stiffness(i * m + j, i * m + j) +=
          0.5 * mu2 * (x * x + y * y) * rowsum[i] * rowsum[j];
    }
  }
  return evp;
}

// Weighted 2D mass with weight w(x, y), 3x3 Gauss per element.
DenseMatrix weighted_mass(const MeshDescriptor& mesh, const auto& weight) {
  const std::size_t m = mesh.interior_per_dim();
  const std::size_t n = mesh.n_per_dim;
  const double hx = mesh.h(0), hy = mesh.h(1);
  DenseMatrix mat(m * m, m * m);

  // 3-point Gauss on [0, 1].
  const double gq = std::sqrt(0.6) / 2.0;
  const double pts[3] = {0.5 - gq, 0.5, 0.5 + gq};
  const double wts[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

  // Global node -> interior unknown index, or npos for boundary nodes.
  auto unknown = [&](std::size_t gx, std::size_t gy) -> std::size_t {
    if (gx == 0 || gx == n || gy == 0 || gy == n) return std::size_t(-1);
    return (gx - 1) * m + (gy - 1);
  };

  for (std::size_t ex = 0; ex < n; ++ex) {
    for (std::size_t ey = 0; ey < n; ++ey) {
      const double x0 = mesh.lo[0] + hx * double(ex);
      const double y0 = mesh.lo[1] + hy * double(ey);
      double local[4][4] = {};
      for (int qx = 0; qx < 3; ++qx) {
        for (int qy = 0; qy < 3; ++qy) {
          const double sx = pts[qx], sy = pts[qy];
          const double w =
              weight(x0 + hx * sx, y0 + hy * sy) * wts[qx] * wts[qy] * hx * hy;
          const double shape[4] = {(1 - sx) * (1 - sy), (1 - sx) * sy, sx * (1 - sy),
                                   sx * sy};
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) local[a][b] += w * shape[a] * shape[b];
        }
      }
      const std::size_t nodes[4] = {unknown(ex, ey), unknown(ex, ey + 1),
                                    unknown(ex + 1, ey), unknown(ex + 1, ey + 1)};
      for (int a = 0; a < 4; ++a) {
        if (nodes[a] == std::size_t(-1)) continue;
        for (int b = 0; b < 4; ++b) {
          if (nodes[b] == std::size_t(-1)) continue;
          mat(nodes[a], nodes[b]) += local[a][b];
        }
      }
    }
  }
  return mat;
}

DiscreteEVP assemble_nonaffine_impl(const ParameterPoint& mu, std::size_t n_per_dim) {
  MeshDescriptor mesh = problem_mesh(ProblemKind::NonAffine, n_per_dim);
  DiscreteEVP evp;
  evp.grid = mesh;
  evp.parameter = mu;
  evp.stiffness = anisotropic_stiffness(mesh, 1.0, 1.0, 0.0);
  const double p = mu[0];
  evp.mass = weighted_mass(
      mesh, [p](double x, double y) { return std::exp(-p * (x * x + y * y)); });
  return evp;
}

void check_twoparam_pd(const ParameterPoint& mu) {
  const double mu1 = mu[0], mu2 = mu[1];
  if (mu2 == 0.0 || 1.0 / (mu1 * mu1 * mu2 * mu2) <= 0.49 / (mu2 * mu2))
    throw NotPositiveDefinite("twoparam: diffusion matrix not positive definite at mu1=" +
                              std::to_string(mu1) + ", mu2=" + std::to_string(mu2));
}

DiscreteEVP assemble_twoparam_impl(const ParameterPoint& mu, std::size_t n_per_dim) {
  check_twoparam_pd(mu);
  MeshDescriptor mesh = problem_mesh(ProblemKind::TwoParam, n_per_dim);
  DiscreteEVP evp;
  evp.grid = mesh;
  evp.parameter = mu;
  const double mu1 = mu[0], mu2 = mu[1];
  evp.stiffness =
      anisotropic_stiffness(mesh, 1.0 / (mu1 * mu1), 1.0 / (mu2 * mu2), 0.7 / mu2);
  evp.mass = tensor_mass(mesh);
  return evp;
}

}  // namespace

DiscreteEVP assemble_crossing(const ParameterPoint& mu, std::size_t n_per_dim) {
  check_dim(mu, 1, "crossing");
  check_range(mu[0], -0.9, 0.9, "crossing");
  return assemble_crossing_impl(mu, n_per_dim);
}

DiscreteEVP assemble_oscillator(const ParameterPoint& mu, std::size_t n_per_dim) {
  check_dim(mu, 1, "oscillator");
  check_range(mu[0], 1.0, 9.0, "oscillator");
  return assemble_oscillator_impl(mu, n_per_dim);
}

DiscreteEVP assemble_nonaffine(const ParameterPoint& mu, std::size_t n_per_dim) {
  check_dim(mu, 1, "nonaffine");
  check_range(mu[0], 1.0, 8.0, "nonaffine");
  return assemble_nonaffine_impl(mu, n_per_dim);
}

DiscreteEVP assemble_twoparam(const ParameterPoint& mu, std::size_t n_per_dim) {
  check_dim(mu, 2, "twoparam");
  return assemble_twoparam_impl(mu, n_per_dim);
}

DiscreteEVP assemble(ProblemKind kind, const ParameterPoint& mu, std::size_t n_per_dim) {
  switch (kind) {
    case ProblemKind::Crossing: return assemble_crossing(mu, n_per_dim);
    case ProblemKind::Oscillator: return assemble_oscillator(mu, n_per_dim);
    case ProblemKind::NonAffine: return assemble_nonaffine(mu, n_per_dim);
    case ProblemKind::TwoParam: return assemble_twoparam(mu, n_per_dim);
    case ProblemKind::Nonlinear1D:
      throw Error("assemble: nonlinear1d requires solve_nonlinear_1d");
  }
  throw Error("assemble: bad kind");
}

DiscreteEVP assemble_unchecked(ProblemKind kind, const ParameterPoint& mu,
                               std::size_t n_per_dim) {
  switch (kind) {
    case ProblemKind::Crossing: return assemble_crossing_impl(mu, n_per_dim);
    case ProblemKind::Oscillator: return assemble_oscillator_impl(mu, n_per_dim);
    case ProblemKind::NonAffine: return assemble_nonaffine_impl(mu, n_per_dim);
    case ProblemKind::TwoParam: return assemble_twoparam_impl(mu, n_per_dim);
    case ProblemKind::Nonlinear1D:
      throw Error("assemble_unchecked: nonlinear1d requires solve_nonlinear_1d");
  }
  throw Error("assemble_unchecked: bad kind");
}

bool mass_is_parametric(ProblemKind kind) { return kind == ProblemKind::NonAffine; }

DenseMatrix assemble_mass(ProblemKind kind, const ParameterPoint& mu, std::size_t n_per_dim) {
  if (kind == ProblemKind::NonAffine) {
    const double p = mu.at(0);
    return weighted_mass(problem_mesh(kind, n_per_dim), [p](double x, double y) {
      return std::exp(-p * (x * x + y * y));
    });
  }
  if (kind == ProblemKind::Nonlinear1D) {
    MeshDescriptor mesh = problem_mesh(kind, n_per_dim);
    return to_dense(mass_1d(mesh.interior_per_dim(), mesh.h(0)));
  }
  return tensor_mass(problem_mesh(kind, n_per_dim));
}

namespace {

// Lumped potential matrix for the weight (x^2 + y^2) / 2 sampled at nodes.
DenseMatrix oscillator_potential(const MeshDescriptor& mesh) {
  const std::size_t m = mesh.interior_per_dim();
  const Tridiag m1x = mass_1d(m, mesh.h(0));
  Vector rowsum(m);
  for (std::size_t i = 0; i < m; ++i) {
    rowsum[i] = m1x.diag[i];
    if (i > 0) rowsum[i] += m1x.off[i - 1];
    if (i + 1 < m) rowsum[i] += m1x.off[i];
  }
  DenseMatrix v(m * m, m * m);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = mesh.node(0, i);
    for (std::size_t j = 0; j < m; ++j) {
      const double y = mesh.node(1, j);
      v(i * m + j, i * m + j) = 0.5 * (x * x + y * y) * rowsum[i] * rowsum[j];
    }
  }
  return v;
}

}  // namespace

bool has_affine_terms(ProblemKind kind) {
  return kind == ProblemKind::Crossing || kind == ProblemKind::Oscillator ||
         kind == ProblemKind::TwoParam;
}

AffineEVP affine_terms(ProblemKind kind, std::size_t n_per_dim) {
  AffineEVP aff;
  aff.kind = kind;
  aff.grid = problem_mesh(kind, n_per_dim);
  aff.mass = tensor_mass(aff.grid);
  switch (kind) {
    case ProblemKind::Crossing:
      // A(mu) = (K_x x M_y) + (1 + mu) (M_x x K_y)
      aff.terms.push_back(anisotropic_stiffness(aff.grid, 1.0, 0.0, 0.0));
      aff.terms.push_back(anisotropic_stiffness(aff.grid, 0.0, 1.0, 0.0));
      break;
    case ProblemKind::Oscillator:
      // A(mu) = (1/2) K + mu^2 V
      aff.terms.push_back(anisotropic_stiffness(aff.grid, 0.5, 0.5, 0.0));
      aff.terms.push_back(oscillator_potential(aff.grid));
      break;
    case ProblemKind::TwoParam:
      // A(mu) = (1/mu1^2) K_xx + (1/mu2^2) K_yy + (0.7/mu2) K_xy
      aff.terms.push_back(anisotropic_stiffness(aff.grid, 1.0, 0.0, 0.0));
      aff.terms.push_back(anisotropic_stiffness(aff.grid, 0.0, 1.0, 0.0));
      aff.terms.push_back(anisotropic_stiffness(aff.grid, 0.0, 0.0, 1.0));
      break;
    default:
      throw Error("affine_terms: " + problem_name(kind) +
                  " has no parameter-separable operator");
  }
  return aff;
}

Vector affine_coefficients(ProblemKind kind, const ParameterPoint& mu) {
  switch (kind) {
    case ProblemKind::Crossing:
      check_dim(mu, 1, "crossing");
      check_range(mu[0], -0.9, 0.9, "crossing");
      return {1.0, 1.0 + mu[0]};
    case ProblemKind::Oscillator:
      check_dim(mu, 1, "oscillator");
      check_range(mu[0], 1.0, 9.0, "oscillator");
      return {1.0, mu[0] * mu[0]};
    case ProblemKind::TwoParam:
      check_dim(mu, 2, "twoparam");
      check_twoparam_pd(mu);
      return {1.0 / (mu[0] * mu[0]), 1.0 / (mu[1] * mu[1]), 0.7 / mu[1]};
    default:
      throw Error("affine_coefficients: " + problem_name(kind) +
                  " has no parameter-separable operator");
  }
}

Vector affine_coefficient_derivs(ProblemKind kind, const ParameterPoint& mu) {
  switch (kind) {
    case ProblemKind::Crossing:
      check_dim(mu, 1, "crossing");
      return {0.0, 1.0};
    case ProblemKind::Oscillator:
      check_dim(mu, 1, "oscillator");
      return {0.0, 2.0 * mu[0]};
    case ProblemKind::TwoParam:
      check_dim(mu, 2, "twoparam");
      return {-2.0 / (mu[0] * mu[0] * mu[0]), -2.0 / (mu[1] * mu[1] * mu[1]),
              -0.7 / (mu[1] * mu[1])};
    default:
      throw Error("affine_coefficient_derivs: " + problem_name(kind) +
                  " has no parameter-separable operator");
  }
}

std::vector<double> exact_crossing_eigs(const ParameterPoint& mu, std::size_t count) {
  check_dim(mu, 1, "exact_crossing_eigs");
  check_range(mu[0], -0.9, 0.9, "exact_crossing_eigs");
  if (count < 1) throw DimensionMismatch("exact_crossing_eigs: count must be >= 1");
  const double c = 1.0 + mu[0];
  // m is bounded by sqrt of the count-th smallest value; this limit is generous.
  const std::size_t limit = count + 12;
  std::vector<double> vals;
  vals.reserve(limit * limit);
  for (std::size_t m = 1; m <= limit; ++m)
    for (std::size_t n = 1; n <= limit; ++n)
      vals.push_back(kPi * kPi / 4.0 * (double(m * m) + c * double(n * n)));
  std::sort(vals.begin(), vals.end());
  vals.resize(count);
  return vals;
}

namespace {

ScfResult scf_impl(const ParameterPoint& mu, std::size_t n, double tol,
                   std::size_t max_iter) {
  if (!(tol > 0.0)) throw ConfigError("solve_nonlinear_1d: tol must be positive");
  MeshDescriptor mesh = problem_mesh(ProblemKind::Nonlinear1D, n);
  const std::size_t m = mesh.interior_per_dim();
  const double h = mesh.h(0);
  const DenseMatrix k = to_dense(stiffness_1d(m, h));
  const DenseMatrix mass = to_dense(mass_1d(m, h));
  const double mu2 = mu[0] * mu[0];

  auto normalize = [&](Vector& u) {
    double s = std::sqrt(dot(u, matvec(mass, u)));
    if (s == 0.0) throw ConvergenceFailure("solve_nonlinear_1d: zero eigenvector");
    // Canonical sign: largest-magnitude component positive.
    std::size_t imax = 0;
    for (std::size_t i = 1; i < m; ++i)
      if (std::fabs(u[i]) > std::fabs(u[imax])) imax = i;
    if (u[imax] < 0.0) s = -s;
    for (double& v : u) v /= s;
  };

  // Nonlinear term mu^2 |u|^{7/3} u v, assembled as a weighted 1D mass with the
  // current iterate interpolated linearly; 2-point Gauss per element.
  auto nonlinear_mass = [&](const Vector& u) {
    DenseMatrix w(m, m);
    const double g1 = 0.5 - 0.5 / std::sqrt(3.0);
    const double qpts[2] = {g1, 1.0 - g1};
    auto uval = [&](std::size_t node) { return (node == 0 || node == n) ? 0.0 : u[node - 1]; };
    for (std::size_t e = 0; e < n; ++e) {
      const double ul = uval(e), ur = uval(e + 1);
      double local[2][2] = {};
      for (double s : qpts) {
        const double uh = ul * (1.0 - s) + ur * s;
        const double wq = mu2 * std::pow(std::fabs(uh), 7.0 / 3.0) * 0.5 * h;
        const double shape[2] = {1.0 - s, s};
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) local[a][b] += wq * shape[a] * shape[b];
      }
      const std::size_t gi[2] = {e, e + 1};
      for (int a = 0; a < 2; ++a) {
        if (gi[a] == 0 || gi[a] == n) continue;
        for (int b = 0; b < 2; ++b) {
          if (gi[b] == 0 || gi[b] == n) continue;
          w(gi[a] - 1, gi[b] - 1) += local[a][b];
        }
      }
    }
    return w;
  };

  // Start from the linear problem.
  EigResult lin = sym_generalized_eig(k, mass, 1);
  Vector u = lin.eigenvectors.col(0);
  normalize(u);
  double lambda = lin.eigenvalues[0];

  // Mixing 0.15: the plain fixed point oscillates for strong nonlinearity
  // (large mu); 0.15 keeps the iteration contractive over the whole parameter box.
  const double alpha = 0.15;
  (void)lambda;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    DenseMatrix a = k;
    const DenseMatrix w = nonlinear_mass(u);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) a(i, j) += w(i, j);
    EigResult eig = sym_generalized_eig(a, mass, 1);
    Vector v = eig.eigenvectors.col(0);
    normalize(v);
    if (dot(u, matvec(mass, v)) < 0.0)
      for (double& x : v) x = -x;

    // Self-consistency residual of the candidate: (K + W(v)) v - lambda M v
    // with lambda the Rayleigh quotient for v's own potential. A tolerance on
    // consecutive-lambda differences alone can trigger mid-oscillation.
    const DenseMatrix wv = nonlinear_mass(v);
    Vector hv = matvec(k, v);
    const Vector wvv = matvec(wv, v);
    for (std::size_t i = 0; i < m; ++i) hv[i] += wvv[i];
    const double lambda_sc = dot(v, hv);  // v is M-normalized
    const Vector mv = matvec(mass, v);
    double res_norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = hv[i] - lambda_sc * mv[i];
      res_norm += r * r;
    }
    res_norm = std::sqrt(res_norm);
    const double scale = std::fabs(lambda_sc) * norm2(mv);
    if (res_norm <= 100.0 * tol * std::max(scale, 1e-300)) {
      ScfResult res;
      res.eigenvalue = lambda_sc;
      res.eigenvector = v;
      res.iterations = it;
      return res;
    }
    for (std::size_t i = 0; i < m; ++i) u[i] = (1.0 - alpha) * u[i] + alpha * v[i];
    normalize(u);
  }
  throw ConvergenceFailure("solve_nonlinear_1d: no convergence after " +
                           std::to_string(max_iter) + " iterations at mu=" +
                           std::to_string(mu[0]));
}

}  // namespace

ScfResult solve_nonlinear_1d(const ParameterPoint& mu, std::size_t n, double tol,
                             std::size_t max_iter) {
  check_dim(mu, 1, "nonlinear1d");
  check_range(mu[0], 1.0, 9.0, "nonlinear1d");
  return scf_impl(mu, n, tol, max_iter);
}

ScfResult solve_nonlinear_1d_unchecked(const ParameterPoint& mu, std::size_t n, double tol,
                                       std::size_t max_iter) {
  check_dim(mu, 1, "nonlinear1d");
  return scf_impl(mu, n, tol, max_iter);
}

}  // namespace pevs
