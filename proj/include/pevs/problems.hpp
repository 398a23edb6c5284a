#ifndef PEVS_PROBLEMS_HPP
#define PEVS_PROBLEMS_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "pevs/linalg.hpp"
#include "pevs/matrix.hpp"

namespace pevs {

/// A d-dimensional parameter vector, d in {1, 2}.
using ParameterPoint = std::vector<double>;

enum class ProblemKind { Crossing, Oscillator, NonAffine, Nonlinear1D, TwoParam };

std::string problem_name(ProblemKind kind);
ProblemKind problem_from_name(const std::string& name);

/// Parameter dimension of the problem (1 or 2).
std::size_t problem_dim(ProblemKind kind);

/// Admissible parameter box, lo/hi per coordinate.
struct ParameterBox {
  std::vector<double> lo;
  std::vector<double> hi;
  bool contains(const ParameterPoint& mu) const;
};
ParameterBox parameter_space(ProblemKind kind);

/// Uniform tensor grid over a rectangular domain; unknowns are interior nodes.
struct MeshDescriptor {
  std::size_t space_dim = 2;   // spatial dimension of the PDE domain
  std::size_t n_per_dim = 0;   // elements per direction
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};

  std::size_t interior_per_dim() const { return n_per_dim - 1; }
  std::size_t num_unknowns() const;
  double h(std::size_t axis) const { return (hi[axis] - lo[axis]) / double(n_per_dim); }
  /// Coordinate of interior node index along one axis (0-based, excludes boundary).
  double node(std::size_t axis, std::size_t i) const { return lo[axis] + h(axis) * double(i + 1); }
};

struct DiscreteEVP {
  DenseMatrix stiffness;
  DenseMatrix mass;
  MeshDescriptor grid;
  ParameterPoint parameter;
};

MeshDescriptor problem_mesh(ProblemKind kind, std::size_t n_per_dim);

DiscreteEVP assemble_crossing(const ParameterPoint& mu, std::size_t n_per_dim);
DiscreteEVP assemble_oscillator(const ParameterPoint& mu, std::size_t n_per_dim);
DiscreteEVP assemble_nonaffine(const ParameterPoint& mu, std::size_t n_per_dim);
DiscreteEVP assemble_twoparam(const ParameterPoint& mu, std::size_t n_per_dim);

/// Assembles the discrete EVP for any linear problem kind (not Nonlinear1D).
DiscreteEVP assemble(ProblemKind kind, const ParameterPoint& mu, std::size_t n_per_dim);

/// Mass matrix only; cheaper than a full assemble when the stiffness is unused.
DenseMatrix assemble_mass(ProblemKind kind, const ParameterPoint& mu, std::size_t n_per_dim);

/// Parameter-separable operator A(mu) = sum_q theta_q(mu) A_q with a fixed
/// mass matrix. Lets a sweep over many parameters reduce each A_q to standard
/// form once instead of redoing the O(n^3) reduction per parameter.
struct AffineEVP {
  ProblemKind kind = ProblemKind::Crossing;
  MeshDescriptor grid;
  DenseMatrix mass;
  std::vector<DenseMatrix> terms;
};

/// True for the linear problems whose stiffness is affine in functions of mu
/// and whose mass matrix is parameter independent.
bool has_affine_terms(ProblemKind kind);
AffineEVP affine_terms(ProblemKind kind, std::size_t n_per_dim);
/// theta_q(mu) matching affine_terms; validates mu like assemble does.
Vector affine_coefficients(ProblemKind kind, const ParameterPoint& mu);
/// Directional derivative of theta along the diagonal parameter direction;
/// used to resolve degenerate eigenvalue clusters by perturbation theory.
Vector affine_coefficient_derivs(ProblemKind kind, const ParameterPoint& mu);

/// Whether the mass matrix depends on the parameter.
bool mass_is_parametric(ProblemKind kind);

/// The `count` smallest values of (pi^2/4)(m^2 + (1+mu)n^2) over m,n >= 1.
std::vector<double> exact_crossing_eigs(const ParameterPoint& mu, std::size_t count);

struct ScfResult {
  double eigenvalue = 0.0;
  Vector eigenvector;     // M-normalized: u^T M u = 1
  std::size_t iterations = 0;
};

/// Damped self-consistent iteration for the 1D nonlinear problem
/// -u'' + mu^2 |u|^{7/3} u = lambda u on (0,1), u(0)=u(1)=0, (u,u)=1.
ScfResult solve_nonlinear_1d(const ParameterPoint& mu, std::size_t n, double tol = 1e-10,
                             std::size_t max_iter = 200);

/// Test hook: same assembly paths but skipping the parameter-range check.
DiscreteEVP assemble_unchecked(ProblemKind kind, const ParameterPoint& mu, std::size_t n_per_dim);
ScfResult solve_nonlinear_1d_unchecked(const ParameterPoint& mu, std::size_t n, double tol,
                                       std::size_t max_iter);

}  // namespace pevs

#endif
