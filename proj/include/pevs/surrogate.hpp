#ifndef PEVS_SURROGATE_HPP
#define PEVS_SURROGATE_HPP

#include <cstddef>
#include <vector>

#include "pevs/gpr.hpp"
#include "pevs/offline.hpp"
#include "pevs/pod.hpp"

namespace pevs {

/// One GP per eigenvalue and per reduced coefficient of a single eigen-index.
struct SurrogateModel {
  ProblemKind problem = ProblemKind::Crossing;
  MeshDescriptor mesh;
  std::size_t eigen_index = 1;  // 1-based
  KernelKind kernel = KernelKind::Exponential;
  PODBasis basis;
  std::vector<GPModel> models;  // [0] eigenvalue, [1..N_j] coefficients
  std::vector<ParameterPoint> training_parameters;

  const GPModel& eigenvalue_model() const { return models.front(); }
  std::size_t coefficient_count() const { return models.size() - 1; }
};

struct SurrogateOptions {
  double pod_tol = 1e-8;
  std::size_t pod_fixed_dim = 0;  // 0: use the tolerance
  OptimizerConfig opt;
};

SurrogateModel train_surrogate(const SnapshotSet& snaps, std::size_t eigen_index,
                               KernelKind kind, const SurrogateOptions& opts = {});

struct EigenpairPrediction {
  double eigenvalue = 0.0;
  double eigenvalue_variance = 0.0;
  Vector eigenvector;            // n_h
  Vector coefficient_means;      // N_j
  Vector coefficient_variances;  // N_j, per-output bands (no cross covariance)
  bool extrapolated = false;     // mu outside the problem's admissible set
};

EigenpairPrediction predict_eigenpair(const SurrogateModel& model, const ParameterPoint& mu);

/// sqrt( (1/n_t) sum (lambda_i - pred_i)^2 / sum lambda_i^2 ).
double rrmse(const Vector& reference, const Vector& predicted);

struct EigvecError {
  Vector field;   // u_ref - s * u_pred with the sign s minimizing the B-norm
  double l2 = 0.0;   // B-norm of the field
  double max = 0.0;  // max-abs entry of the field
};

EigvecError eigvec_error(const Vector& u_ref, const Vector& u_pred, const DenseMatrix& mass);

/// Per-test-point comparison row and aggregate metrics for a report.
struct MetricsRow {
  ParameterPoint mu;
  double lambda_ref = 0.0;
  double lambda_pred = 0.0;
  double rel_err = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct MetricsReport {
  KernelKind kernel = KernelKind::Exponential;
  std::size_t eigen_index = 1;
  std::vector<MetricsRow> rows;
  double rrmse_value = 0.0;
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
};

MetricsReport evaluate_eigenvalues(const SurrogateModel& model,
                                   const std::vector<ParameterPoint>& test_points,
                                   const Vector& reference, double ci_level = 0.95);

}  // namespace pevs

#endif
