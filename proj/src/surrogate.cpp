#include "pevs/surrogate.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace pevs {

namespace {

DenseMatrix parameters_as_rows(const std::vector<ParameterPoint>& pts) {
  const std::size_t d = pts.empty() ? 0 : pts[0].size();
  DenseMatrix m(pts.size(), d);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = pts[i][j];
  return m;
}

}  // namespace

SurrogateModel train_surrogate(const SnapshotSet& snaps, std::size_t eigen_index,
                               KernelKind kind, const SurrogateOptions& opts) {
  if (eigen_index < 1 || eigen_index > snaps.num_indices())
    throw DimensionMismatch("train_surrogate: eigen index " + std::to_string(eigen_index) +
                            " out of range (m_s = " + std::to_string(snaps.num_indices()) + ")");
  const std::size_t j = eigen_index - 1;
  SurrogateModel model;
  model.problem = snaps.problem;
  model.mesh = snaps.mesh;
  model.eigen_index = eigen_index;
  model.kernel = kind;
  model.training_parameters = snaps.parameters;
  model.basis = pod_basis(snaps.eigenvectors[j], opts.pod_tol, opts.pod_fixed_dim);
  model.basis.eigen_index = eigen_index;

  const DenseMatrix inputs = parameters_as_rows(snaps.parameters);
  const std::size_t n_s = snaps.num_parameters();

  // Output 0 is the eigenvalue; outputs 1..N_j are the reduced coefficients.
  // Restart seeds are derived per output for reproducibility.
  std::vector<Vector> outputs;
  outputs.push_back(snaps.eigenvalues[j]);
  const std::size_t nj = model.basis.reduced_dim();
  DenseMatrix coeffs(nj, n_s);
  for (std::size_t i = 0; i < n_s; ++i) {
    const Vector c = reduce(model.basis, snaps.eigenvectors[j].col(i));
    for (std::size_t k = 0; k < nj; ++k) coeffs(k, i) = c[k];
  }
  for (std::size_t k = 0; k < nj; ++k) {
    Vector row(n_s);
    for (std::size_t i = 0; i < n_s; ++i) row[i] = coeffs(k, i);
    outputs.push_back(std::move(row));
  }

  for (std::size_t out = 0; out < outputs.size(); ++out) {
    OptimizerConfig cfg = opts.opt;
    cfg.seed = opts.opt.seed + out;
    try {
      model.models.push_back(fit({inputs, outputs[out]}, kind, cfg));
    } catch (const Error& e) {
      throw OptimizationFailure("train_surrogate: fit failed for output " +
                                std::to_string(out) + " (0 = eigenvalue): " + e.what());
    }
  }
  return model;
}

EigenpairPrediction predict_eigenpair(const SurrogateModel& model, const ParameterPoint& mu) {
  EigenpairPrediction pred;
  pred.extrapolated = !parameter_space(model.problem).contains(mu);

  const Prediction lam = predict(model.eigenvalue_model(), mu);
  pred.eigenvalue = lam.mean;
  pred.eigenvalue_variance = lam.variance;

  const std::size_t nj = model.coefficient_count();
  pred.coefficient_means.resize(nj);
  pred.coefficient_variances.resize(nj);
  for (std::size_t k = 0; k < nj; ++k) {
    const Prediction c = predict(model.models[1 + k], mu);
    pred.coefficient_means[k] = c.mean;
    pred.coefficient_variances[k] = c.variance;
  }
  pred.eigenvector = reconstruct(model.basis, pred.coefficient_means);
  return pred;
}

double rrmse(const Vector& reference, const Vector& predicted) {
  if (reference.size() != predicted.size() || reference.empty())
    throw DimensionMismatch("rrmse: list sizes differ or are empty");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - predicted[i];
    num += d * d;
    den += reference[i] * reference[i];
  }
  if (den == 0.0) throw ZeroReference("rrmse: reference values are all zero");
  return std::sqrt(num / double(reference.size()) / den);
}

EigvecError eigvec_error(const Vector& u_ref, const Vector& u_pred, const DenseMatrix& mass) {
  if (u_ref.size() != u_pred.size() || u_ref.size() != mass.rows())
    throw DimensionMismatch("eigvec_error: size mismatch");
  const Vector bu = matvec(mass, u_pred);
  const double s = dot(u_ref, bu) >= 0.0 ? 1.0 : -1.0;
  EigvecError err;
  err.field.resize(u_ref.size());
  for (std::size_t i = 0; i < u_ref.size(); ++i) err.field[i] = u_ref[i] - s * u_pred[i];
  err.l2 = std::sqrt(std::max(0.0, dot(err.field, matvec(mass, err.field))));
  for (double v : err.field) err.max = std::max(err.max, std::fabs(v));
  return err;
}

MetricsReport evaluate_eigenvalues(const SurrogateModel& model,
                                   const std::vector<ParameterPoint>& test_points,
                                   const Vector& reference, double ci_level) {
  if (test_points.size() != reference.size())
    throw DimensionMismatch("evaluate_eigenvalues: test point / reference count mismatch");
  MetricsReport report;
  report.kernel = model.kernel;
  report.eigen_index = model.eigen_index;

  const auto t0 = std::chrono::steady_clock::now();
  Vector predicted(test_points.size());
  for (std::size_t i = 0; i < test_points.size(); ++i) {
    const Prediction p = predict(model.eigenvalue_model(), test_points[i]);
    predicted[i] = p.mean;
    const Interval ci = confidence_interval(p.mean, p.variance, ci_level);
    MetricsRow row;
    row.mu = test_points[i];
    row.lambda_ref = reference[i];
    row.lambda_pred = p.mean;
    row.rel_err = reference[i] != 0.0 ? std::fabs(p.mean - reference[i]) / std::fabs(reference[i])
                                      : std::fabs(p.mean - reference[i]);
    row.ci_lo = ci.lo;
    row.ci_hi = ci.hi;
    report.rows.push_back(std::move(row));
  }
  report.predict_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.rrmse_value = rrmse(reference, predicted);
  return report;
}

}  // namespace pevs
