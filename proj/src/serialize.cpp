#include "pevs/serialize.hpp"

#include <string>

#include "pevs/config.hpp"

namespace pevs {

namespace {

std::size_t header_size(const ArchiveFile& a, const std::string& key) {
  const std::string v = a.header_value(key);
  try {
    return std::stoul(v);
  } catch (const std::exception&) {
    throw ArchiveError("archive header key '" + key + "' is not an integer: '" + v + "'");
  }
}

DenseMatrix parameters_matrix(const std::vector<ParameterPoint>& pts) {
  const std::size_t d = pts.empty() ? 1 : pts[0].size();
  DenseMatrix m(pts.size(), d);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = pts[i][j];
  return m;
}

std::vector<ParameterPoint> parameters_from(const DenseMatrix& m) {
  std::vector<ParameterPoint> pts(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    pts[i].resize(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) pts[i][j] = m(i, j);
  }
  return pts;
}

const DenseMatrix& matrix_at(const ArchiveFile& a, std::size_t idx, const char* what) {
  if (idx >= a.matrices.size())
    throw ArchiveError(std::string("archive is missing the ") + what + " matrix");
  return a.matrices[idx];
}

}  // namespace

ArchiveFile snapshots_to_archive(const SnapshotSet& snaps, const std::string& config_text) {
  ArchiveFile a;
  a.header = "type=snapshots\nversion=1\nproblem=" + problem_name(snaps.problem) +
             "\nn_per_dim=" + std::to_string(snaps.mesh.n_per_dim) +
             "\nm_s=" + std::to_string(snaps.num_indices()) +
             "\nn_s=" + std::to_string(snaps.num_parameters()) + "\n";
  if (!config_text.empty()) a.header += "# producing config\n" + config_text;
  a.matrices.push_back(parameters_matrix(snaps.parameters));
  for (std::size_t j = 0; j < snaps.num_indices(); ++j) {
    DenseMatrix lam(1, snaps.eigenvalues[j].size());
    for (std::size_t i = 0; i < lam.cols(); ++i) lam(0, i) = snaps.eigenvalues[j][i];
    a.matrices.push_back(std::move(lam));
    a.matrices.push_back(snaps.eigenvectors[j]);
  }
  return a;
}

SnapshotSet snapshots_from_archive(const ArchiveFile& archive) {
  if (archive.header_value("type") != "snapshots")
    throw ArchiveError("archive is not a snapshot archive");
  SnapshotSet snaps;
  snaps.problem = problem_from_name(archive.header_value("problem"));
  snaps.mesh = problem_mesh(snaps.problem, header_size(archive, "n_per_dim"));
  snaps.parameters = parameters_from(matrix_at(archive, 0, "parameter"));
  const std::size_t m_s = header_size(archive, "m_s");
  const std::size_t n_s = snaps.parameters.size();
  for (std::size_t j = 0; j < m_s; ++j) {
    const DenseMatrix& lam = matrix_at(archive, 1 + 2 * j, "eigenvalue");
    const DenseMatrix& vecs = matrix_at(archive, 2 + 2 * j, "eigenvector");
    if (lam.rows() != 1 || lam.cols() != n_s || vecs.cols() != n_s)
      throw ArchiveError("snapshot archive matrix shapes are inconsistent");
    Vector values(n_s);
    for (std::size_t i = 0; i < n_s; ++i) values[i] = lam(0, i);
    snaps.eigenvalues.push_back(std::move(values));
    snaps.eigenvectors.push_back(vecs);
  }
  return snaps;
}

ArchiveFile model_to_archive(const SurrogateModel& model, const std::string& config_text) {
  const std::size_t d = problem_dim(model.problem);
  ArchiveFile a;
  a.header = "type=model\nversion=1\nproblem=" + problem_name(model.problem) +
             "\nn_per_dim=" + std::to_string(model.mesh.n_per_dim) +
             "\nkernel=" + kernel_name(model.kernel) +
             "\neigen_index=" + std::to_string(model.eigen_index) +
             "\npod_tol=" + format_double(model.basis.truncation_tol) +
             "\nn_outputs=" + std::to_string(model.models.size()) + "\n";
  for (std::size_t k = 0; k < model.models.size(); ++k) {
    const GPModel& gp = model.models[k];
    const FitDiagnostics* diag = gp.diagnostics();
    a.header += "loglik." + std::to_string(k) + "=" +
                format_double(log_marginal_likelihood(gp.kernel(), gp.theta(), gp.data())) + "\n";
    if (diag) a.header += "best." + std::to_string(k) + "=" + std::to_string(diag->best_index) + "\n";
  }
  if (!config_text.empty()) a.header += "# producing config\n" + config_text;

  a.matrices.push_back(parameters_matrix(model.training_parameters));
  a.matrices.push_back(model.basis.basis);
  DenseMatrix sv(1, model.basis.singular_values.size());
  for (std::size_t i = 0; i < sv.cols(); ++i) sv(0, i) = model.basis.singular_values[i];
  a.matrices.push_back(std::move(sv));

  for (const GPModel& gp : model.models) {
    const Hyperparameters& t = gp.theta();
    DenseMatrix theta(t.mean_coeffs.size() + 3, 1);
    for (std::size_t i = 0; i < t.mean_coeffs.size(); ++i) theta(i, 0) = t.mean_coeffs[i];
    theta(t.mean_coeffs.size() + 0, 0) = t.signal_std;
    theta(t.mean_coeffs.size() + 1, 0) = t.length_scale;
    theta(t.mean_coeffs.size() + 2, 0) = t.noise_std;
    a.matrices.push_back(std::move(theta));
    DenseMatrix y(gp.data().outputs.size(), 1);
    for (std::size_t i = 0; i < y.rows(); ++i) y(i, 0) = gp.data().outputs[i];
    a.matrices.push_back(std::move(y));
    // Restart table: one row per restart, columns
    // (log-likelihood, evaluation count, mean coeffs..., sigma_f, ell, sigma_n).
    const FitDiagnostics* diag = gp.diagnostics();
    std::size_t nrows = diag ? diag->restarts.size() : 1;
    DenseMatrix table(std::max<std::size_t>(nrows, 1), d + 6);
    if (diag && !diag->restarts.empty()) {
      for (std::size_t r = 0; r < diag->restarts.size(); ++r) {
        const auto& rs = diag->restarts[r];
        table(r, 0) = rs.log_likelihood;
        table(r, 1) = double(rs.evaluations);
        for (std::size_t i = 0; i < d + 1 && i < rs.theta.mean_coeffs.size(); ++i)
          table(r, 2 + i) = rs.theta.mean_coeffs[i];
        table(r, d + 3) = rs.theta.signal_std;
        table(r, d + 4) = rs.theta.length_scale;
        table(r, d + 5) = rs.theta.noise_std;
      }
    } else {
      table(0, 0) = log_marginal_likelihood(gp.kernel(), t, gp.data());
      table(0, 1) = 0.0;
      for (std::size_t i = 0; i < d + 1 && i < t.mean_coeffs.size(); ++i)
        table(0, 2 + i) = t.mean_coeffs[i];
      table(0, d + 3) = t.signal_std;
      table(0, d + 4) = t.length_scale;
      table(0, d + 5) = t.noise_std;
    }
    a.matrices.push_back(std::move(table));
  }
  return a;
}

SurrogateModel model_from_archive(const ArchiveFile& archive) {
  if (archive.header_value("type") != "model")
    throw ArchiveError("archive is not a surrogate model archive");
  SurrogateModel model;
  model.problem = problem_from_name(archive.header_value("problem"));
  model.mesh = problem_mesh(model.problem, header_size(archive, "n_per_dim"));
  model.kernel = kernel_from_name(archive.header_value("kernel"));
  model.eigen_index = header_size(archive, "eigen_index");

  model.training_parameters = parameters_from(matrix_at(archive, 0, "parameter"));
  model.basis.basis = matrix_at(archive, 1, "basis");
  const DenseMatrix& sv = matrix_at(archive, 2, "singular value");
  model.basis.singular_values.resize(sv.cols());
  for (std::size_t i = 0; i < sv.cols(); ++i) model.basis.singular_values[i] = sv(0, i);
  model.basis.truncation_tol = std::stod(archive.header_value("pod_tol"));
  model.basis.eigen_index = model.eigen_index;

  const std::size_t n_outputs = header_size(archive, "n_outputs");
  const DenseMatrix inputs = matrix_at(archive, 0, "parameter");
  for (std::size_t k = 0; k < n_outputs; ++k) {
    const DenseMatrix& theta_mat = matrix_at(archive, 3 + 3 * k, "hyperparameter");
    const DenseMatrix& y_mat = matrix_at(archive, 4 + 3 * k, "output");
    if (theta_mat.rows() < 4 || y_mat.rows() != inputs.rows())
      throw ArchiveError("model archive GP matrices are inconsistent");
    Hyperparameters theta;
    theta.mean_coeffs.resize(theta_mat.rows() - 3);
    for (std::size_t i = 0; i < theta.mean_coeffs.size(); ++i)
      theta.mean_coeffs[i] = theta_mat(i, 0);
    theta.signal_std = theta_mat(theta_mat.rows() - 3, 0);
    theta.length_scale = theta_mat(theta_mat.rows() - 2, 0);
    theta.noise_std = theta_mat(theta_mat.rows() - 1, 0);
    GPData data;
    data.inputs = inputs;
    data.outputs.resize(y_mat.rows());
    for (std::size_t i = 0; i < y_mat.rows(); ++i) data.outputs[i] = y_mat(i, 0);
    model.models.emplace_back(model.kernel, std::move(theta), std::move(data));
  }
  return model;
}

}  // namespace pevs
