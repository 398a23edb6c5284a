#ifndef PEVS_GPR_HPP
#define PEVS_GPR_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pevs/linalg.hpp"
#include "pevs/matrix.hpp"
#include "pevs/problems.hpp"

namespace pevs {

enum class KernelKind { SquaredExponential, Exponential, Matern32, Matern52 };

std::string kernel_name(KernelKind kind);
KernelKind kernel_from_name(const std::string& name);
const std::vector<KernelKind>& all_kernels();

struct Hyperparameters {
  Vector mean_coeffs;        // a0, a1, ..., ad of the linear mean
  double signal_std = 1.0;   // sigma_f
  double length_scale = 1.0; // ell
  double noise_std = 0.0;    // sigma_n

  bool valid() const;
};

/// Covariance value k(mu, mu') for the chosen kernel (noise excluded).
double kernel_eval(KernelKind kind, const Hyperparameters& theta, const ParameterPoint& mu,
                   const ParameterPoint& mu_other);

/// Training data: one row of `inputs` per observation.
struct GPData {
  DenseMatrix inputs;  // n_s x d
  Vector outputs;      // n_s
};

/// Noise-augmented Gram matrix Sigma + sigma_n^2 I.
DenseMatrix gram(KernelKind kind, const Hyperparameters& theta, const DenseMatrix& inputs);

/// Gaussian log-evidence -r^T K^-1 r / 2 - log det K / 2 - n log(2 pi) / 2
/// with r = y - m(M) from theta's mean coefficients.
double log_marginal_likelihood(KernelKind kind, const Hyperparameters& theta,
                               const GPData& data);

struct OptimizerConfig {
  std::uint64_t seed = 0;
  std::size_t restarts = 5;
  std::size_t max_evals = 600;
  double noise_floor_rel = 1e-6;   // sigma_n >= this * std(y)
  bool exact_interpolation = false;  // sigma_n = 0, Gram stabilized by jitter only
};

struct FitDiagnostics {
  struct Restart {
    Hyperparameters theta;
    double log_likelihood = 0.0;
    std::size_t evaluations = 0;
  };
  std::vector<Restart> restarts;
  std::size_t best_index = 0;
};

/// One trained Gaussian process with cached solve factors.
class GPModel {
 public:
  GPModel(KernelKind kind, Hyperparameters theta, GPData data);

  KernelKind kernel() const { return kind_; }
  const Hyperparameters& theta() const { return theta_; }
  const GPData& data() const { return data_; }
  double jitter() const { return jitter_; }
  const FitDiagnostics* diagnostics() const { return diag_ ? &*diag_ : nullptr; }
  void set_diagnostics(FitDiagnostics d) { diag_ = std::move(d); }

  const Vector& weights() const { return alpha_; }

 private:
  KernelKind kind_;
  Hyperparameters theta_;
  GPData data_;
  SpdFactor factor_;
  Vector alpha_;   // K^-1 (y - m(M))
  double jitter_ = 0.0;
  std::optional<FitDiagnostics> diag_;

  friend struct Prediction;
  friend struct PredictAccess;
};

GPModel fit(const GPData& data, KernelKind kind, const OptimizerConfig& cfg = {});

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

Prediction predict(const GPModel& model, const ParameterPoint& mu);

/// Running count of posterior variances clamped to zero by roundoff.
std::size_t variance_clamp_count();
void reset_variance_clamp_count();

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// mean +/- z sqrt(variance) with z the standard-normal quantile for `level`.
Interval confidence_interval(double mean, double variance, double level);

/// Standard-normal quantile of (1 + level) / 2, e.g. 1.959964 at level 0.95.
double normal_band_quantile(double level);

}  // namespace pevs

#endif
