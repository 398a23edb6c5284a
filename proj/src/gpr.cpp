#include "pevs/gpr.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace pevs {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

std::atomic<std::size_t> g_variance_clamps{0};

double distance(const ParameterPoint& a, const ParameterPoint& b) {
  if (a.size() != b.size()) throw DimensionMismatch("kernel_eval: parameter dims differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double kernel_r(KernelKind kind, double sigma_f, double ell, double r) {
  const double s2 = sigma_f * sigma_f;
  switch (kind) {
    case KernelKind::SquaredExponential:
      return s2 * std::exp(-r * r / (2.0 * ell * ell));
    case KernelKind::Exponential:
      return s2 * std::exp(-r / ell);
    case KernelKind::Matern32: {
      const double q = std::sqrt(3.0) * r / ell;
      return s2 * (1.0 + q) * std::exp(-q);
    }
    case KernelKind::Matern52: {
      const double q = std::sqrt(5.0) * r / ell;
      return s2 * (1.0 + q + q * q / 3.0) * std::exp(-q);
    }
  }
  throw Error("kernel_r: bad kind");
}

ParameterPoint input_row(const DenseMatrix& inputs, std::size_t i) {
  ParameterPoint p(inputs.cols());
  for (std::size_t j = 0; j < inputs.cols(); ++j) p[j] = inputs(i, j);
  return p;
}

// Linear-mean regressor row h(mu) = (1, mu_1, ..., mu_d).
Vector regressor(const ParameterPoint& mu) {
  Vector h(mu.size() + 1, 1.0);
  for (std::size_t i = 0; i < mu.size(); ++i) h[i + 1] = mu[i];
  return h;
}

double mean_value(const Hyperparameters& theta, const ParameterPoint& mu) {
  const Vector h = regressor(mu);
  if (theta.mean_coeffs.size() != h.size())
    throw DimensionMismatch("mean: coefficient count does not match parameter dimension");
  return dot(h, theta.mean_coeffs);
}

struct Factored {
  SpdFactor factor;
  double jitter;
};

// Cholesky with escalating diagonal jitter, capped at 1e-6 sigma_f^2.
Factored factor_gram(const DenseMatrix& k, double sigma_f, bool force_base_jitter) {
  const double s2 = sigma_f * sigma_f;
  double jitter = force_base_jitter ? 1e-10 * s2 : 0.0;
  for (;;) {
    DenseMatrix kj = k;
    for (std::size_t i = 0; i < kj.rows(); ++i) kj(i, i) += jitter;
    try {
      return {cholesky_spd(kj), jitter};
    } catch (const NotPositiveDefinite&) {
      const double next = (jitter == 0.0) ? 1e-10 * s2 : 10.0 * jitter;
      if (next > 1e-6 * s2)
        throw NotPositiveDefinite("gram: not factorizable within the jitter budget");
      jitter = next;
    }
  }
}

// Small dense solve with partial pivoting, for the GLS normal equations.
Vector solve_small(DenseMatrix a, Vector b) {
  const std::size_t n = a.rows();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a(r, c)) > std::fabs(a(p, c))) p = r;
    if (a(p, c) == 0.0) throw DegenerateData("fit: singular mean regression system");
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(p, j));
      std::swap(b[c], b[p]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
      b[r] -= f * b[c];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

double std_dev(const Vector& y) {
  if (y.empty()) return 0.0;
  double m = 0.0;
  for (double v : y) m += v;
  m /= double(y.size());
  double s = 0.0;
  for (double v : y) s += (v - m) * (v - m);
  return std::sqrt(s / double(y.size()));
}

double log_det(const SpdFactor& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.dim(); ++i) s += std::log(f.lower()(i, i));
  return 2.0 * s;
}

// Profiled evaluation: GLS mean coefficients for the given covariance, then the
// log evidence of the residual.
struct ProfiledResult {
  Vector beta;
  double log_likelihood;
};

ProfiledResult profiled_lml(KernelKind kind, double sigma_f, double ell, double sigma_n,
                            const GPData& data, bool exact_interp) {
  const std::size_t n = data.outputs.size();
  const std::size_t p = data.inputs.cols() + 1;
  Hyperparameters theta;
  theta.signal_std = sigma_f;
  theta.length_scale = ell;
  theta.noise_std = sigma_n;
  theta.mean_coeffs.assign(p, 0.0);

  const DenseMatrix k = gram(kind, theta, data.inputs);
  Factored fac = factor_gram(k, sigma_f, exact_interp);

  // H columns solved one at a time.
  std::vector<Vector> kinv_h(p);
  DenseMatrix h(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector hr = regressor(input_row(data.inputs, i));
    for (std::size_t j = 0; j < p; ++j) h(i, j) = hr[j];
  }
  for (std::size_t j = 0; j < p; ++j) kinv_h[j] = solve_spd(fac.factor, h.col(j));
  const Vector kinv_y = solve_spd(fac.factor, data.outputs);

  DenseMatrix a(p, p);
  Vector b(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) a(i, j) = dot(h.col(i), kinv_h[j]);
    b[i] = dot(h.col(i), kinv_y);
  }
  Vector beta;
  if (n >= p) {
    beta = solve_small(a, b);
  } else {
    // Underdetermined mean: constant-only fit.
    beta.assign(p, 0.0);
    beta[0] = data.outputs[0];
  }

  Vector r = data.outputs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) r[i] -= h(i, j) * beta[j];
  const Vector kinv_r = solve_spd(fac.factor, r);
  const double lml =
      -0.5 * dot(r, kinv_r) - 0.5 * log_det(fac.factor) - 0.5 * double(n) * kLog2Pi;
  return {std::move(beta), lml};
}

// Derivative-free Nelder-Mead minimization; deterministic.
struct SimplexResult {
  Vector x;
  double f;
  std::size_t evals;
};

SimplexResult nelder_mead(const std::function<double(const Vector&)>& f, Vector x0,
                          double step, std::size_t max_evals) {
  const std::size_t n = x0.size();
  std::vector<Vector> xs(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) xs[i + 1][i] += step;
  std::vector<double> fs(n + 1);
  std::size_t evals = 0;
  for (std::size_t i = 0; i <= n; ++i) fs[i] = (++evals, f(xs[i]));

  auto order = [&] {
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::vector<Vector> xs2;
    std::vector<double> fs2;
    for (std::size_t i : idx) {
      xs2.push_back(xs[i]);
      fs2.push_back(fs[i]);
    }
    xs = std::move(xs2);
    fs = std::move(fs2);
  };

  while (evals < max_evals) {
    order();
    if (std::fabs(fs[n] - fs[0]) <= 1e-10 * (1.0 + std::fabs(fs[0]))) break;

    Vector centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += xs[i][j] / double(n);

    auto along = [&](double t) {
      Vector x(n);
      for (std::size_t j = 0; j < n; ++j) x[j] = centroid[j] + t * (xs[n][j] - centroid[j]);
      return x;
    };

    const Vector xr = along(-1.0);
    const double fr = (++evals, f(xr));
    if (fr < fs[0]) {
      const Vector xe = along(-2.0);
      const double fe = (++evals, f(xe));
      if (fe < fr) {
        xs[n] = xe;
        fs[n] = fe;
      } else {
        xs[n] = xr;
        fs[n] = fr;
      }
    } else if (fr < fs[n - 1]) {
      xs[n] = xr;
      fs[n] = fr;
    } else {
      const bool outside = fr < fs[n];
      const Vector xc = along(outside ? -0.5 : 0.5);
      const double fc = (++evals, f(xc));
      if (fc < std::min(fr, fs[n])) {
        xs[n] = xc;
        fs[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j) xs[i][j] = xs[0][j] + 0.5 * (xs[i][j] - xs[0][j]);
          fs[i] = (++evals, f(xs[i]));
        }
      }
    }
  }
  order();
  return {xs[0], fs[0], evals};
}

// splitmix64 stream for the randomized restart.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : s_(seed) {}
  double uniform() {
    s_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return double(z >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t s_;
};

}  // namespace

std::string kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::SquaredExponential: return "se";
    case KernelKind::Exponential: return "exp";
    case KernelKind::Matern32: return "matern32";
    case KernelKind::Matern52: return "matern52";
  }
  throw Error("kernel_name: bad kind");
}

KernelKind kernel_from_name(const std::string& name) {
  if (name == "se") return KernelKind::SquaredExponential;
  if (name == "exp") return KernelKind::Exponential;
  if (name == "matern32") return KernelKind::Matern32;
  if (name == "matern52") return KernelKind::Matern52;
  throw ConfigError("unknown kernel '" + name + "'; expected one of {se, exp, matern32, matern52}");
}

const std::vector<KernelKind>& all_kernels() {
  static const std::vector<KernelKind> ks = {
      KernelKind::Exponential, KernelKind::Matern32, KernelKind::Matern52,
      KernelKind::SquaredExponential};
  return ks;
}

bool Hyperparameters::valid() const {
  return signal_std > 0.0 && std::isfinite(signal_std) && length_scale > 0.0 &&
         std::isfinite(length_scale) && noise_std >= 0.0 && std::isfinite(noise_std);
}

double kernel_eval(KernelKind kind, const Hyperparameters& theta, const ParameterPoint& mu,
                   const ParameterPoint& mu_other) {
  if (!theta.valid()) throw ConfigError("kernel_eval: invalid hyperparameters");
  return kernel_r(kind, theta.signal_std, theta.length_scale, distance(mu, mu_other));
}

DenseMatrix gram(KernelKind kind, const Hyperparameters& theta, const DenseMatrix& inputs) {
  if (!theta.valid()) throw ConfigError("gram: invalid hyperparameters");
  const std::size_t n = inputs.rows();
  DenseMatrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const ParameterPoint pi = input_row(inputs, i);
    k(i, i) = theta.signal_std * theta.signal_std + theta.noise_std * theta.noise_std;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = kernel_eval(kind, theta, pi, input_row(inputs, j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

double log_marginal_likelihood(KernelKind kind, const Hyperparameters& theta,
                               const GPData& data) {
  if (!theta.valid()) throw ConfigError("log_marginal_likelihood: invalid hyperparameters");
  const std::size_t n = data.outputs.size();
  if (n < 1 || data.inputs.rows() != n)
    throw DimensionMismatch("log_marginal_likelihood: data size mismatch");
  const DenseMatrix k = gram(kind, theta, data.inputs);
  Factored fac = factor_gram(k, theta.signal_std, false);
  Vector r = data.outputs;
  for (std::size_t i = 0; i < n; ++i) r[i] -= mean_value(theta, input_row(data.inputs, i));
  const Vector kinv_r = solve_spd(fac.factor, r);
  return -0.5 * dot(r, kinv_r) - 0.5 * log_det(fac.factor) - 0.5 * double(n) * kLog2Pi;
}

GPModel::GPModel(KernelKind kind, Hyperparameters theta, GPData data)
    : kind_(kind),
      theta_(std::move(theta)),
      data_(std::move(data)),
      factor_(cholesky_spd(DenseMatrix::identity(1))) {
  if (!theta_.valid()) throw ConfigError("GPModel: invalid hyperparameters");
  const std::size_t n = data_.outputs.size();
  if (n < 1 || data_.inputs.rows() != n) throw DimensionMismatch("GPModel: data size mismatch");
  const DenseMatrix k = gram(kind_, theta_, data_.inputs);
  Factored fac = factor_gram(k, theta_.signal_std, theta_.noise_std == 0.0);
  factor_ = std::move(fac.factor);
  jitter_ = fac.jitter;
  Vector r = data_.outputs;
  for (std::size_t i = 0; i < n; ++i) r[i] -= mean_value(theta_, input_row(data_.inputs, i));
  alpha_ = solve_spd(factor_, r);
}

struct PredictAccess {
  static const SpdFactor& factor(const GPModel& m) { return m.factor_; }
};

GPModel fit(const GPData& data, KernelKind kind, const OptimizerConfig& cfg) {
  const std::size_t n = data.outputs.size();
  const std::size_t d = data.inputs.cols();
  if (n < 1 || data.inputs.rows() != n) throw DimensionMismatch("fit: data size mismatch");
  for (double v : data.outputs)
    if (!std::isfinite(v)) throw DegenerateData("fit: non-finite output value");

  const double sy = std_dev(data.outputs);
  Hyperparameters theta;
  theta.mean_coeffs.assign(d + 1, 0.0);

  // All outputs identical (or a single observation): constant mean, floor signal.
  if (sy == 0.0 || n == 1) {
    theta.mean_coeffs[0] = data.outputs[0];
    theta.signal_std = 1e-8 * std::max(1.0, std::fabs(data.outputs[0]));
    theta.length_scale = 1.0;
    theta.noise_std = 0.0;
    GPModel model(kind, theta, data);
    FitDiagnostics diag;
    diag.restarts.push_back({theta, 0.0, 0});
    model.set_diagnostics(std::move(diag));
    return model;
  }

  double range = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double lo = data.inputs(0, j), hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, data.inputs(i, j));
      hi = std::max(hi, data.inputs(i, j));
    }
    range = std::max(range, hi - lo);
  }
  if (range == 0.0)
    throw DegenerateData("fit: all training inputs are identical");

  // Length scales below the input resolution are not identifiable: the kernel
  // then acts as white noise on the training set and the fit degenerates into
  // a mean-plus-nugget model for every kernel. Floor ell at the smallest
  // nonzero pairwise distance.
  double ell_floor = range;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = distance(input_row(data.inputs, i), input_row(data.inputs, j));
      if (r > 0.0) ell_floor = std::min(ell_floor, r);
    }
  ell_floor = std::min(ell_floor, range);

  const double noise_floor = cfg.exact_interpolation ? 0.0 : cfg.noise_floor_rel * sy;
  const bool opt_noise = !cfg.exact_interpolation;
  const std::size_t dim = opt_noise ? 3 : 2;

  auto unpack = [&](const Vector& x) {
    double sigma_f = std::exp(x[0]);
    double ell = std::exp(x[1]);
    double sigma_n = opt_noise ? std::max(std::exp(x[2]), noise_floor) : 0.0;
    return std::tuple<double, double, double>(sigma_f, ell, sigma_n);
  };

  auto objective = [&](const Vector& x) -> double {
    auto [sigma_f, ell, sigma_n] = unpack(x);
    if (!(sigma_f > 1e-12 * sy && sigma_f < 1e8 * sy)) return 1e100;
    if (!(ell >= ell_floor && ell < 1e4 * range)) return 1e100;
    try {
      const double lml = profiled_lml(kind, sigma_f, ell, sigma_n, data,
                                      cfg.exact_interpolation).log_likelihood;
      return std::isfinite(lml) ? -lml : 1e100;
    } catch (const Error&) {
      return 1e100;
    }
  };

  const double ell_starts[4] = {0.1, 0.5, 1.0, 2.0};
  Stream rng(cfg.seed);
  FitDiagnostics diag;
  double best_f = std::numeric_limits<double>::infinity();
  Vector best_x;

  const std::size_t restarts = std::max<std::size_t>(cfg.restarts, 1);
  for (std::size_t r = 0; r < restarts; ++r) {
    Vector x0(dim);
    if (r < 4) {
      x0[0] = std::log(sy);
      x0[1] = std::log(ell_starts[r] * range);
    } else {
      x0[0] = std::log(sy) + (rng.uniform() - 0.5) * 2.0;
      x0[1] = std::log(range) + (rng.uniform() - 0.5) * 4.0;
    }
    if (opt_noise) x0[2] = std::log(std::max(1e-3 * sy, noise_floor));

    SimplexResult res = nelder_mead(objective, x0, 0.7, cfg.max_evals);
    auto [sigma_f, ell, sigma_n] = unpack(res.x);
    Hyperparameters rt;
    rt.signal_std = sigma_f;
    rt.length_scale = ell;
    rt.noise_std = sigma_n;
    rt.mean_coeffs.assign(d + 1, 0.0);
    if (res.f < 1e99) {
      try {
        rt.mean_coeffs =
            profiled_lml(kind, sigma_f, ell, sigma_n, data, cfg.exact_interpolation).beta;
      } catch (const Error&) {
        res.f = 1e100;
      }
    }
    diag.restarts.push_back({rt, -res.f, res.evals});
    if (res.f < best_f) {
      best_f = res.f;
      best_x = res.x;
      diag.best_index = r;
    }
  }
  if (!(best_f < 1e99))
    throw OptimizationFailure("fit: every optimizer restart diverged");

  auto [sigma_f, ell, sigma_n] = unpack(best_x);
  theta.signal_std = sigma_f;
  theta.length_scale = ell;
  theta.noise_std = sigma_n;
  theta.mean_coeffs =
      profiled_lml(kind, sigma_f, ell, sigma_n, data, cfg.exact_interpolation).beta;

  GPModel model(kind, theta, data);
  model.set_diagnostics(std::move(diag));
  return model;
}

Prediction predict(const GPModel& model, const ParameterPoint& mu) {
  for (double c : mu)
    if (!std::isfinite(c)) throw ParameterOutOfRange("predict: non-finite parameter");
  const GPData& data = model.data();
  const std::size_t n = data.outputs.size();
  Vector kstar(n);
  for (std::size_t i = 0; i < n; ++i)
    kstar[i] = kernel_eval(model.kernel(), model.theta(), mu, input_row(data.inputs, i));

  Prediction p;
  p.mean = mean_value(model.theta(), mu) + dot(kstar, model.weights());
  const Vector kinv_kstar = solve_spd(PredictAccess::factor(model), kstar);
  const double prior = model.theta().signal_std * model.theta().signal_std;
  double var = prior - dot(kstar, kinv_kstar);
  if (var < 0.0) {
    g_variance_clamps.fetch_add(1, std::memory_order_relaxed);
    var = 0.0;
  }
  p.variance = var;
  return p;
}

std::size_t variance_clamp_count() { return g_variance_clamps.load(); }
void reset_variance_clamp_count() { g_variance_clamps.store(0); }

double normal_band_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must be in (0, 1)");
  const double target = 0.5 + level / 2.0;  // Phi(z) = (1 + level) / 2
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double phi = 0.5 * std::erfc(-mid / std::numbers::sqrt2);
    (phi < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Interval confidence_interval(double mean, double variance, double level) {
  if (variance < 0.0) throw ConfigError("confidence_interval: negative variance");
  const double z = normal_band_quantile(level);
  const double half = z * std::sqrt(variance);
  return {mean - half, mean + half};
}

}  // namespace pevs
