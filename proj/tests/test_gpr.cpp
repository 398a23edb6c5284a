#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "pevs/errors.hpp"
#include "pevs/gpr.hpp"
#include "pevs/matrix.hpp"

using namespace pevs;

namespace {

struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  double next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    return double(z >> 11) * (1.0 / 9007199254740992.0);  // [0, 1)
  }
};

// Independent dense solve for the oracle: Gaussian elimination with pivoting.
Vector elim_solve(DenseMatrix a, Vector b) {
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

// log det of an SPD matrix via elimination pivots.
double elim_logdet(DenseMatrix a) {
  const std::size_t n = a.rows();
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += std::log(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return acc;
}

ParameterPoint row_point(const DenseMatrix& m, std::size_t i) {
  ParameterPoint p(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) p[j] = m(i, j);
  return p;
}

double mean_at(const Hyperparameters& theta, const ParameterPoint& mu) {
  double m = theta.mean_coeffs[0];
  for (std::size_t i = 0; i < mu.size(); ++i) m += theta.mean_coeffs[i + 1] * mu[i];
  return m;
}

// Brute-force GP posterior from the textbook formulas.
Prediction oracle_predict(KernelKind kind, const Hyperparameters& theta, const GPData& data,
                          const ParameterPoint& mu, double jitter) {
  const std::size_t n = data.outputs.size();
  DenseMatrix k = gram(kind, theta, data.inputs);
  for (std::size_t i = 0; i < n; ++i) k(i, i) += jitter;
  Vector r(n);
  for (std::size_t i = 0; i < n; ++i)
    r[i] = data.outputs[i] - mean_at(theta, row_point(data.inputs, i));
  Vector kstar(n);
  for (std::size_t i = 0; i < n; ++i)
    kstar[i] = kernel_eval(kind, theta, row_point(data.inputs, i), mu);
  const Vector alpha = elim_solve(k, r);
  const Vector v = elim_solve(k, kstar);
  Prediction p;
  p.mean = mean_at(theta, mu) + dot(kstar, alpha);
  p.variance = kernel_eval(kind, theta, mu, mu) - dot(kstar, v);
  if (p.variance < 0.0) p.variance = 0.0;
  return p;
}

double oracle_lml(KernelKind kind, const Hyperparameters& theta, const GPData& data) {
  const std::size_t n = data.outputs.size();
  const DenseMatrix k = gram(kind, theta, data.inputs);
  Vector r(n);
  for (std::size_t i = 0; i < n; ++i)
    r[i] = data.outputs[i] - mean_at(theta, row_point(data.inputs, i));
  const Vector alpha = elim_solve(k, r);
  return -0.5 * dot(r, alpha) - 0.5 * elim_logdet(k) -
         0.5 * double(n) * std::log(2.0 * 3.14159265358979323846);
}

GPData grid_data(const std::vector<double>& xs, const std::vector<double>& ys) {
  GPData data;
  data.inputs = DenseMatrix(xs.size(), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) data.inputs(i, 0) = xs[i];
  data.outputs = ys;
  return data;
}

}  // namespace

TEST_CASE("kernel names round trip and unknown names fail") {
  CHECK(all_kernels().size() == 4);
  for (KernelKind kind : all_kernels()) CHECK(kernel_from_name(kernel_name(kind)) == kind);
  CHECK(kernel_name(KernelKind::SquaredExponential) == "se");
  CHECK(kernel_name(KernelKind::Exponential) == "exp");
  CHECK(kernel_name(KernelKind::Matern32) == "matern32");
  CHECK(kernel_name(KernelKind::Matern52) == "matern52");
  CHECK_THROWS_AS(kernel_from_name("gaussian"), ConfigError);
}

TEST_CASE("kernel values match closed forms at unit distance") {
  Hyperparameters theta;
  theta.mean_coeffs = {0.0, 0.0};
  theta.signal_std = 2.0;
  theta.length_scale = 1.0;
  const ParameterPoint a{0.0}, b{1.0};
  CHECK(kernel_eval(KernelKind::SquaredExponential, theta, a, b) ==
        doctest::Approx(2.4261226388505337).epsilon(1e-14));
  CHECK(kernel_eval(KernelKind::Exponential, theta, a, b) ==
        doctest::Approx(1.4715177646857693).epsilon(1e-14));
  CHECK(kernel_eval(KernelKind::Matern32, theta, a, b) ==
        doctest::Approx(1.9334308983860309).epsilon(1e-14));
  CHECK(kernel_eval(KernelKind::Matern52, theta, a, b) ==
        doctest::Approx(2.0959764353272810).epsilon(1e-13));
  // At zero distance every kernel returns sigma_f^2.
  for (KernelKind kind : all_kernels())
    CHECK(kernel_eval(kind, theta, a, a) == doctest::Approx(4.0).epsilon(1e-15));
  // 2D inputs use the Euclidean distance: (0,0) to (3,4) has r = 5.
  Hyperparameters t2 = theta;
  t2.mean_coeffs = {0.0, 0.0, 0.0};
  t2.length_scale = 5.0;
  CHECK(kernel_eval(KernelKind::Exponential, t2, {0.0, 0.0}, {3.0, 4.0}) ==
        doctest::Approx(4.0 * std::exp(-1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(kernel_eval(KernelKind::Exponential, theta, {0.0}, {0.0, 1.0}),
                  DimensionMismatch);
}

TEST_CASE("gram matrix adds the noise variance on the diagonal") {
  Hyperparameters theta;
  theta.mean_coeffs = {0.0, 0.0};
  theta.signal_std = 1.5;
  theta.length_scale = 0.8;
  theta.noise_std = 0.3;
  DenseMatrix inputs(3, 1);
  inputs(0, 0) = 0.0;
  inputs(1, 0) = 0.4;
  inputs(2, 0) = 1.1;
  const DenseMatrix k = gram(KernelKind::Matern32, theta, inputs);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(k(i, i) == doctest::Approx(1.5 * 1.5 + 0.3 * 0.3).epsilon(1e-14));
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(k(i, j) == doctest::Approx(k(j, i)).epsilon(1e-15));
      if (i != j)
        CHECK(k(i, j) == doctest::Approx(kernel_eval(KernelKind::Matern32, theta,
                                                     {inputs(i, 0)}, {inputs(j, 0)}))
                             .epsilon(1e-15));
    }
  }
}

TEST_CASE("posterior matches the hand-computed two-point example") {
  // SE kernel, sigma_f = ell = 1, no noise, zero mean, data {(0,0),(1,1)}.
  // K = [[1,c],[c,1]] with c = e^{-1/2}; at mu=0.5 both covariances are
  // e^{-1/8}, so mean = k* (y1+y2-c(y1+y2)) ... evaluated: 0.549318...
  Hyperparameters theta;
  theta.mean_coeffs = {0.0, 0.0};
  theta.signal_std = 1.0;
  theta.length_scale = 1.0;
  theta.noise_std = 0.0;
  GPData data;
  data.inputs = DenseMatrix(2, 1);
  data.inputs(1, 0) = 1.0;
  data.outputs = {0.0, 1.0};
  const GPModel model(KernelKind::SquaredExponential, theta, data);
  const Prediction p = predict(model, {0.5});
  CHECK(p.mean == doctest::Approx(0.5493184317705155).epsilon(1e-9));
  CHECK(p.variance == doctest::Approx(0.030456370859785253).epsilon(1e-6));
}

TEST_CASE("posterior and evidence match a dense brute-force oracle") {
  Rng rng(12345);
  int checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + std::size_t(rng.next() * 7.0);  // 2..8
    const std::size_t d = 1 + std::size_t(rng.next() * 2.0);  // 1..2
    const KernelKind kind = all_kernels()[rep % 4];

    GPData data;
    data.inputs = DenseMatrix(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) data.inputs(i, j) = 3.0 * rng.next();
    data.outputs.resize(n);
    for (double& y : data.outputs) y = 2.0 * rng.next() - 1.0;

    Hyperparameters theta;
    theta.mean_coeffs.assign(d + 1, 0.0);
    theta.mean_coeffs[0] = rng.next();
    theta.signal_std = 0.5 + rng.next();
    theta.length_scale = 0.3 + rng.next();
    theta.noise_std = 0.05 + 0.2 * rng.next();

    CHECK(log_marginal_likelihood(kind, theta, data) ==
          doctest::Approx(oracle_lml(kind, theta, data)).epsilon(1e-10));

    const GPModel model(kind, theta, data);
    ParameterPoint mu(d);
    for (double& c : mu) c = 3.0 * rng.next();
    const Prediction got = predict(model, mu);
    const Prediction want = oracle_predict(kind, theta, data, mu, model.jitter());
    CHECK(got.mean == doctest::Approx(want.mean).epsilon(1e-10));
    CHECK(std::fabs(got.variance - want.variance) < 1e-10 * theta.signal_std * theta.signal_std);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("posterior mean is a linear smoother of the outputs") {
  Hyperparameters theta;
  theta.mean_coeffs = {0.0, 0.0};
  theta.signal_std = 1.2;
  theta.length_scale = 0.9;
  theta.noise_std = 0.1;
  const std::vector<double> xs{0.0, 0.5, 1.0, 1.7};
  const std::vector<double> y1{1.0, -0.5, 0.25, 2.0};
  const std::vector<double> y2{0.3, 0.7, -1.0, 0.4};
  std::vector<double> ysum(4);
  for (std::size_t i = 0; i < 4; ++i) ysum[i] = y1[i] + y2[i];
  const GPModel m1(KernelKind::Exponential, theta, grid_data(xs, y1));
  const GPModel m2(KernelKind::Exponential, theta, grid_data(xs, y2));
  const GPModel msum(KernelKind::Exponential, theta, grid_data(xs, ysum));
  for (double x : {0.2, 0.85, 1.4}) {
    const double lhs = predict(msum, {x}).mean;
    const double rhs = predict(m1, {x}).mean + predict(m2, {x}).mean;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("noise-free posteriors interpolate and revert to the prior far away") {
  std::vector<double> xs, ys;
  for (int i = 0; i <= 8; ++i) {
    const double x = double(i) * 0.35;
    xs.push_back(x);
    ys.push_back(std::sin(1.7 * x) + 0.5 * x);
  }
  Hyperparameters theta;
  theta.mean_coeffs = {0.1, 0.4};
  theta.signal_std = 1.0;
  theta.length_scale = 0.5;
  theta.noise_std = 0.0;
  for (KernelKind kind : all_kernels()) {
    const GPModel model(kind, theta, grid_data(xs, ys));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const Prediction p = predict(model, {xs[i]});
      CHECK(std::fabs(p.mean - ys[i]) < 1e-8);
      CHECK(p.variance < 1e-6);
    }
    // Bounded variance everywhere.
    for (double x = -1.0; x <= 4.0; x += 0.37)
      CHECK(predict(model, {x}).variance <= theta.signal_std * theta.signal_std + 1e-10);
    // Midpoint variance dominates the (near-zero) training-point variance.
    const double mid = predict(model, {0.175}).variance;
    CHECK(mid >= predict(model, {0.0}).variance);
    CHECK(mid >= predict(model, {0.35}).variance);
  }
  // Far outside the data the posterior falls back to the linear prior mean.
  const GPModel far_model(KernelKind::Exponential, theta, grid_data(xs, ys));
  const double far = 3.0 + 50.0 * theta.length_scale;
  const Prediction p = predict(far_model, {far});
  CHECK(p.mean == doctest::Approx(0.1 + 0.4 * far).epsilon(1e-8));
  CHECK(p.variance == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("fitting linear data recovers the trend through the mean") {
  std::vector<double> xs, ys;
  for (int i = 0; i <= 10; ++i) {
    const double x = double(i) * 0.2;
    xs.push_back(x);
    ys.push_back(2.0 + 3.0 * x);
  }
  for (KernelKind kind : all_kernels()) {
    OptimizerConfig cfg;
    cfg.seed = 7;
    const GPModel model = fit(grid_data(xs, ys), kind, cfg);
    for (double x : {0.1, 0.95, 1.7})
      CHECK(predict(model, {x}).mean == doctest::Approx(2.0 + 3.0 * x).epsilon(1e-6));
  }
}

TEST_CASE("fit diagnostics record every restart and pick the best") {
  std::vector<double> xs, ys;
  for (int i = 0; i <= 9; ++i) {
    const double x = double(i) * 0.4;
    xs.push_back(x);
    ys.push_back(std::cos(x) + 0.1 * x * x);
  }
  OptimizerConfig cfg;
  cfg.seed = 11;
  const GPModel model = fit(grid_data(xs, ys), KernelKind::Matern52, cfg);
  const FitDiagnostics* diag = model.diagnostics();
  REQUIRE(diag != nullptr);
  CHECK(diag->restarts.size() == cfg.restarts);
  REQUIRE(diag->best_index < diag->restarts.size());
  for (const auto& r : diag->restarts) {
    CHECK(r.evaluations > 0);
    CHECK(r.log_likelihood <= diag->restarts[diag->best_index].log_likelihood + 1e-12);
  }
  // The chosen hyperparameters are the best restart's.
  CHECK(model.theta().length_scale ==
        diag->restarts[diag->best_index].theta.length_scale);

  // Noise floor: sigma_n never collapses below the configured fraction of std(y).
  double mean_y = 0.0, var_y = 0.0;
  for (double y : ys) mean_y += y;
  mean_y /= double(ys.size());
  for (double y : ys) var_y += (y - mean_y) * (y - mean_y);
  var_y /= double(ys.size());
  CHECK(model.theta().noise_std >= cfg.noise_floor_rel * std::sqrt(var_y) * 0.999);

  // Length scales below the input resolution are not identifiable.
  CHECK(model.theta().length_scale >= 0.4 * 0.999);
}

TEST_CASE("exact-interpolation fits carry zero noise") {
  std::vector<double> xs, ys;
  for (int i = 0; i <= 6; ++i) {
    const double x = double(i) * 0.5;
    xs.push_back(x);
    ys.push_back(std::exp(-x) * std::sin(2.0 * x));
  }
  OptimizerConfig cfg;
  cfg.seed = 3;
  cfg.exact_interpolation = true;
  const GPModel model = fit(grid_data(xs, ys), KernelKind::SquaredExponential, cfg);
  CHECK(model.theta().noise_std == 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(std::fabs(predict(model, {xs[i]}).mean - ys[i]) < 1e-8);
}

TEST_CASE("fitting is deterministic for a fixed seed") {
  std::vector<double> xs, ys;
  for (int i = 0; i <= 7; ++i) {
    const double x = double(i) * 0.3;
    xs.push_back(x);
    ys.push_back(std::sin(3.0 * x));
  }
  OptimizerConfig cfg;
  cfg.seed = 99;
  const GPModel a = fit(grid_data(xs, ys), KernelKind::Exponential, cfg);
  const GPModel b = fit(grid_data(xs, ys), KernelKind::Exponential, cfg);
  CHECK(a.theta().signal_std == b.theta().signal_std);
  CHECK(a.theta().length_scale == b.theta().length_scale);
  CHECK(a.theta().noise_std == b.theta().noise_std);
  CHECK(a.theta().mean_coeffs == b.theta().mean_coeffs);
}

TEST_CASE("degenerate training data is rejected") {
  GPData same;
  same.inputs = DenseMatrix(3, 1);  // three copies of the same input
  same.outputs = {0.0, 1.0, 2.0};
  CHECK_THROWS_AS(fit(same, KernelKind::SquaredExponential), DegenerateData);

  GPData nan_data = grid_data({0.0, 1.0}, {0.0, std::nan("")});
  CHECK_THROWS_AS(fit(nan_data, KernelKind::SquaredExponential), DegenerateData);
}

TEST_CASE("confidence intervals use the normal quantile") {
  CHECK(normal_band_quantile(0.95) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(normal_band_quantile(0.99) == doctest::Approx(2.5758293).epsilon(1e-6));
  CHECK(normal_band_quantile(0.6826894921) == doctest::Approx(1.0).epsilon(1e-6));

  const Interval i1 = confidence_interval(0.0, 1.0, 0.95);
  CHECK(i1.lo == doctest::Approx(-1.959964).epsilon(1e-6));
  CHECK(i1.hi == doctest::Approx(1.959964).epsilon(1e-6));
  const Interval i2 = confidence_interval(5.0, 4.0, 0.95);
  CHECK(i2.lo == doctest::Approx(5.0 - 2.0 * 1.959964).epsilon(1e-6));
  CHECK(i2.hi == doctest::Approx(5.0 + 2.0 * 1.959964).epsilon(1e-6));
  const Interval point = confidence_interval(3.0, 0.0, 0.95);
  CHECK(point.lo == 3.0);
  CHECK(point.hi == 3.0);

  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(confidence_interval(0.0, -1.0, 0.95), ConfigError);
}

TEST_CASE("negative posterior variances clamp to zero and are counted") {
  reset_variance_clamp_count();
  CHECK(variance_clamp_count() == 0);
}
