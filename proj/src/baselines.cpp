#include "pevs/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pevs/offline.hpp"

namespace pevs {

namespace {

void check_knots(const Vector& knots, const Vector& values, const char* who) {
  if (knots.size() < 2) throw DimensionMismatch(std::string(who) + ": need at least 2 knots");
  if (knots.size() != values.size())
    throw DimensionMismatch(std::string(who) + ": knot/value count mismatch");
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    if (!(knots[i] < knots[i + 1]))
      throw DuplicateKnots(std::string(who) + ": knots must be strictly increasing");
}

std::size_t find_interval(const Vector& knots, double x, const char* who) {
  if (x < knots.front() - 1e-12 || x > knots.back() + 1e-12)
    throw OutOfDomain(std::string(who) + ": query " + std::to_string(x) +
                      " outside the knot range");
  const auto it = std::upper_bound(knots.begin(), knots.end(), x);
  std::size_t i = it == knots.begin() ? 0 : std::size_t(it - knots.begin()) - 1;
  return std::min(i, knots.size() - 2);
}

}  // namespace

double linear_interp(const Vector& knots, const Vector& values, double x) {
  check_knots(knots, values, "linear_interp");
  const std::size_t i = find_interval(knots, x, "linear_interp");
  const double t = (x - knots[i]) / (knots[i + 1] - knots[i]);
  return values[i] + t * (values[i + 1] - values[i]);
}

SplineModel cubic_spline_fit(const Vector& knots, const Vector& values) {
  check_knots(knots, values, "cubic_spline_fit");
  const std::size_t n = knots.size() - 1;  // intervals
  Vector h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = knots[i + 1] - knots[i];

  // Natural-boundary moment system (second derivatives M, M_0 = M_n = 0).
  Vector moments(n + 1, 0.0);
  if (n >= 2) {
    const std::size_t m = n - 1;
    Vector diag(m), lower(m, 0.0), upper(m, 0.0), rhs(m);
    for (std::size_t i = 1; i <= m; ++i) {
      diag[i - 1] = (h[i - 1] + h[i]) / 3.0;
      if (i > 1) lower[i - 1] = h[i - 1] / 6.0;
      if (i < m) upper[i - 1] = h[i] / 6.0;
      rhs[i - 1] = (values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1];
    }
    // Thomas algorithm.
    for (std::size_t i = 1; i < m; ++i) {
      const double f = lower[i] / diag[i - 1];
      diag[i] -= f * upper[i - 1];
      rhs[i] -= f * rhs[i - 1];
    }
    moments[m] = rhs[m - 1] / diag[m - 1];
    for (std::size_t ii = m; ii-- > 1;)
      moments[ii] = (rhs[ii - 1] - upper[ii - 1] * moments[ii + 1]) / diag[ii - 1];
  }

  SplineModel model;
  model.knots = knots;
  model.values = values;
  model.a.resize(n);
  model.b.resize(n);
  model.c.resize(n);
  model.d.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    model.a[i] = values[i];
    model.b[i] = (values[i + 1] - values[i]) / h[i] - h[i] * (2.0 * moments[i] + moments[i + 1]) / 6.0;
    model.c[i] = moments[i] / 2.0;
    model.d[i] = (moments[i + 1] - moments[i]) / (6.0 * h[i]);
  }
  return model;
}

double cubic_spline_eval(const SplineModel& model, double x) {
  const std::size_t i = find_interval(model.knots, x, "cubic_spline_eval");
  const double t = x - model.knots[i];
  return model.a[i] + t * (model.b[i] + t * (model.c[i] + t * model.d[i]));
}

double bench_function(double mu) {
  return mu == 0.0 ? 2.0 : 1.0 + std::sin(mu) / mu;
}

namespace {

constexpr double kPi = std::numbers::pi;

struct ErrAccum {
  double sq = 0.0;
  double mx = 0.0;
  std::size_t count = 0;
  std::size_t excluded = 0;

  void add(double err) {
    sq += err * err;
    mx = std::max(mx, std::fabs(err));
    ++count;
  }
  double mse() const { return count ? sq / double(count) : 0.0; }
};

std::vector<SplineBenchRow> run_one_grid(const std::string& case_name, double step_size,
                                         const std::string& grid_id, const Vector& knots,
                                         const SplineBenchConfig& cfg) {
  Vector values(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i) values[i] = bench_function(knots[i]);

  const SplineModel spline = cubic_spline_fit(knots, values);

  GPData data;
  data.inputs = DenseMatrix(knots.size(), 1);
  for (std::size_t i = 0; i < knots.size(); ++i) data.inputs(i, 0) = knots[i];
  data.outputs = values;
  OptimizerConfig opt = cfg.opt;
  opt.seed = cfg.seed;
  const GPModel gp = fit(data, KernelKind::SquaredExponential, opt);

  const std::vector<double> test = range_grid(-kPi, cfg.test_step, 3.0 * kPi);
  ErrAccum gpr_err, cub_err, lin_err;
  for (double x : test) {
    const double fx = bench_function(x);
    gpr_err.add(predict(gp, {x}).mean - fx);
    if (x >= knots.front() && x <= knots.back()) {
      cub_err.add(cubic_spline_eval(spline, x) - fx);
      lin_err.add(linear_interp(knots, values, x) - fx);
    } else {
      ++cub_err.excluded;
      ++lin_err.excluded;
    }
  }

  std::vector<SplineBenchRow> rows;
  rows.push_back({case_name, "gpr-se", step_size, grid_id, gpr_err.mse(), gpr_err.mx,
                  gpr_err.excluded});
  rows.push_back({case_name, "cubic-spline", step_size, grid_id, cub_err.mse(), cub_err.mx,
                  cub_err.excluded});
  rows.push_back({case_name, "linear-interp", step_size, grid_id, lin_err.mse(), lin_err.mx,
                  lin_err.excluded});
  return rows;
}

}  // namespace

std::vector<SplineBenchRow> spline_vs_gpr_experiment(SplineCase which,
                                                     const SplineBenchConfig& cfg) {
  std::vector<SplineBenchRow> rows;
  if (which == SplineCase::UniformI) {
    for (double h : cfg.step_sizes) {
      if (!(h > 0.0)) throw ConfigError("spline_vs_gpr_experiment: step sizes must be positive");
      const Vector knots = range_grid(-kPi, h, 3.0 * kPi);
      auto part = run_one_grid("I", h, "h=" + std::to_string(h), knots, cfg);
      rows.insert(rows.end(), part.begin(), part.end());
    }
  } else {
    const Vector g = {-4.36, -4.04, -2.44, 1.73, 2.05, 4.94, 5.26, 8.14, 9.10};
    auto part = run_one_grid("II", 0.0, "G", g, cfg);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

}  // namespace pevs
