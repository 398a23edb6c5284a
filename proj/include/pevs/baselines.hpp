#ifndef PEVS_BASELINES_HPP
#define PEVS_BASELINES_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "pevs/gpr.hpp"
#include "pevs/matrix.hpp"

namespace pevs {

/// Natural cubic spline: zero second derivative at both end knots.
struct SplineModel {
  Vector knots;   // strictly increasing
  Vector values;
  // Per-interval coefficients of a + b t + c t^2 + d t^3, t = x - knots[i].
  Vector a, b, c, d;
};

double linear_interp(const Vector& knots, const Vector& values, double x);

SplineModel cubic_spline_fit(const Vector& knots, const Vector& values);

double cubic_spline_eval(const SplineModel& model, double x);

enum class SplineCase { UniformI, NonUniformII };

struct SplineBenchConfig {
  std::vector<double> step_sizes = {2.0, 1.0, 0.5, 0.25};  // Case I
  double test_step = 0.01;
  std::uint64_t seed = 0;
  OptimizerConfig opt;
};

struct SplineBenchRow {
  std::string case_name;     // "I" or "II"
  std::string method;        // "gpr-se", "cubic-spline", "linear-interp"
  double step_size = 0.0;    // 0 for Case II (grid G)
  std::string grid_id;       // "h=<step>" or "G"
  double mse = 0.0;
  double max_err = 0.0;
  std::size_t excluded_points = 0;
};

/// The benchmark function 1 + sin(mu)/mu with the removable singularity f(0)=2.
double bench_function(double mu);

std::vector<SplineBenchRow> spline_vs_gpr_experiment(SplineCase which,
                                                     const SplineBenchConfig& cfg = {});

}  // namespace pevs

#endif
