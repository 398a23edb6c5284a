#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "pevs/baselines.hpp"
#include "pevs/config.hpp"
#include "pevs/serialize.hpp"

namespace fs = std::filesystem;
using namespace pevs;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string kernel;
  std::size_t eigen_index = 1;
  bool eigen_index_set = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value configuration file")->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides the config)");
  cmd->add_option("--seed", args.seed, "random seed (overrides the config)")
      ->each([&args](const std::string&) { args.seed_set = true; });
}

RunConfig load_config(const CommonArgs& args) {
  Config cfg = Config::parse_file(args.config_path);
  if (args.seed_set)
    cfg = Config::parse_string(cfg.text() + "seed=" + std::to_string(args.seed) + "\n",
                               args.config_path);
  RunConfig rc = run_config_from(cfg);
  if (!args.out_dir.empty()) rc.out_dir = args.out_dir;
  return rc;
}

std::string mu_header(std::size_t d) {
  std::string h;
  for (std::size_t i = 0; i < d; ++i) h += "mu" + std::to_string(i + 1) + ",";
  return h;
}

std::string mu_cells(const ParameterPoint& mu) {
  std::string s;
  for (double v : mu) s += format_double(v) + ",";
  return s;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
  return os;
}

std::string snapshots_filename(const RunConfig& rc) {
  return "snapshots_" + problem_name(rc.problem) + ".pevsarc";
}

std::string model_stem(ProblemKind problem, std::size_t j, KernelKind kernel) {
  return problem_name(problem) + "_j" + std::to_string(j) + "_" + kernel_name(kernel);
}

int cmd_snapshots(const CommonArgs& args) {
  const RunConfig rc = load_config(args);
  fs::create_directories(rc.out_dir);
  const SnapshotSet snaps = generate_snapshots(rc.problem, rc.train_grid, rc.m_s, rc.n_per_dim);
  const fs::path path = fs::path(rc.out_dir) / snapshots_filename(rc);
  write_archive(path.string(), snapshots_to_archive(snaps, rc.raw_text));
  std::cout << "wrote " << path.string() << " (" << snaps.num_parameters() << " parameters, m_s="
            << snaps.num_indices() << ", n_h=" << snaps.mesh.num_unknowns() << ")\n";
  return 0;
}

int cmd_train(const CommonArgs& args, const std::string& snapshots_path) {
  const RunConfig rc = load_config(args);
  fs::create_directories(rc.out_dir);
  const fs::path in = snapshots_path.empty()
                          ? fs::path(rc.out_dir) / snapshots_filename(rc)
                          : fs::path(snapshots_path);
  const SnapshotSet snaps = snapshots_from_archive(read_archive(in.string()));
  if (snaps.problem != rc.problem)
    throw ConfigError("snapshot archive holds problem '" + problem_name(snaps.problem) +
                      "' but the config requests '" + problem_name(rc.problem) + "'");

  const KernelKind kernel =
      args.kernel.empty() ? rc.kernels.front() : kernel_from_name(args.kernel);
  const std::size_t j = args.eigen_index_set ? args.eigen_index : 1;

  SurrogateOptions opts;
  opts.pod_tol = rc.pod_tol;
  opts.opt.seed = rc.seed;
  opts.opt.restarts = rc.restarts;
  const SurrogateModel model = train_surrogate(snaps, j, kernel, opts);

  const fs::path path =
      fs::path(rc.out_dir) / ("model_" + model_stem(rc.problem, j, kernel) + ".pevsarc");
  write_archive(path.string(), model_to_archive(model, rc.raw_text));
  std::cout << "wrote " << path.string() << " (reduced dimension "
            << model.basis.reduced_dim() << ", " << model.models.size() << " models)\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& model_path,
                 const std::string& test_snapshots_path) {
  const RunConfig rc = load_config(args);
  fs::create_directories(rc.out_dir);
  const SurrogateModel model = model_from_archive(read_archive(model_path));
  if (model.problem != rc.problem)
    throw ConfigError("model archive holds problem '" + problem_name(model.problem) +
                      "' but the config requests '" + problem_name(rc.problem) + "'");

  SnapshotSet test;
  if (!test_snapshots_path.empty()) {
    test = snapshots_from_archive(read_archive(test_snapshots_path));
    if (test.problem != model.problem)
      throw ConfigError("test snapshot archive problem does not match the model");
    if (test.mesh.n_per_dim != model.mesh.n_per_dim)
      throw ConfigError("test snapshot mesh (n_per_dim=" +
                        std::to_string(test.mesh.n_per_dim) +
                        ") does not match the model mesh (n_per_dim=" +
                        std::to_string(model.mesh.n_per_dim) + ")");
    if (model.eigen_index > test.num_indices())
      throw ConfigError("test snapshot archive has m_s=" + std::to_string(test.num_indices()) +
                        " but the model targets eigen index " +
                        std::to_string(model.eigen_index));
  } else {
    test = generate_snapshots(rc.problem, rc.test_grid, model.eigen_index, model.mesh.n_per_dim);
  }
  const std::size_t j = model.eigen_index - 1;
  const std::size_t d = problem_dim(rc.problem);
  const std::string stem = model_stem(rc.problem, model.eigen_index, model.kernel);
  const fs::path out(rc.out_dir);

  const MetricsReport report =
      evaluate_eigenvalues(model, test.parameters, test.eigenvalues[j]);
  {
    auto os = open_out(out / ("eigenvalues_" + stem + ".csv"));
    os << mu_header(d) << "lambda_fem,lambda_gpr,rel_err,ci_lo,ci_hi\n";
    for (const MetricsRow& row : report.rows)
      os << mu_cells(row.mu) << format_double(row.lambda_ref) << ","
         << format_double(row.lambda_pred) << "," << format_double(row.rel_err) << ","
         << format_double(row.ci_lo) << "," << format_double(row.ci_hi) << "\n";
  }
  {
    auto os = open_out(out / ("rrmse_" + stem + ".csv"));
    os << "kernel,eigen_index,n_test,rrmse\n";
    os << kernel_name(report.kernel) << "," << report.eigen_index << "," << report.rows.size()
       << "," << format_double(report.rrmse_value) << "\n";
  }
  {
    auto os = open_out(out / ("coefficients_" + stem + ".csv"));
    os << mu_header(d);
    for (std::size_t k = 0; k < model.coefficient_count(); ++k) {
      const std::string tag = "c" + std::to_string(k + 1);
      os << tag << "_mean," << tag << "_lo," << tag << "_hi"
         << (k + 1 < model.coefficient_count() ? "," : "");
    }
    os << "\n";
    for (const ParameterPoint& mu : test.parameters) {
      const EigenpairPrediction pred = predict_eigenpair(model, mu);
      os << mu_cells(mu);
      for (std::size_t k = 0; k < pred.coefficient_means.size(); ++k) {
        const Interval ci =
            confidence_interval(pred.coefficient_means[k], pred.coefficient_variances[k], 0.95);
        os << format_double(pred.coefficient_means[k]) << "," << format_double(ci.lo) << ","
           << format_double(ci.hi) << (k + 1 < pred.coefficient_means.size() ? "," : "");
      }
      os << "\n";
    }
  }
  {
    // Eigenvector errors: summary CSV plus one reshaped grid file per test point.
    auto os = open_out(out / ("eigvec_errors_" + stem + ".csv"));
    os << mu_header(d) << "l2_err,max_err\n";
    DenseMatrix mass;
    if (!mass_is_parametric(rc.problem))
      mass = assemble_mass(rc.problem, test.parameters.front(), model.mesh.n_per_dim);
    const std::size_t cols =
        model.mesh.space_dim == 2 ? model.mesh.interior_per_dim() : test.eigenvectors[j].rows();
    for (std::size_t i = 0; i < test.parameters.size(); ++i) {
      const ParameterPoint& mu = test.parameters[i];
      if (mass_is_parametric(rc.problem))
        mass = assemble_mass(rc.problem, mu, model.mesh.n_per_dim);
      const EigenpairPrediction pred = predict_eigenpair(model, mu);
      const EigvecError err = eigvec_error(test.eigenvectors[j].col(i), pred.eigenvector, mass);
      os << mu_cells(mu) << format_double(err.l2) << "," << format_double(err.max) << "\n";
      auto grid = open_out(out / ("eigvec_err_" + stem + "_p" + std::to_string(i) + ".grid"));
      for (std::size_t r = 0; r < err.field.size(); ++r) {
        grid << format_double(err.field[r]);
        grid << ((r + 1) % cols == 0 ? '\n' : ' ');
      }
    }
  }
  std::cout << "rrmse=" << format_double(report.rrmse_value) << " over " << report.rows.size()
            << " test points\n";
  return 0;
}

int cmd_spline_bench(const CommonArgs& args) {
  const Config cfg = Config::parse_file(args.config_path);
  const std::string case_name = cfg.get_or("case", "I");
  SplineCase which;
  if (case_name == "I")
    which = SplineCase::UniformI;
  else if (case_name == "II")
    which = SplineCase::NonUniformII;
  else
    throw ConfigError("spline-bench: case must be 'I' or 'II', got '" + case_name + "'");

  SplineBenchConfig bench;
  bench.seed = args.seed_set ? args.seed : cfg.get_u64("seed", 0);
  bench.test_step = cfg.get_double("test_step", bench.test_step);
  if (cfg.has("step_sizes")) {
    bench.step_sizes.clear();
    std::istringstream ss(cfg.get("step_sizes"));
    std::string tok;
    while (std::getline(ss, tok, ','))
      bench.step_sizes.push_back(std::stod(tok));
  }
  const std::string out_dir =
      !args.out_dir.empty() ? args.out_dir : cfg.get_or("out_dir", ".");
  fs::create_directories(out_dir);

  const std::vector<SplineBenchRow> rows = spline_vs_gpr_experiment(which, bench);
  const fs::path path = fs::path(out_dir) / ("spline_bench_" + case_name + ".csv");
  auto os = open_out(path);
  os << "case,method,step_size,grid_id,mse,max_err,excluded_points\n";
  for (const SplineBenchRow& row : rows)
    os << row.case_name << "," << row.method << "," << format_double(row.step_size) << ","
       << row.grid_id << "," << format_double(row.mse) << "," << format_double(row.max_err)
       << "," << row.excluded_points << "\n";
  std::cout << "wrote " << path.string() << " (" << rows.size() << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-order eigenvalue surrogates for parametric PDEs"};
  app.require_subcommand(1);

  CommonArgs snap_args, train_args, eval_args, bench_args;
  std::string snapshots_path, model_path, test_snapshots_path;

  CLI::App* snap = app.add_subcommand("snapshots", "generate full-order eigenpair snapshots");
  add_common(snap, snap_args);

  CLI::App* train = app.add_subcommand("train", "train a surrogate from a snapshot archive");
  add_common(train, train_args);
  train->add_option("--snapshots", snapshots_path, "snapshot archive path");
  train->add_option("--kernel", train_args.kernel, "covariance kernel: se|exp|matern32|matern52");
  train->add_option("--eigen-index", train_args.eigen_index, "1-based eigenvalue index")
      ->each([&train_args](const std::string&) { train_args.eigen_index_set = true; });

  CLI::App* eval = app.add_subcommand("evaluate", "evaluate a surrogate on a test grid");
  add_common(eval, eval_args);
  eval->add_option("--model", model_path, "surrogate model archive")->required();
  eval->add_option("--test-snapshots", test_snapshots_path,
                   "precomputed test snapshot archive (else the config's test grid is solved)");

  CLI::App* bench = app.add_subcommand("spline-bench", "spline/GPR interpolation benchmark");
  add_common(bench, bench_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (snap->parsed()) return cmd_snapshots(snap_args);
    if (train->parsed()) return cmd_train(train_args, snapshots_path);
    if (eval->parsed()) return cmd_evaluate(eval_args, model_path, test_snapshots_path);
    if (bench->parsed()) return cmd_spline_bench(bench_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ArchiveError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
