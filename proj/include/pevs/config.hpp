#ifndef PEVS_CONFIG_HPP
#define PEVS_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pevs/gpr.hpp"
#include "pevs/offline.hpp"
#include "pevs/problems.hpp"

namespace pevs {

/// Flat key=value configuration with '#' comments.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  /// Normalized "key=value" lines in first-seen order, for archive embedding.
  std::string text() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::string origin_;
};

/// Parses a parameter grid spec:
///   "default"                  the paper's grid for the problem
///   "a:b:c"                    1D inclusive range with step b
///   "v1,v2,..."                explicit 1D list
///   "x1,y1; x2,y2; ..."        explicit 2D point list
std::vector<ParameterPoint> parse_parameter_grid(const std::string& spec, ProblemKind kind,
                                                 bool training, std::uint64_t seed);

struct RunConfig {
  ProblemKind problem = ProblemKind::Crossing;
  std::size_t n_per_dim = 32;
  std::size_t m_s = 1;
  std::vector<ParameterPoint> train_grid;
  std::vector<ParameterPoint> test_grid;
  std::vector<KernelKind> kernels;
  double pod_tol = 1e-8;
  std::uint64_t seed = 42;
  std::size_t restarts = 5;
  std::string out_dir = ".";
  std::string raw_text;
};

RunConfig load_run_config(const std::string& path);
RunConfig run_config_from(const Config& cfg);

/// Render a double with 17 significant digits (CSV round-trip exact).
std::string format_double(double v);

}  // namespace pevs

#endif
