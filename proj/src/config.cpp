#include "pevs/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pevs/errors.hpp"

namespace pevs {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& tok, const std::string& where) {
  const std::string t = trim(tok);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(where + ": '" + tok + "' is not a number");
  }
  if (used != t.size()) throw ConfigError(where + ": '" + tok + "' is not a number");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(s.substr(pos));
      break;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected key=value, got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    auto it = std::find_if(cfg.entries_.begin(), cfg.entries_.end(),
                           [&](const auto& kv) { return kv.first == key; });
    if (it != cfg.entries_.end())
      it->second = value;  // later lines win
    else
      cfg.entries_.emplace_back(key, value);
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_string(ss.str(), path);
}

bool Config::has(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& kv) { return kv.first == key; });
}

const std::string& Config::get(const std::string& key) const {
  for (const auto& kv : entries_)
    if (kv.first == key) return kv.second;
  throw ConfigError(origin_ + ": missing required key '" + key + "'");
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return parse_double(get(key), origin_ + ": key '" + key + "'");
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
  return static_cast<std::size_t>(get_u64(key, fallback));
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string t = trim(get(key));
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError(origin_ + ": key '" + key + "': '" + t +
                      "' is not a nonnegative integer");
  return v;
}

std::string Config::text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

std::vector<ParameterPoint> parse_parameter_grid(const std::string& spec, ProblemKind kind,
                                                 bool training, std::uint64_t seed) {
  const std::string s = trim(spec);
  const std::string where = "parameter grid '" + spec + "'";
  if (s.empty()) throw ConfigError(where + ": empty specification");
  if (s == "default") {
    const TrainTestSplit split = default_split(kind, seed);
    return training ? split.training : split.test;
  }
  const std::size_t d = problem_dim(kind);
  std::vector<ParameterPoint> points;
  if (s.find(';') != std::string::npos) {
    for (const std::string& tok : split(s, ';')) {
      if (trim(tok).empty()) continue;
      const std::vector<std::string> coords = split(tok, ',');
      if (coords.size() != d)
        throw ConfigError(where + ": point '" + tok + "' has " +
                          std::to_string(coords.size()) + " coordinates, expected " +
                          std::to_string(d));
      ParameterPoint mu;
      for (const std::string& c : coords) mu.push_back(parse_double(c, where));
      points.push_back(std::move(mu));
    }
  } else if (s.find(':') != std::string::npos) {
    if (d != 1)
      throw ConfigError(where + ": range syntax is 1D; use semicolon-separated points");
    const std::vector<std::string> parts = split(s, ':');
    if (parts.size() != 3) throw ConfigError(where + ": expected start:step:end");
    const double a = parse_double(parts[0], where);
    const double b = parse_double(parts[1], where);
    const double c = parse_double(parts[2], where);
    if (!(b > 0.0)) throw ConfigError(where + ": step must be positive");
    for (double v : range_grid(a, b, c)) points.push_back({v});
  } else {
    if (d != 1)
      throw ConfigError(where + ": comma lists are 1D; use semicolon-separated points");
    for (const std::string& tok : split(s, ','))
      points.push_back({parse_double(tok, where)});
  }
  if (points.empty()) throw ConfigError(where + ": no points");
  return points;
}

RunConfig run_config_from(const Config& cfg) {
  RunConfig rc;
  rc.problem = problem_from_name(cfg.get("problem"));
  rc.n_per_dim = cfg.get_size("n_per_dim", rc.n_per_dim);
  if (rc.n_per_dim < 4) throw ConfigError("n_per_dim must be at least 4");
  rc.m_s = cfg.get_size("m_s", rc.m_s);
  if (rc.m_s == 0) throw ConfigError("m_s must be at least 1");
  rc.seed = cfg.get_u64("seed", rc.seed);
  rc.restarts = cfg.get_size("restarts", rc.restarts);
  rc.pod_tol = cfg.get_double("pod_tol", rc.pod_tol);
  if (!(rc.pod_tol > 0.0)) throw ConfigError("pod_tol must be positive");
  rc.out_dir = cfg.get_or("out_dir", rc.out_dir);
  rc.train_grid =
      parse_parameter_grid(cfg.get_or("train_grid", "default"), rc.problem, true, rc.seed);
  rc.test_grid =
      parse_parameter_grid(cfg.get_or("test_grid", "default"), rc.problem, false, rc.seed);
  const ParameterBox box = parameter_space(rc.problem);
  for (const auto* grid : {&rc.train_grid, &rc.test_grid})
    for (const ParameterPoint& mu : *grid)
      if (!box.contains(mu)) {
        std::string coords;
        for (double v : mu) coords += (coords.empty() ? "" : ", ") + format_double(v);
        throw ConfigError("parameter (" + coords + ") is outside the admissible set of " +
                          problem_name(rc.problem));
      }
  const std::string kernels = cfg.get_or("kernels", "all");
  if (kernels == "all") {
    rc.kernels = all_kernels();
  } else {
    for (const std::string& tok : split(kernels, ','))
      rc.kernels.push_back(kernel_from_name(trim(tok)));
  }
  rc.raw_text = cfg.text();
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from(Config::parse_file(path));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace pevs
