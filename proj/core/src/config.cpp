#include "splitstep/config.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace splitstep {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double to_double(int line, const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty()) return x;
  } catch (const std::exception&) {
  }
  fail(line, key + " expects a number, got '" + v + "'");
}

int to_int(int line, const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (trim(v.substr(pos)).empty() && x >= INT_MIN && x <= INT_MAX) return int(x);
  } catch (const std::exception&) {
  }
  fail(line, key + " expects an integer, got '" + v + "'");
}

bool to_bool(int line, const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  fail(line, key + " expects a boolean, got '" + v + "'");
}

OperatorKind kind_from_string(int line, const std::string& v) {
  if (v == "p_laplace") return OperatorKind::p_laplace;
  if (v == "porous_medium") return OperatorKind::porous_medium;
  if (v == "anisotropic") return OperatorKind::anisotropic;
  if (v == "zero") return OperatorKind::zero;
  fail(line, "unknown operator kind '" + v + "'");
}

std::vector<int> to_sweep(int line, const std::string& v) {
  std::vector<int> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(line, "N_sweep has an empty entry");
    out.push_back(to_int(line, "N_sweep", item));
  }
  if (out.empty()) fail(line, "N_sweep expects a comma-separated list of step counts");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 1) fail(line, "N_sweep entries must be >= 1");
    if (i > 0 && out[i] <= out[i - 1]) fail(line, "N_sweep must increase strictly");
  }
  return out;
}

std::vector<std::pair<double, double>> to_table(int line, const std::string& v) {
  std::vector<std::pair<double, double>> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(line, "alpha_table has an empty entry");
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) fail(line, "alpha_table entries look like 't:value'");
    const double t = to_double(line, "alpha_table", trim(item.substr(0, colon)));
    const double a = to_double(line, "alpha_table", trim(item.substr(colon + 1)));
    if (!(a > 0.0)) fail(line, "alpha_table values must be positive");
    if (!out.empty() && !(t > out.back().first))
      fail(line, "alpha_table times must increase strictly");
    out.emplace_back(t, a);
  }
  if (out.empty()) fail(line, "alpha_table expects comma-separated 't:value' pairs");
  return out;
}

int env_threads() {
  const char* env = std::getenv("SPLITSTEP_THREADS");
  if (!env) return 1;
  try {
    std::size_t pos = 0;
    const std::string v(env);
    const long x = std::stol(v, &pos);
    if (trim(v.substr(pos)).empty() && x >= 1 && x <= 1024) return int(x);
  } catch (const std::exception&) {
  }
  throw ConfigError(std::string("SPLITSTEP_THREADS must be a positive integer, got '") +
                    env + "'");
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.threads = env_threads();

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(lineno, "empty key");
    if (value.empty()) fail(lineno, "empty value for '" + key + "'");

    if (key == "problem") {
      cfg.problem = value;
    } else if (key == "m") {
      cfg.m = to_int(lineno, key, value);
      if (cfg.m < 3) fail(lineno, "m must be >= 3");
    } else if (key == "extent_lo") {
      cfg.extent_lo = to_double(lineno, key, value);
    } else if (key == "extent_hi") {
      cfg.extent_hi = to_double(lineno, key, value);
    } else if (key == "T") {
      cfg.T = to_double(lineno, key, value);
      if (!(cfg.T > 0.0)) fail(lineno, "T must be positive");
    } else if (key == "N") {
      cfg.N = to_int(lineno, key, value);
      if (cfg.N < 1) fail(lineno, "N must be >= 1");
    } else if (key == "N_sweep") {
      cfg.N_sweep = to_sweep(lineno, value);
    } else if (key == "scheme") {
      try {
        cfg.scheme = scheme_from_string(value);
      } catch (const InvalidArgument& e) {
        fail(lineno, e.what());
      }
    } else if (key == "s") {
      cfg.s = to_int(lineno, key, value);
      if (cfg.s < 1) fail(lineno, "s must be >= 1");
    } else if (key == "overlap_fraction") {
      cfg.overlap_fraction = to_double(lineno, key, value);
      if (!(cfg.overlap_fraction > 0.0 && cfg.overlap_fraction < 0.5))
        fail(lineno, "overlap_fraction must lie in (0, 0.5)");
    } else if (key == "profile") {
      if (value != "ramp") fail(lineno, "unknown partition profile '" + value + "'");
      cfg.profile = value;
    } else if (key == "p") {
      const double p = to_double(lineno, key, value);
      if (!(p > 1.0)) fail(lineno, "p must be > 1");
      cfg.p = p;
      cfg.p_set = true;
    } else if (key == "kind") {
      cfg.kind = kind_from_string(lineno, value);
    } else if (key == "alpha_value") {
      const double a = to_double(lineno, key, value);
      if (!(a > 0.0)) fail(lineno, "alpha_value must be positive");
      cfg.alpha_value = a;
    } else if (key == "alpha_slope") {
      cfg.alpha_slope = to_double(lineno, key, value);
    } else if (key == "alpha_table") {
      cfg.alpha_table = to_table(lineno, value);
    } else if (key == "tol_abs") {
      cfg.resolvent.tol_abs = to_double(lineno, key, value);
      if (cfg.resolvent.tol_abs < 0.0) fail(lineno, "tol_abs must be >= 0");
    } else if (key == "tol_rel") {
      cfg.resolvent.tol_rel = to_double(lineno, key, value);
      if (cfg.resolvent.tol_rel < 0.0) fail(lineno, "tol_rel must be >= 0");
    } else if (key == "max_newton_iters") {
      cfg.resolvent.max_newton_iters = to_int(lineno, key, value);
      if (cfg.resolvent.max_newton_iters < 1) fail(lineno, "max_newton_iters must be >= 1");
    } else if (key == "jacobian_regularization") {
      cfg.resolvent.jacobian_regularization = to_double(lineno, key, value);
      if (cfg.resolvent.jacobian_regularization < 0.0)
        fail(lineno, "jacobian_regularization must be >= 0");
    } else if (key == "damping_factor") {
      cfg.resolvent.damping_factor = to_double(lineno, key, value);
      if (!(cfg.resolvent.damping_factor > 0.0 && cfg.resolvent.damping_factor < 1.0))
        fail(lineno, "damping_factor must lie in (0, 1)");
    } else if (key == "max_damping_halvings") {
      cfg.resolvent.max_damping_halvings = to_int(lineno, key, value);
      if (cfg.resolvent.max_damping_halvings < 0)
        fail(lineno, "max_damping_halvings must be >= 0");
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "threads") {
      cfg.threads = to_int(lineno, key, value);
      if (cfg.threads < 1) fail(lineno, "threads must be >= 1");
    } else if (key == "record_sublevels") {
      cfg.record_sublevels = to_bool(lineno, key, value);
    } else if (key == "reference") {
      if (value != "exact") {
        const int n = to_int(lineno, key, value);
        if (n < 2) fail(lineno, "reference must be 'exact' or a step count >= 2");
      }
      cfg.reference = value;
    } else {
      fail(lineno, "unknown key '" + key + "'");
    }
  }
  if (!(cfg.extent_hi > cfg.extent_lo))
    throw ConfigError("config: extent_hi must exceed extent_lo");
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

} // namespace splitstep
