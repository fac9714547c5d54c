#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "splitstep/integrators.hpp"

namespace splitstep {

/// Experiment description parsed from flat "key = value" text; '#' starts a
/// comment.  threads defaults to the SPLITSTEP_THREADS environment variable
/// when it is set, and an explicit key overrides it.
struct ExperimentConfig {
  std::string problem = "heat_neumann";
  int m = 257;             // nodes along axis 0
  double extent_lo = 0.0;
  double extent_hi = 1.0;
  double T = 1.0;
  int N = 64;
  std::vector<int> N_sweep; // step counts for converge / monitor
  SchemeKind scheme = SchemeKind::sum;
  int s = 2;               // subdomains
  double overlap_fraction = 0.125;
  std::string profile = "ramp";
  double p = 2.0;
  bool p_set = false;      // true when the key appeared explicitly
  std::optional<OperatorKind> kind;
  std::optional<double> alpha_value; // constant coefficient
  std::optional<double> alpha_slope; // coefficient 1 + slope * t
  std::vector<std::pair<double, double>> alpha_table; // tabulated (t, alpha)
  ResolventConfig resolvent;
  std::string output_dir = "out";
  int threads = 1;
  bool record_sublevels = false;
  std::string reference = "exact"; // "exact" or a reference step count
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

} // namespace splitstep
