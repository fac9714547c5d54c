#pragma once

#include <iosfwd>

#include "splitstep/analysis.hpp"
#include "splitstep/config.hpp"

namespace splitstep {

/// Fully assembled experiment: the split problem plus the closed-form
/// solution when the configured problem has one.
struct ExperimentSetup {
  ExperimentConfig cfg;
  SplitProblem problem;
  std::function<double(double t, double x, double y)> exact; // empty when none
};

/// Problems: heat_neumann and plaplace_steady_forcing (fixed data on (0, 1),
/// overriding p / kind / coefficient keys is rejected), zero (zero data, any
/// operator) and decay (cosine initial profile, no source, any operator).
ExperimentSetup build_setup(const ExperimentConfig& cfg);

/// Structural checks of the assembled experiment: partition of unity
/// invariants, source splitting, operator sum/monotonicity/coercivity/
/// continuity, resolvent nonexpansiveness.  The partition is a parameter so
/// a deliberately broken one can be diagnosed.
std::vector<AssumptionReport> run_validators(const ExperimentSetup& setup,
                                             const PartitionOfUnity& pou);

/// March one run; writes trajectory.csv and summary.txt.
/// Returns 0, or 2 when a resolvent solve fails (partial output is kept).
int cmd_run(const ExperimentConfig& cfg, std::ostream& log);

/// Step-size sweep against the exact or a fine reference solution; writes
/// convergence.csv and orders.txt.  Returns 0, or 3 when the primary error
/// is not strictly decreasing.
int cmd_converge(const ExperimentConfig& cfg, std::ostream& log);

/// Runs all validators; writes validate.txt.  Returns 0, or 4 when any
/// validator fails.  A partition override replaces the experiment's own
/// weights, so deliberately corrupted partitions can be diagnosed.
int cmd_validate(const ExperimentConfig& cfg, std::ostream& log,
                 const PartitionOfUnity* override_pou = nullptr);

/// Stability-term sweep; writes monitor.csv.  Returns 0 when every term
/// stays within a factor 2 across the sweep, 5 otherwise.
int cmd_monitor(const ExperimentConfig& cfg, std::ostream& log);

} // namespace splitstep
