#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "splitstep/integrators.hpp"

namespace splitstep {

/// Stability quantities of one run, evaluated from the recorded fractional
/// states U_l^n (q = p/(p-1) is the conjugate exponent):
///   term1            max_n (1/s) sum_l ||U_l^n||_H^2
///   term2            (1/s) sum_{n,l} ||U_l^n - u^{n-1}||_H^2
///   term3            k sum_{n,l} (||U_l^n||_H + |U_l^n|_{V_l})^p
///   term4_surrogate  k^{1-q} sum_n ||u^n - u^{n-1}||_{*,q}^q
struct AprioriReport {
  int N = 0;
  double k = 0.0;
  double term1 = 0.0;
  double term2 = 0.0;
  double term3 = 0.0;
  double term4_surrogate = 0.0;
};

/// Requires a trajectory recorded with sublevels (one fractional state per
/// subdomain and step).
AprioriReport apriori_quantities(const SplitProblem& problem, const Trajectory& trajectory);

/// 1D problem with a closed-form solution used to measure convergence.
struct ManufacturedProblem {
  std::string name;
  OperatorSpec op; // unweighted, horizon set by the caller
  Interval extent{0.0, 1.0};
  std::function<double(double t, double x, double y)> exact;
  SourceDescriptor source;
};

/// Known problems: "heat_neumann" (p = 2, constant coefficient) and
/// "plaplace_steady_forcing" (p = 4, coefficient 1 + t/2), both with exact
/// solution exp(-t) cos(pi x) on (0, 1) and homogeneous flux boundaries.
ManufacturedProblem manufactured_problem(const std::string& name, double horizon);

GridFunction sample_function(const SpatialMesh& mesh,
                             const std::function<double(double t, double x, double y)>& fn,
                             double t);

/// Implicit Euler with the undecomposed operator on a grid with reference_N
/// steps; used as the reference when no closed form is available.
Trajectory reference_solve(const SplitProblem& problem, double T, int reference_N,
                           const RunOptions& options = {});

struct ErrorNorms {
  double linf_h = 0.0; // max_n ||e^n||_H
  double lp_v = 0.0;   // (k sum_{n>=1} (||e^n||_H + |e^n|_{V,p})^p)^{1/p}
  // same time-integrated norm per slab, with the chi_l-weighted seminorm
  std::vector<double> per_subdomain;
};

ErrorNorms error_norms(const Trajectory& trajectory, const SpatialMesh& mesh, double p,
                       const std::function<double(double t, double x, double y)>& exact,
                       const PartitionOfUnity* pou = nullptr);

/// Compares against a finer trajectory at the shared time levels; the
/// reference step count must be a multiple of the trajectory's.
ErrorNorms error_norms_vs_reference(const Trajectory& trajectory,
                                    const Trajectory& reference, const SpatialMesh& mesh,
                                    double p, const PartitionOfUnity* pou = nullptr);

/// Least-squares slope of log(err) against log(k) over (k, err) samples.
double estimate_order(const std::vector<std::pair<double, double>>& k_err);

struct ConvergencePoint {
  int N = 0;
  double k = 0.0;
  double err_linf_h = 0.0;
  double err_lp_v = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergencePoint> points;
  double order_linf_h = 0.0;
  double order_lp_v = 0.0;
  bool decreasing_linf_h = false;
  bool decreasing_lp_v = false;
};

ConvergenceReport convergence_study(const SplitProblem& problem, SchemeKind scheme,
                                    double T, const std::vector<int>& step_counts,
                                    const std::function<double(double t, double x, double y)>& exact,
                                    const RunOptions& options = {});

ConvergenceReport convergence_study(const SplitProblem& problem, SchemeKind scheme,
                                    double T, const std::vector<int>& step_counts,
                                    int reference_N, const RunOptions& options = {});

} // namespace splitstep
