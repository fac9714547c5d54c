#pragma once

#include <memory>

#include "splitstep/operators.hpp"

namespace splitstep {

struct ResolventConfig {
  double tol_abs = 1e-10;
  double tol_rel = 1e-10;
  int max_newton_iters = 50;
  double jacobian_regularization = 1e-12; // floor for degenerate Jacobian factors
  double damping_factor = 0.5;
  int max_damping_halvings = 30;
};

struct SolveStats {
  int newton_iterations = 0;
  double final_residual = 0.0; // max norm of u + tau A(t)u - b
  int damping_events = 0;      // total step halvings across the solve
  bool converged = false;
};

struct Trajectory;

/// Newton did not reach the residual tolerance, carrying the stats of the
/// failing solve; when thrown out of run(), step/part locate the failure and
/// partial holds the trajectory up to the last completed step.
class SolverFailure : public Error {
public:
  SolverFailure(const std::string& msg, SolveStats s) : Error(msg), stats(s) {}
  SolveStats stats;
  int step = -1;
  int part = -1;
  std::shared_ptr<const Trajectory> partial;
};

/// Non-finite values or a singular Jacobian interrupted the solve.
class NumericalBreakdown : public SolverFailure {
public:
  using SolverFailure::SolverFailure;
};

/// Solves (I + tau A(t)) u = b by damped Newton from the initial guess u = b
/// with the analytic Jacobian; the returned iterate satisfies
///   ||u + tau A(t)u - b||_inf <= tol_abs + tol_rel ||b||_inf.
/// tau = 0 (or a zero-kind operator) returns b unchanged.
std::pair<GridFunction, SolveStats> solve_resolvent(const OperatorSpec& spec,
                                                    const SpatialMesh& mesh, double tau,
                                                    double t, const GridFunction& b,
                                                    const ResolventConfig& cfg = {});

/// ||R(b1) - R(b2)||_H / ||b1 - b2||_H over random pairs; worst_margin is the
/// largest observed ratio, pass means it stays below 1 + 1e-8.
AssumptionReport check_nonexpansive(const OperatorSpec& spec, const SpatialMesh& mesh,
                                    double tau, double t, int pairs,
                                    const ResolventConfig& cfg, std::uint64_t seed);

} // namespace splitstep
