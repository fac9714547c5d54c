#pragma once

#include <string>
#include <vector>

#include "splitstep/decomposition.hpp"
#include "splitstep/mesh.hpp"
#include "splitstep/operators.hpp"
#include "splitstep/resolvent.hpp"

namespace splitstep {

enum class SchemeKind { sum, lie, backward_euler };

const char* to_string(SchemeKind scheme);
SchemeKind scheme_from_string(const std::string& name);

/// Evolution problem u' + A(t)u = f split over an overlapping decomposition:
/// whole is the undecomposed operator, parts its chi_l-weighted copies, and
/// split_sources the matching weighted copies of the source.
struct SplitProblem {
  SpatialMesh mesh;
  OperatorSpec whole;
  std::vector<OperatorSpec> parts;
  SourceDescriptor source;
  std::vector<SourceDescriptor> split_sources;
  GridFunction u0;
  PartitionOfUnity pou;
  int s() const { return int(parts.size()); }
};

/// Builds the weighted copies from the partition of unity and verifies that
/// they sum back to the undecomposed operator on random fields.
SplitProblem make_split_problem(const SpatialMesh& mesh, const OperatorSpec& whole,
                                const PartitionOfUnity& pou,
                                const SourceDescriptor& source, const GridFunction& u0);

struct StepStats {
  int step = 0;
  int newton_iterations = 0; // summed over the fractional solves of the step
  int damping_events = 0;
  double max_residual = 0.0; // worst final Newton residual among the solves
};

struct Trajectory {
  TimeGrid grid;
  std::vector<GridFunction> states; // N+1 entries, states[n] at t_n
  // One entry per step when recorded: the s fractional states of that step
  // (the single solution state for the unsplit scheme).
  std::vector<std::vector<GridFunction>> sublevels;
  std::vector<StepStats> step_stats;
};

struct RunOptions {
  ResolventConfig resolvent;
  int threads = 1;
  bool record_sublevels = false;
};

/// One implicit Euler step with the undecomposed operator:
/// (I + k A(t_n)) u_n = u_{n-1} + k f_n.
GridFunction backward_euler_step(const SplitProblem& problem, const TimeGrid& grid, int n,
                                 const GridFunction& prev, const ResolventConfig& cfg,
                                 SolveStats* stats = nullptr);

struct SumStepResult {
  GridFunction next;
  std::vector<GridFunction> parts; // U_l, one per subdomain
  std::vector<SolveStats> stats;
};

/// One sum splitting step: the s resolvent problems
/// (I + s k A_l(t_n)) U_l = u_{n-1} + s k f_{l,n} are independent and solved
/// concurrently on up to `threads` workers; u_n = (1/s) sum_l U_l is reduced
/// in fixed subdomain order regardless of the thread count.
SumStepResult sum_splitting_step(const SplitProblem& problem, const TimeGrid& grid, int n,
                                 const GridFunction& prev, const ResolventConfig& cfg,
                                 int threads);

/// One Lie splitting step: sequential sweep
/// V_l = (I + k A_l(t_n))^{-1} (V_{l-1} + k f_{l,n}), u_n = V_s.
GridFunction lie_splitting_step(const SplitProblem& problem, const TimeGrid& grid, int n,
                                const GridFunction& prev, const ResolventConfig& cfg,
                                std::vector<GridFunction>* stages = nullptr,
                                std::vector<SolveStats>* stats = nullptr);

/// Marches the scheme over the whole grid.  A failing solve is rethrown with
/// its step and subdomain indices set and the completed prefix of the
/// trajectory attached.
Trajectory run(const SplitProblem& problem, const TimeGrid& grid, SchemeKind scheme,
               const RunOptions& options = {});

/// Value of the piecewise-constant (right-continuous) time interpolant at t.
GridFunction eval_piecewise_constant(const Trajectory& trajectory, double t);

/// Value of the piecewise-linear time interpolant at t.
GridFunction eval_piecewise_linear(const Trajectory& trajectory, double t);

} // namespace splitstep
