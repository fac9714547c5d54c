#include "splitstep/integrators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <thread>
#include <utility>

namespace splitstep {

const char* to_string(SchemeKind scheme) {
  switch (scheme) {
    case SchemeKind::sum: return "sum_splitting";
    case SchemeKind::lie: return "lie_splitting";
    case SchemeKind::backward_euler: return "backward_euler";
  }
  return "?";
}

SchemeKind scheme_from_string(const std::string& name) {
  if (name == "sum_splitting") return SchemeKind::sum;
  if (name == "lie_splitting") return SchemeKind::lie;
  if (name == "backward_euler") return SchemeKind::backward_euler;
  throw InvalidArgument("unknown scheme '" + name +
                        "' (expected sum_splitting, lie_splitting or backward_euler)");
}

SplitProblem make_split_problem(const SpatialMesh& mesh, const OperatorSpec& whole,
                                const PartitionOfUnity& pou,
                                const SourceDescriptor& source, const GridFunction& u0) {
  validate_operator_spec(whole, mesh);
  if (!whole.weight.empty())
    throw InvalidArgument("make_split_problem: the undecomposed operator must be unweighted");
  if (u0.size() != mesh.node_count())
    throw InvalidArgument("make_split_problem: initial state size does not match mesh");
  for (double x : u0)
    if (!std::isfinite(x))
      throw InvalidArgument("make_split_problem: initial state contains non-finite entries");
  if (pou.s < 1 || int(pou.weights.size()) != pou.s)
    throw InvalidArgument("make_split_problem: malformed partition of unity");
  for (const GridFunction& w : pou.weights)
    if (w.size() != mesh.node_count())
      throw InvalidArgument("make_split_problem: partition weights do not match mesh");

  SplitProblem pb;
  pb.mesh = mesh;
  pb.whole = whole;
  pb.source = source;
  pb.u0 = u0;
  pb.pou = pou;
  pb.parts.reserve(pou.weights.size());
  for (const GridFunction& chi : pou.weights) {
    OperatorSpec part = whole;
    part.weight = chi;
    pb.parts.push_back(std::move(part));
  }
  pb.split_sources = split_source(source, pou);

  for (double t : {0.0, whole.horizon}) {
    const AssumptionReport rep = check_sum_property(pb.parts, pb.whole, pb.mesh, t, 3, 0x5eedull);
    if (!rep.pass)
      throw InvalidArgument("make_split_problem: subdomain operators do not sum back to "
                            "the undecomposed operator (" + rep.detail + ")");

    const GridFunction f = eval_source(pb.source, pb.mesh, t);
    GridFunction fsum(f.size(), 0.0);
    for (const SourceDescriptor& part : pb.split_sources) {
      const GridFunction fl = eval_source(part, pb.mesh, t);
      for (std::size_t i = 0; i < fsum.size(); ++i) fsum[i] += fl[i];
    }
    double scale = 1.0, gap = 0.0;
    for (std::size_t i = 0; i < fsum.size(); ++i) {
      scale = std::max(scale, std::abs(f[i]));
      gap = std::max(gap, std::abs(fsum[i] - f[i]));
    }
    if (gap > 1e-12 * scale)
      throw InvalidArgument("make_split_problem: split sources do not sum back to the "
                            "undecomposed source");
  }
  return pb;
}

namespace {

GridFunction resolvent_rhs(const SourceDescriptor& src, const SpatialMesh& mesh,
                           const TimeGrid& grid, int n, double tau,
                           const GridFunction& prev) {
  GridFunction b = averaged_source(src, mesh, grid, n);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = prev[i] + tau * b[i];
  return b;
}

void check_step_inputs(const SplitProblem& problem, const TimeGrid& grid, int n,
                       const GridFunction& prev) {
  if (n < 1 || n > grid.N) throw InvalidArgument("step index out of range");
  if (prev.size() != problem.mesh.node_count())
    throw InvalidArgument("state size does not match mesh");
  if (grid.T > problem.whole.horizon * (1.0 + 1e-12) + 1e-12)
    throw InvalidArgument("time grid extends past the operator horizon");
}

} // namespace

GridFunction backward_euler_step(const SplitProblem& problem, const TimeGrid& grid, int n,
                                 const GridFunction& prev, const ResolventConfig& cfg,
                                 SolveStats* stats) {
  check_step_inputs(problem, grid, n, prev);
  const double tn = grid.t(n);
  const GridFunction b = resolvent_rhs(problem.source, problem.mesh, grid, n, grid.k, prev);
  auto [u, st] = solve_resolvent(problem.whole, problem.mesh, grid.k, tn, b, cfg);
  if (stats) *stats = st;
  return u;
}

SumStepResult sum_splitting_step(const SplitProblem& problem, const TimeGrid& grid, int n,
                                 const GridFunction& prev, const ResolventConfig& cfg,
                                 int threads) {
  check_step_inputs(problem, grid, n, prev);
  if (threads < 1) throw InvalidArgument("sum_splitting_step: threads must be >= 1");
  const int s = problem.s();
  const double tn = grid.t(n);
  const double tau = double(s) * grid.k;

  SumStepResult result;
  result.parts.resize(s);
  result.stats.resize(s);
  std::vector<std::exception_ptr> errors(s);

  auto solve_part = [&](int l) {
    try {
      const GridFunction b =
          resolvent_rhs(problem.split_sources[l], problem.mesh, grid, n, tau, prev);
      auto [u, st] = solve_resolvent(problem.parts[l], problem.mesh, tau, tn, b, cfg);
      result.parts[l] = std::move(u);
      result.stats[l] = st;
    } catch (...) {
      errors[l] = std::current_exception();
    }
  };

  const int workers = std::min(threads, s);
  if (workers <= 1) {
    for (int l = 0; l < s; ++l) solve_part(l);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int l = next.fetch_add(1); l < s; l = next.fetch_add(1)) solve_part(l);
      });
    for (std::thread& th : pool) th.join();
  }

  for (int l = 0; l < s; ++l) {
    if (!errors[l]) continue;
    try {
      std::rethrow_exception(errors[l]);
    } catch (SolverFailure& e) {
      e.part = l;
      throw;
    }
  }

  // Fixed-order reduction keeps the average independent of the thread count.
  const double inv = 1.0 / double(s);
  GridFunction next_state = zero_function(problem.mesh);
  for (int l = 0; l < s; ++l)
    for (std::size_t i = 0; i < next_state.size(); ++i)
      next_state[i] += result.parts[l][i];
  for (double& x : next_state) x *= inv;
  result.next = std::move(next_state);
  return result;
}

GridFunction lie_splitting_step(const SplitProblem& problem, const TimeGrid& grid, int n,
                                const GridFunction& prev, const ResolventConfig& cfg,
                                std::vector<GridFunction>* stages,
                                std::vector<SolveStats>* stats) {
  check_step_inputs(problem, grid, n, prev);
  const int s = problem.s();
  const double tn = grid.t(n);
  if (stages) stages->clear();
  if (stats) stats->clear();
  GridFunction v = prev;
  for (int l = 0; l < s; ++l) {
    GridFunction b =
        resolvent_rhs(problem.split_sources[l], problem.mesh, grid, n, grid.k, v);
    try {
      auto [u, st] = solve_resolvent(problem.parts[l], problem.mesh, grid.k, tn, b, cfg);
      v = std::move(u);
      if (stats) stats->push_back(st);
    } catch (SolverFailure& e) {
      e.part = l;
      throw;
    }
    if (stages) stages->push_back(v);
  }
  return v;
}

Trajectory run(const SplitProblem& problem, const TimeGrid& grid, SchemeKind scheme,
               const RunOptions& options) {
  if (options.threads < 1) throw InvalidArgument("run: threads must be >= 1");
  check_step_inputs(problem, grid, 1, problem.u0);

  Trajectory tr;
  tr.grid = grid;
  tr.states.reserve(std::size_t(grid.N) + 1);
  tr.states.push_back(problem.u0);
  if (options.record_sublevels) tr.sublevels.reserve(grid.N);
  tr.step_stats.reserve(grid.N);

  for (int n = 1; n <= grid.N; ++n) {
    StepStats st;
    st.step = n;
    GridFunction next;
    std::vector<GridFunction> levels;
    try {
      switch (scheme) {
        case SchemeKind::sum: {
          SumStepResult r =
              sum_splitting_step(problem, grid, n, tr.states.back(), options.resolvent,
                                 options.threads);
          next = std::move(r.next);
          if (options.record_sublevels) levels = std::move(r.parts);
          for (const SolveStats& s : r.stats) {
            st.newton_iterations += s.newton_iterations;
            st.damping_events += s.damping_events;
            st.max_residual = std::max(st.max_residual, s.final_residual);
          }
          break;
        }
        case SchemeKind::lie: {
          std::vector<GridFunction> stages;
          std::vector<SolveStats> stats;
          next = lie_splitting_step(problem, grid, n, tr.states.back(), options.resolvent,
                                    options.record_sublevels ? &stages : nullptr, &stats);
          if (options.record_sublevels) levels = std::move(stages);
          for (const SolveStats& s : stats) {
            st.newton_iterations += s.newton_iterations;
            st.damping_events += s.damping_events;
            st.max_residual = std::max(st.max_residual, s.final_residual);
          }
          break;
        }
        case SchemeKind::backward_euler: {
          SolveStats s;
          next = backward_euler_step(problem, grid, n, tr.states.back(), options.resolvent,
                                     &s);
          st.newton_iterations = s.newton_iterations;
          st.damping_events = s.damping_events;
          st.max_residual = s.final_residual;
          if (options.record_sublevels) levels.push_back(next);
          break;
        }
      }
    } catch (SolverFailure& e) {
      e.step = n;
      e.partial = std::make_shared<const Trajectory>(std::move(tr));
      throw;
    }
    tr.states.push_back(std::move(next));
    if (options.record_sublevels) tr.sublevels.push_back(std::move(levels));
    tr.step_stats.push_back(st);
  }
  return tr;
}

namespace {

int clamp_index(double x, int lo, int hi) {
  return std::max(lo, std::min(hi, int(x)));
}

} // namespace

namespace {

void check_eval_time(const Trajectory& trajectory, double t) {
  if (trajectory.states.empty()) throw InvalidArgument("empty trajectory");
  const TimeGrid& g = trajectory.grid;
  if (t < -1e-9 * g.k || t > g.T + 1e-9 * g.k)
    throw InvalidArgument("evaluation time outside [0, T]");
}

} // namespace

GridFunction eval_piecewise_constant(const Trajectory& trajectory, double t) {
  const TimeGrid& g = trajectory.grid;
  check_eval_time(trajectory, t);
  const int idx = clamp_index(std::ceil(t / g.k - 1e-9), 0, g.N);
  return trajectory.states[std::size_t(idx)];
}

GridFunction eval_piecewise_linear(const Trajectory& trajectory, double t) {
  const TimeGrid& g = trajectory.grid;
  check_eval_time(trajectory, t);
  const double x = std::clamp(t / g.k, 0.0, double(g.N));
  const int n0 = clamp_index(std::floor(x), 0, g.N - 1);
  const double w = x - double(n0);
  const GridFunction& a = trajectory.states[std::size_t(n0)];
  const GridFunction& b = trajectory.states[std::size_t(n0) + 1];
  GridFunction out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - w) * a[i] + w * b[i];
  return out;
}

} // namespace splitstep
