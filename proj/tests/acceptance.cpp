// Acceptance gate for the splitting library: each criterion below drives the
// public API end to end at desk scale (1D, 257 nodes, unit horizon) and
// prints a single PASS/FAIL verdict.  Run with no arguments for the full
// gate, or with --criterion N to run one check in isolation.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "splitstep/analysis.hpp"
#include "splitstep/config.hpp"
#include "splitstep/decomposition.hpp"
#include "splitstep/experiment.hpp"
#include "splitstep/integrators.hpp"
#include "splitstep/mesh.hpp"
#include "splitstep/operators.hpp"
#include "splitstep/resolvent.hpp"

#include "oracle.hpp"

using namespace splitstep;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return std::string(buf);
}

SpatialMesh unit_mesh(int m) { return build_uniform_mesh(Interval{0.0, 1.0}, m); }

PartitionOfUnity unit_pou(const SpatialMesh& mesh, int s) {
  return build_partition_of_unity(mesh, build_overlapping_subdomains(mesh, s, 0.125));
}

ExperimentConfig desk_config(const std::string& problem, int s) {
  ExperimentConfig cfg;
  cfg.problem = problem;
  cfg.m = 257;
  cfg.s = s;
  return cfg;
}

GridFunction random_field(std::mt19937& gen, std::size_t m, double amp = 1.0) {
  std::uniform_real_distribution<double> dist(-amp, amp);
  GridFunction u(m);
  for (double& x : u) x = dist(gen);
  return u;
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double max_abs(const GridFunction& a) {
  double worst = 0.0;
  for (double x : a) worst = std::max(worst, std::abs(x));
  return worst;
}

// --- criterion 1: with one subdomain both splittings reduce to implicit Euler

Outcome single_subdomain_reduction() {
  double worst = 0.0;
  for (const char* name : {"heat_neumann", "plaplace_steady_forcing"}) {
    ExperimentSetup setup = build_setup(desk_config(name, 1));
    // The scheme identity under test holds at every step size; the step count
    // only has to keep the cold-started Newton solves of the quartic problem
    // inside their default iteration budget, which needs k fairly small here.
    const TimeGrid grid = make_time_grid(1.0, 512);
    RunOptions opts; // solver tolerance 1e-10 by default
    const Trajectory be = run(setup.problem, grid, SchemeKind::backward_euler, opts);
    const Trajectory sum = run(setup.problem, grid, SchemeKind::sum, opts);
    const Trajectory lie = run(setup.problem, grid, SchemeKind::lie, opts);
    for (int n = 0; n <= grid.N; ++n) {
      worst = std::max(worst, max_abs_diff(sum.states[n], be.states[n]));
      worst = std::max(worst, max_abs_diff(lie.states[n], be.states[n]));
    }
  }
  return {worst <= 1e-8, "max step deviation " + num(worst)};
}

// --- criterion 2: partition-of-unity invariants for s in {1, 2, 4}

Outcome partition_invariants() {
  const SpatialMesh mesh = unit_mesh(257);
  double worst_sum = 0.0;
  for (int s : {1, 2, 4}) {
    const PartitionOfUnity pou = unit_pou(mesh, s);
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
      double total = 0.0;
      for (int l = 0; l < s; ++l) {
        const double w = pou.weights[l][i];
        if (w < 0.0 || w > 1.0)
          return {false, "weight out of [0,1] at node " + std::to_string(i)};
        const bool inside = pou.subdomains[l].contains_axis0(int(i));
        if (inside && w <= 0.0)
          return {false, "weight vanishes inside subdomain " + std::to_string(l)};
        if (!inside && w != 0.0)
          return {false, "weight leaks outside subdomain " + std::to_string(l)};
        total += w;
      }
      worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    }
  }
  return {worst_sum <= 1e-14, "max |sum - 1| = " + num(worst_sum)};
}

// --- criterion 3: monotonicity, sum property, and source reconstruction

Outcome operator_structure() {
  const SpatialMesh mesh = unit_mesh(257);
  const PartitionOfUnity pou = unit_pou(mesh, 2);
  std::ostringstream detail;

  double worst_mono = 0.0;
  for (double p : {2.0, 4.0}) {
    OperatorSpec spec;
    spec.kind = OperatorKind::p_laplace;
    spec.p = p;
    spec.alpha = Alpha::affine(0.5);
    spec.horizon = 1.0;
    for (int weighted = 0; weighted < 2; ++weighted) {
      spec.weight = weighted ? pou.weights[0] : GridFunction{};
      const AssumptionReport r =
          check_monotonicity(spec, mesh, 0.5, 100, 91u + unsigned(10 * p) + unsigned(weighted));
      worst_mono = std::min(worst_mono, r.worst_margin);
      if (!r.pass || r.worst_margin < -1e-10)
        return {false, "monotonicity margin " + num(r.worst_margin) + " at p = " + num(p)};
    }

    spec.weight = {};
    std::vector<OperatorSpec> parts;
    for (int l = 0; l < pou.s; ++l) {
      OperatorSpec part = spec;
      part.weight = pou.weights[l];
      parts.push_back(part);
    }
    const AssumptionReport sum = check_sum_property(parts, spec, mesh, 0.5, 40, 17u);
    if (!sum.pass || sum.worst_margin > 1e-12)
      return {false, "sum-property residual " + num(sum.worst_margin) + " at p = " + num(p)};
  }

  ExperimentSetup setup = build_setup(desk_config("heat_neumann", 2));
  const std::vector<SourceDescriptor> parts = split_source(setup.problem.source, pou);
  double worst_split = 0.0;
  for (double t : {0.0, 0.37, 1.0}) {
    const GridFunction whole = eval_source(setup.problem.source, mesh, t);
    GridFunction total(mesh.node_count(), 0.0);
    for (const SourceDescriptor& part : parts) {
      const GridFunction load = eval_source(part, mesh, t);
      for (std::size_t i = 0; i < total.size(); ++i) total[i] += load[i];
    }
    const double scale = std::max(1.0, max_abs(whole));
    worst_split = std::max(worst_split, max_abs_diff(total, whole) / scale);
  }
  if (worst_split > 1e-14)
    return {false, "source reconstruction error " + num(worst_split)};

  detail << "monotonicity margin " << num(worst_mono) << ", source split " << num(worst_split);
  return {true, detail.str()};
}

// --- criterion 4: resolvent residual certificates, nonexpansiveness, oracle

Outcome resolvent_certificates() {
  const SpatialMesh mesh = unit_mesh(65);
  const PartitionOfUnity pou = unit_pou(mesh, 2);
  const ResolventConfig rc; // tol 1e-10 absolute and relative
  std::mt19937 gen(2026);

  double worst_excess = -1.0;
  for (double p : {2.0, 3.0, 4.0}) {
    OperatorSpec spec;
    spec.p = p;
    spec.alpha = Alpha::affine(0.5);
    spec.horizon = 1.0;
    for (double tau : {1e-3, 0.02, 0.1, 0.5}) {
      for (int trial = 0; trial < 3; ++trial) {
        spec.weight = (trial == 2) ? pou.weights[1] : GridFunction{};
        const GridFunction b = random_field(gen, mesh.node_count());
        const auto [u, stats] = solve_resolvent(spec, mesh, tau, 0.25, b, rc);
        if (!stats.converged) return {false, "solve reported no convergence"};
        const GridFunction au = apply_operator(spec, mesh, 0.25, u);
        GridFunction res(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) res[i] = u[i] + tau * au[i] - b[i];
        const double bound = rc.tol_abs + rc.tol_rel * max_abs(b);
        const double excess = max_abs(res) - bound * (1.0 + 1e-12);
        worst_excess = std::max(worst_excess, excess);
        if (excess > 0.0)
          return {false, "residual " + num(max_abs(res)) + " above bound " + num(bound)};
      }
    }
  }

  for (double p : {2.0, 4.0}) {
    OperatorSpec spec;
    spec.p = p;
    spec.horizon = 1.0;
    const AssumptionReport r = check_nonexpansive(spec, mesh, 0.05, 0.3, 20, rc, 7u);
    if (!r.pass || r.worst_margin > 1.0 + 1e-8)
      return {false, "contraction ratio " + num(r.worst_margin) + " at p = " + num(p)};
  }

  double worst_oracle = 0.0;
  for (int m : {33, 65}) {
    const SpatialMesh coarse = unit_mesh(m);
    const PartitionOfUnity cpou = unit_pou(coarse, 2);
    OperatorSpec spec;
    spec.p = 2.0;
    spec.horizon = 1.0;
    for (int weighted = 0; weighted < 2; ++weighted) {
      spec.weight = weighted ? cpou.weights[0] : GridFunction{};
      oracle::Vector chi_mid(std::size_t(m) - 1, 1.0);
      if (weighted)
        for (std::size_t c = 0; c + 1 < std::size_t(m); ++c)
          chi_mid[c] = 0.5 * (spec.weight[c] + spec.weight[c + 1]);
      const GridFunction b = random_field(gen, coarse.node_count());
      const auto [u, stats] = solve_resolvent(spec, coarse, 0.02, 0.0, b, rc);
      const oracle::Vector exact = oracle::resolvent_p2(m, coarse.spacing(0), chi_mid, 0.02, b);
      double diff = 0.0, scale = 1.0;
      for (int i = 0; i < m; ++i) {
        diff = std::max(diff, std::abs(u[i] - exact[i]));
        scale = std::max(scale, std::abs(exact[i]));
      }
      worst_oracle = std::max(worst_oracle, diff / scale);
    }
  }
  if (worst_oracle > 1e-9) return {false, "dense-oracle deviation " + num(worst_oracle)};

  return {true, "residual slack " + num(-worst_excess) + ", oracle deviation " + num(worst_oracle)};
}

// --- criterion 5: unforced runs dissipate, including the fractional levels

Outcome energy_decay() {
  double worst = 0.0;
  for (double p : {2.0, 4.0}) {
    for (int s : {1, 2, 4}) {
      ExperimentConfig cfg = desk_config("decay", s);
      cfg.p = p;
      cfg.p_set = true;
      ExperimentSetup setup = build_setup(cfg);
      RunOptions opts;
      opts.record_sublevels = true;
      const Trajectory tr =
          run(setup.problem, make_time_grid(1.0, 16), SchemeKind::sum, opts);
      for (std::size_t n = 1; n < tr.states.size(); ++n) {
        const double prev = h_norm(setup.problem.mesh, tr.states[n - 1]);
        const double cur = h_norm(setup.problem.mesh, tr.states[n]);
        worst = std::max(worst, cur - prev);
        if (cur > prev + 1e-10)
          return {false, "H-norm grew by " + num(cur - prev) + " at step " +
                             std::to_string(n) + " (p = " + num(p) + ", s = " +
                             std::to_string(s) + ")"};
        double mean_sq = 0.0;
        for (const GridFunction& level : tr.sublevels[n - 1]) {
          const double nl = h_norm(setup.problem.mesh, level);
          mean_sq += nl * nl;
        }
        mean_sq /= double(s);
        if (mean_sq > prev * prev + 1e-10)
          return {false, "fractional mean square " + num(mean_sq) + " exceeds " +
                             num(prev * prev) + " at step " + std::to_string(n)};
      }
    }
  }
  return {true, "worst H-norm increment " + num(worst)};
}

// --- criterion 6: the four monitored stability terms stay within factor 2

Outcome apriori_boundedness() {
  ExperimentSetup setup = build_setup(desk_config("heat_neumann", 2));
  RunOptions opts;
  opts.record_sublevels = true;
  double lo[4], hi[4];
  for (int j = 0; j < 4; ++j) {
    lo[j] = std::numeric_limits<double>::infinity();
    hi[j] = 0.0;
  }
  for (int N : {16, 32, 64, 128}) {
    const Trajectory tr = run(setup.problem, make_time_grid(1.0, N), SchemeKind::sum, opts);
    const AprioriReport r = apriori_quantities(setup.problem, tr);
    const double terms[4] = {r.term1, r.term2, r.term3, r.term4_surrogate};
    for (int j = 0; j < 4; ++j) {
      lo[j] = std::min(lo[j], terms[j]);
      hi[j] = std::max(hi[j], terms[j]);
    }
  }
  std::ostringstream detail;
  bool ok = true;
  for (int j = 0; j < 4; ++j) {
    const double ratio = (hi[j] <= 1e-300) ? 1.0 : hi[j] / lo[j];
    if (j) detail << ", ";
    detail << "term" << (j + 1) << " ratio " << num(ratio);
    ok = ok && ratio < 2.0;
  }
  return {ok, detail.str()};
}

// --- criterion 7: first-order convergence and reference-based decrease

Outcome convergence() {
  const std::vector<int> sweep = {16, 32, 64, 128};
  std::ostringstream detail;

  ExperimentSetup heat = build_setup(desk_config("heat_neumann", 2));
  const ConvergenceReport sum_report =
      convergence_study(heat.problem, SchemeKind::sum, 1.0, sweep, heat.exact);
  double worst_ratio = 0.0;
  for (std::size_t i = 1; i < sum_report.points.size(); ++i) {
    const double ratio = sum_report.points[i].err_linf_h / sum_report.points[i - 1].err_linf_h;
    worst_ratio = std::max(worst_ratio, ratio);
  }
  if (!sum_report.decreasing_linf_h || worst_ratio > 0.75)
    return {false, "split-scheme error ratio " + num(worst_ratio)};

  const ConvergenceReport be_report =
      convergence_study(heat.problem, SchemeKind::backward_euler, 1.0, sweep, heat.exact);
  if (be_report.order_linf_h < 0.9 || be_report.order_linf_h > 1.1)
    return {false, "implicit Euler order " + num(be_report.order_linf_h)};

  ExperimentSetup quartic = build_setup(desk_config("plaplace_steady_forcing", 2));
  const ConvergenceReport ref_report =
      convergence_study(quartic.problem, SchemeKind::sum, 1.0, sweep, 1024);
  if (!ref_report.decreasing_linf_h) {
    std::ostringstream errs;
    for (const ConvergencePoint& pt : ref_report.points) errs << ' ' << num(pt.err_linf_h);
    return {false, "reference-based errors not decreasing:" + errs.str()};
  }

  detail << "worst error ratio " << num(worst_ratio) << ", implicit Euler order "
         << num(be_report.order_linf_h);
  return {true, detail.str()};
}

// --- criterion 8: the residual is the gradient of the discrete energy

Outcome energy_gradient_consistency() {
  const SpatialMesh mesh = unit_mesh(257);
  std::mt19937 gen(4096);
  const double eps = 1e-5;
  double worst = 0.0;
  for (double p : {2.0, 4.0}) {
    OperatorSpec spec;
    spec.p = p;
    spec.alpha = Alpha::affine(0.5);
    spec.horizon = 1.0;
    for (int trial = 0; trial < 10; ++trial) {
      const GridFunction u = random_field(gen, mesh.node_count());
      const GridFunction dir = random_field(gen, mesh.node_count());
      GridFunction up = u, um = u;
      for (std::size_t i = 0; i < u.size(); ++i) {
        up[i] += eps * dir[i];
        um[i] -= eps * dir[i];
      }
      const double fd = (operator_energy(spec, mesh, 0.3, up) -
                         operator_energy(spec, mesh, 0.3, um)) /
                        (2.0 * eps);
      const double pairing =
          h_inner(mesh, apply_operator(spec, mesh, 0.3, u), dir);
      const double rel = std::abs(fd - pairing) / std::max({std::abs(pairing), std::abs(fd), 1e-10});
      worst = std::max(worst, rel);
      if (rel > 1e-6)
        return {false, "gradient mismatch " + num(rel) + " at p = " + num(p)};
    }
  }
  return {true, "worst relative mismatch " + num(worst)};
}

// --- criterion 9: runs are byte-identical across worker counts

Outcome thread_determinism() {
  std::string baseline_traj, baseline_summary;
  for (int threads : {1, 2, 4}) {
    ExperimentConfig cfg = desk_config("heat_neumann", 4);
    cfg.N = 16;
    cfg.threads = threads;
    cfg.output_dir = "acc_out_threads_" + std::to_string(threads);
    std::ostringstream log;
    if (cmd_run(cfg, log) != 0) return {false, "run failed with " + std::to_string(threads) + " workers"};
    auto slurp = [](const std::string& path) {
      std::ifstream in(path, std::ios::binary);
      std::ostringstream buf;
      buf << in.rdbuf();
      return buf.str();
    };
    const std::string traj = slurp(cfg.output_dir + "/trajectory.csv");
    const std::string summary = slurp(cfg.output_dir + "/summary.txt");
    if (traj.empty()) return {false, "missing trajectory output"};
    if (threads == 1) {
      baseline_traj = traj;
      baseline_summary = summary;
    } else if (traj != baseline_traj || summary != baseline_summary) {
      return {false, "output differs between 1 and " + std::to_string(threads) + " workers"};
    }
  }
  return {true, "trajectory and summary bytes identical"};
}

struct Criterion {
  int id;
  const char* label;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "single-subdomain reduction", single_subdomain_reduction},
    {2, "partition invariants", partition_invariants},
    {3, "operator structure", operator_structure},
    {4, "resolvent certificates", resolvent_certificates},
    {5, "energy decay", energy_decay},
    {6, "a priori boundedness", apriori_boundedness},
    {7, "convergence", convergence},
    {8, "energy gradient consistency", energy_gradient_consistency},
    {9, "thread determinism", thread_determinism},
};

} // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    std::string value;
    if (arg == "--criterion" && i + 1 < argc) {
      value = argv[++i];
    } else if (arg.rfind("--criterion=", 0) == 0) {
      value = arg.substr(std::strlen("--criterion="));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 64;
    }
    try {
      selected.insert(std::stoi(value));
    } catch (const std::exception&) {
      std::fprintf(stderr, "not a criterion number: '%s'\n", value.c_str());
      return 64;
    }
  }

  int failures = 0;
  for (const Criterion& c : kCriteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %s: %s (%s)\n", c.id, c.label, out.pass ? "PASS" : "FAIL",
                out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
