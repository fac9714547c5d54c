#include "splitstep/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace splitstep {

namespace {

constexpr double kPi = 3.14159265358979323846;

} // namespace

AprioriReport apriori_quantities(const SplitProblem& problem, const Trajectory& trajectory) {
  const int N = trajectory.grid.N;
  const int s = problem.s();
  if (int(trajectory.states.size()) != N + 1)
    throw InvalidArgument("apriori_quantities: trajectory state count does not match grid");
  if (int(trajectory.sublevels.size()) != N)
    throw InvalidArgument(
        "apriori_quantities: trajectory was recorded without fractional states");
  const SpatialMesh& mesh = problem.mesh;
  const double p = problem.whole.p;
  const double q = p / (p - 1.0);
  const double k = trajectory.grid.k;

  AprioriReport rep;
  rep.N = N;
  rep.k = k;
  const double inv_s = 1.0 / double(s);
  for (int n = 1; n <= N; ++n) {
    const auto& levels = trajectory.sublevels[std::size_t(n) - 1];
    if (int(levels.size()) != s)
      throw InvalidArgument("apriori_quantities: fractional state count does not match "
                            "the decomposition");
    const GridFunction& prev = trajectory.states[std::size_t(n) - 1];
    double sq = 0.0, inc = 0.0;
    for (int l = 0; l < s; ++l) {
      const GridFunction& ul = levels[std::size_t(l)];
      const double norm_h = h_norm(mesh, ul);
      sq += norm_h * norm_h;
      GridFunction d(ul.size());
      for (std::size_t i = 0; i < ul.size(); ++i) d[i] = ul[i] - prev[i];
      const double dn = h_norm(mesh, d);
      inc += dn * dn;
      const double semi = gradient_seminorm(mesh, ul, p, &problem.pou.weights[std::size_t(l)]);
      rep.term3 += k * std::pow(norm_h + semi, p);
    }
    rep.term1 = std::max(rep.term1, inv_s * sq);
    rep.term2 += inv_s * inc;

    GridFunction dstate(prev.size());
    const GridFunction& cur = trajectory.states[std::size_t(n)];
    for (std::size_t i = 0; i < prev.size(); ++i) dstate[i] = cur[i] - prev[i];
    rep.term4_surrogate +=
        std::pow(k, 1.0 - q) * std::pow(dual_norm_surrogate(mesh, dstate, q), q);
  }
  return rep;
}

ManufacturedProblem manufactured_problem(const std::string& name, double horizon) {
  if (!(horizon > 0.0))
    throw InvalidArgument("manufactured_problem: horizon must be positive");
  ManufacturedProblem mp;
  mp.name = name;
  mp.extent = Interval{0.0, 1.0};
  mp.op.kind = OperatorKind::p_laplace;
  mp.op.horizon = horizon;
  if (name == "heat_neumann") {
    mp.op.p = 2.0;
    mp.op.alpha = Alpha::constant(1.0);
    mp.exact = [](double t, double x, double) { return std::exp(-t) * std::cos(kPi * x); };
    mp.source.f0 = [](double t, double x, double) {
      return (kPi * kPi - 1.0) * std::exp(-t) * std::cos(kPi * x);
    };
  } else if (name == "plaplace_steady_forcing") {
    mp.op.p = 4.0;
    mp.op.alpha = Alpha::affine(0.5); // 1 + t/2
    mp.exact = [](double t, double x, double) { return std::exp(-t) * std::cos(kPi * x); };
    mp.source.f0 = [](double t, double x, double) {
      const double c = std::cos(kPi * x), sn = std::sin(kPi * x);
      const double pi4 = kPi * kPi * kPi * kPi;
      return -std::exp(-t) * c +
             3.0 * pi4 * (1.0 + 0.5 * t) * std::exp(-3.0 * t) * sn * sn * c;
    };
  } else {
    throw ConfigError("unknown manufactured problem '" + name +
                      "' (expected heat_neumann or plaplace_steady_forcing)");
  }
  return mp;
}

GridFunction sample_function(const SpatialMesh& mesh,
                             const std::function<double(double t, double x, double y)>& fn,
                             double t) {
  if (!fn) throw InvalidArgument("sample_function: empty function");
  GridFunction v = zero_function(mesh);
  const int m0 = mesh.nodes_along(0);
  const int m1 = (mesh.dimension() == 2) ? mesh.nodes_along(1) : 1;
  for (int j = 0; j < m1; ++j) {
    const double y = (mesh.dimension() == 2) ? mesh.coord(1, j) : 0.0;
    for (int i = 0; i < m0; ++i) v[mesh.index(i, j)] = fn(t, mesh.coord(0, i), y);
  }
  return v;
}

Trajectory reference_solve(const SplitProblem& problem, double T, int reference_N,
                           const RunOptions& options) {
  return run(problem, make_time_grid(T, reference_N), SchemeKind::backward_euler, options);
}

namespace {

ErrorNorms accumulate_errors(const Trajectory& trajectory, const SpatialMesh& mesh,
                             double p, const std::function<GridFunction(int)>& target,
                             const PartitionOfUnity* pou) {
  const int N = trajectory.grid.N;
  ErrorNorms norms;
  std::vector<double> vint_l;
  if (pou) {
    norms.per_subdomain.assign(pou->weights.size(), 0.0);
    vint_l.assign(pou->weights.size(), 0.0);
  }
  double vint = 0.0;
  for (int n = 0; n <= N; ++n) {
    const GridFunction ref = target(n);
    const GridFunction& u = trajectory.states[std::size_t(n)];
    GridFunction e(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) e[i] = u[i] - ref[i];
    const double eh = h_norm(mesh, e);
    norms.linf_h = std::max(norms.linf_h, eh);
    if (n < 1) continue;
    vint += std::pow(eh + gradient_seminorm(mesh, e, p), p);
    if (pou)
      for (std::size_t l = 0; l < pou->weights.size(); ++l)
        vint_l[l] += std::pow(eh + gradient_seminorm(mesh, e, p, &pou->weights[l]), p);
  }
  const double k = trajectory.grid.k;
  norms.lp_v = std::pow(k * vint, 1.0 / p);
  for (std::size_t l = 0; l < vint_l.size(); ++l)
    norms.per_subdomain[l] = std::pow(k * vint_l[l], 1.0 / p);
  return norms;
}

} // namespace

ErrorNorms error_norms(const Trajectory& trajectory, const SpatialMesh& mesh, double p,
                       const std::function<double(double t, double x, double y)>& exact,
                       const PartitionOfUnity* pou) {
  if (int(trajectory.states.size()) != trajectory.grid.N + 1)
    throw InvalidArgument("error_norms: trajectory state count does not match grid");
  return accumulate_errors(
      trajectory, mesh, p,
      [&](int n) { return sample_function(mesh, exact, trajectory.grid.t(n)); }, pou);
}

ErrorNorms error_norms_vs_reference(const Trajectory& trajectory,
                                    const Trajectory& reference, const SpatialMesh& mesh,
                                    double p, const PartitionOfUnity* pou) {
  if (int(trajectory.states.size()) != trajectory.grid.N + 1 ||
      int(reference.states.size()) != reference.grid.N + 1)
    throw InvalidArgument("error_norms_vs_reference: state count does not match grid");
  if (reference.grid.N % trajectory.grid.N != 0)
    throw InvalidArgument("error_norms_vs_reference: reference step count must be a "
                          "multiple of the trajectory's");
  if (reference.states.front().size() != trajectory.states.front().size())
    throw InvalidArgument("error_norms_vs_reference: meshes differ");
  const int stride = reference.grid.N / trajectory.grid.N;
  return accumulate_errors(
      trajectory, mesh, p,
      [&](int n) { return reference.states[std::size_t(n) * std::size_t(stride)]; }, pou);
}

double estimate_order(const std::vector<std::pair<double, double>>& k_err) {
  if (k_err.size() < 3)
    throw InvalidArgument("estimate_order: need at least three samples");
  double sx = 0.0, sy = 0.0;
  for (const auto& [k, err] : k_err) {
    if (!(k > 0.0) || !(err > 0.0))
      throw InvalidArgument("estimate_order: samples must be positive");
    sx += std::log(k);
    sy += std::log(err);
  }
  const double mx = sx / double(k_err.size()), my = sy / double(k_err.size());
  double num = 0.0, den = 0.0;
  for (const auto& [k, err] : k_err) {
    const double dx = std::log(k) - mx;
    num += dx * (std::log(err) - my);
    den += dx * dx;
  }
  if (den == 0.0) throw InvalidArgument("estimate_order: samples share one step size");
  return num / den;
}

namespace {

ConvergenceReport study(const SplitProblem& problem, SchemeKind scheme, double T,
                        const std::vector<int>& step_counts,
                        const std::function<ErrorNorms(const Trajectory&)>& measure,
                        const RunOptions& options) {
  if (step_counts.size() < 3)
    throw InvalidArgument("convergence_study: need at least three step counts");
  for (std::size_t i = 1; i < step_counts.size(); ++i)
    if (step_counts[i] <= step_counts[i - 1])
      throw InvalidArgument("convergence_study: step counts must increase strictly");
  ConvergenceReport report;
  std::vector<std::pair<double, double>> kh, kv;
  for (int N : step_counts) {
    const TimeGrid grid = make_time_grid(T, N);
    const Trajectory tr = run(problem, grid, scheme, options);
    const ErrorNorms norms = measure(tr);
    report.points.push_back(ConvergencePoint{N, grid.k, norms.linf_h, norms.lp_v});
    kh.emplace_back(grid.k, norms.linf_h);
    kv.emplace_back(grid.k, norms.lp_v);
  }
  auto fit = [](const std::vector<std::pair<double, double>>& kv_pairs) {
    for (const auto& [k, err] : kv_pairs)
      if (!(err > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return estimate_order(kv_pairs);
  };
  report.order_linf_h = fit(kh);
  report.order_lp_v = fit(kv);
  report.decreasing_linf_h = report.decreasing_lp_v = true;
  for (std::size_t i = 1; i < report.points.size(); ++i) {
    if (!(report.points[i].err_linf_h < report.points[i - 1].err_linf_h))
      report.decreasing_linf_h = false;
    if (!(report.points[i].err_lp_v < report.points[i - 1].err_lp_v))
      report.decreasing_lp_v = false;
  }
  return report;
}

} // namespace

ConvergenceReport convergence_study(const SplitProblem& problem, SchemeKind scheme,
                                    double T, const std::vector<int>& step_counts,
                                    const std::function<double(double t, double x, double y)>& exact,
                                    const RunOptions& options) {
  return study(problem, scheme, T, step_counts,
               [&](const Trajectory& tr) {
                 return error_norms(tr, problem.mesh, problem.whole.p, exact, &problem.pou);
               },
               options);
}

ConvergenceReport convergence_study(const SplitProblem& problem, SchemeKind scheme,
                                    double T, const std::vector<int>& step_counts,
                                    int reference_N, const RunOptions& options) {
  if (!step_counts.empty() && reference_N < 4 * step_counts.front())
    throw InvalidArgument("convergence_study: reference step count must be at least "
                          "four times the coarsest sweep value");
  for (int N : step_counts) {
    if (reference_N % N != 0)
      throw InvalidArgument("convergence_study: reference step count must be a "
                            "multiple of every sweep value");
  }
  const Trajectory ref = reference_solve(problem, T, reference_N, options);
  return study(problem, scheme, T, step_counts,
               [&](const Trajectory& tr) {
                 return error_norms_vs_reference(tr, ref, problem.mesh, problem.whole.p,
                                                 &problem.pou);
               },
               options);
}

} // namespace splitstep
