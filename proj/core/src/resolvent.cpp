#include "splitstep/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "operator_detail.hpp"

namespace splitstep {

namespace {

double linf(const GridFunction& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void validate_config(const ResolventConfig& cfg) {
  if (cfg.tol_abs < 0.0 || cfg.tol_rel < 0.0)
    throw InvalidArgument("resolvent config: tolerances must be nonnegative");
  if (cfg.max_newton_iters < 1)
    throw InvalidArgument("resolvent config: max_newton_iters must be >= 1");
  if (!(cfg.damping_factor > 0.0 && cfg.damping_factor < 1.0))
    throw InvalidArgument("resolvent config: damping_factor must lie in (0, 1)");
  if (cfg.max_damping_halvings < 0)
    throw InvalidArgument("resolvent config: max_damping_halvings must be >= 0");
  if (cfg.jacobian_regularization < 0.0)
    throw InvalidArgument("resolvent config: jacobian_regularization must be >= 0");
}

} // namespace

std::pair<GridFunction, SolveStats> solve_resolvent(const OperatorSpec& spec,
                                                    const SpatialMesh& mesh, double tau,
                                                    double t, const GridFunction& b,
                                                    const ResolventConfig& cfg) {
  validate_operator_spec(spec, mesh);
  validate_config(cfg);
  if (b.size() != mesh.node_count())
    throw InvalidArgument("solve_resolvent: right-hand side size does not match mesh");
  if (tau < 0.0) throw InvalidArgument("solve_resolvent: tau must be nonnegative");
  for (double x : b)
    if (!std::isfinite(x))
      throw NumericalBreakdown("solve_resolvent: right-hand side contains non-finite entries",
                               SolveStats{});

  SolveStats stats;
  if (tau == 0.0 || spec.kind == OperatorKind::zero) {
    stats.converged = true;
    return {b, stats};
  }

  const std::size_t n = mesh.node_count();
  const double tol = cfg.tol_abs + cfg.tol_rel * linf(b);

  auto residual = [&](const GridFunction& v) {
    const GridFunction av = apply_operator(spec, mesh, t, v);
    GridFunction F(n);
    for (std::size_t i = 0; i < n; ++i) F[i] = v[i] + tau * av[i] - b[i];
    return F;
  };

  GridFunction u = b;
  GridFunction F = residual(u);
  double res = linf(F);
  if (!std::isfinite(res))
    throw NumericalBreakdown("solve_resolvent: non-finite residual at the initial guess",
                             stats);

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  while (res > tol) {
    if (stats.newton_iterations >= cfg.max_newton_iters) {
      stats.final_residual = res;
      throw SolverFailure("solve_resolvent: no convergence within max_newton_iters", stats);
    }
    // System (M + tau H) delta = -M F, H the residual Jacobian of the stencil.
    auto trips = detail::residual_jacobian_triplets(spec, mesh, t, u,
                                                    cfg.jacobian_regularization);
    for (auto& trip : trips)
      trip = Eigen::Triplet<double>(trip.row(), trip.col(), tau * trip.value());
    for (std::size_t i = 0; i < n; ++i)
      trips.emplace_back(int(i), int(i), mesh.node_weight(i));
    Eigen::SparseMatrix<double> J(static_cast<int>(n), static_cast<int>(n));
    J.setFromTriplets(trips.begin(), trips.end());
    lu.compute(J);
    if (lu.info() != Eigen::Success) {
      stats.final_residual = res;
      throw NumericalBreakdown("solve_resolvent: Jacobian factorization failed", stats);
    }
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[int(i)] = -mesh.node_weight(i) * F[i];
    Eigen::VectorXd delta = lu.solve(rhs);

    double gamma = 1.0;
    int halvings = 0;
    GridFunction trial(n);
    GridFunction Ftrial;
    double rtrial = std::numeric_limits<double>::infinity();
    while (true) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + gamma * delta[int(i)];
      Ftrial = residual(trial);
      rtrial = linf(Ftrial);
      if (std::isfinite(rtrial) && rtrial < res) break;
      if (halvings >= cfg.max_damping_halvings) {
        if (!std::isfinite(rtrial)) {
          stats.final_residual = res;
          throw NumericalBreakdown(
              "solve_resolvent: non-finite residual persists under damping", stats);
        }
        break; // accept the non-decreasing step and keep iterating
      }
      gamma *= cfg.damping_factor;
      ++halvings;
    }
    stats.damping_events += halvings;
    u = trial;
    F = std::move(Ftrial);
    res = rtrial;
    ++stats.newton_iterations;
  }
  stats.final_residual = res;
  stats.converged = true;
  return {u, stats};
}

AssumptionReport check_nonexpansive(const OperatorSpec& spec, const SpatialMesh& mesh,
                                    double tau, double t, int pairs,
                                    const ResolventConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  AssumptionReport rep;
  rep.property = "resolvent_nonexpansive";
  rep.samples = pairs;
  double worst = 0.0;
  for (int sidx = 0; sidx < pairs; ++sidx) {
    const GridFunction b1 = detail::random_field(mesh, eng);
    const GridFunction b2 = detail::random_field(mesh, eng);
    const GridFunction u1 = solve_resolvent(spec, mesh, tau, t, b1, cfg).first;
    const GridFunction u2 = solve_resolvent(spec, mesh, tau, t, b2, cfg).first;
    GridFunction du(b1.size()), db(b1.size());
    for (std::size_t i = 0; i < b1.size(); ++i) {
      du[i] = u1[i] - u2[i];
      db[i] = b1[i] - b2[i];
    }
    const double denom = h_norm(mesh, db);
    if (denom > 1e-12) worst = std::max(worst, h_norm(mesh, du) / denom);
  }
  rep.worst_margin = worst;
  rep.pass = worst <= 1.0 + 1e-8;
  rep.detail = "max ||R(b1) - R(b2)||_H / ||b1 - b2||_H over random pairs";
  return rep;
}

} // namespace splitstep
