#include "splitstep/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "operator_detail.hpp"

namespace splitstep {

namespace {

double flux_scalar(double d, double p) {
  if (p == 2.0) return d;
  return std::pow(std::abs(d), p - 2.0) * d;
}

double flux_derivative(double d, double p, double floor_eps) {
  if (p == 2.0) return 1.0;
  return (p - 1.0) * std::max(std::pow(std::abs(d), p - 2.0), floor_eps);
}

double phi_scalar(double v, double p) {
  if (p == 2.0) return v;
  return std::pow(std::abs(v), p - 2.0) * v;
}

double phi_derivative(double v, double p, double floor_eps) {
  if (p == 2.0) return 1.0;
  return (p - 1.0) * std::max(std::pow(std::abs(v), p - 2.0), floor_eps);
}

void check_time(const OperatorSpec& spec, double t) {
  const double slack = 1e-12 * (1.0 + std::abs(spec.horizon));
  if (t < -slack || t > spec.horizon + slack)
    throw InvalidArgument("apply_operator: time outside [0, horizon]");
}

void check_field(const OperatorSpec& spec, const SpatialMesh& mesh, const GridFunction& u,
                 const char* what) {
  if (u.size() != mesh.node_count())
    throw InvalidArgument(std::string(what) + ": field size does not match mesh");
  if (!spec.weight.empty() && spec.weight.size() != mesh.node_count())
    throw InvalidArgument(std::string(what) + ": weight size does not match mesh");
}

double node_weight_or_1(const GridFunction& w, std::size_t idx) {
  return w.empty() ? 1.0 : w[idx];
}

// Residual of the gradient-flow stencils (weak form, before mass scaling).
GridFunction weak_residual_grad_flow(const OperatorSpec& spec, const SpatialMesh& mesh,
                                     double a, const GridFunction& u) {
  GridFunction r(mesh.node_count(), 0.0);
  const GridFunction& chi = spec.weight;
  const double p = spec.p;
  if (mesh.dimension() == 1) {
    const int m = mesh.nodes_along(0);
    const double h = mesh.spacing(0);
    for (int c = 0; c + 1 < m; ++c) {
      const double d = (u[c + 1] - u[c]) / h;
      const double w = chi.empty() ? 1.0 : 0.5 * (chi[c] + chi[c + 1]);
      const double kappa = w * a * flux_scalar(d, p);
      r[c] -= kappa;
      r[c + 1] += kappa;
    }
    return r;
  }
  const int m0 = mesh.nodes_along(0), m1 = mesh.nodes_along(1);
  const double h0 = mesh.spacing(0), h1 = mesh.spacing(1);
  if (spec.kind == OperatorKind::p_laplace) {
    const double vol = h0 * h1;
    for (int j = 0; j + 1 < m1; ++j) {
      for (int i = 0; i + 1 < m0; ++i) {
        const std::size_t n00 = mesh.index(i, j), n10 = mesh.index(i + 1, j);
        const std::size_t n01 = mesh.index(i, j + 1), n11 = mesh.index(i + 1, j + 1);
        const double dx = (u[n10] - u[n00] + u[n11] - u[n01]) / (2.0 * h0);
        const double dy = (u[n01] - u[n00] + u[n11] - u[n10]) / (2.0 * h1);
        const double w = chi.empty()
            ? 1.0 : 0.25 * (chi[n00] + chi[n10] + chi[n01] + chi[n11]);
        const double norm2 = dx * dx + dy * dy;
        const double gp = (p == 2.0) ? 1.0 : std::pow(norm2, 0.5 * (p - 2.0));
        const double fx = w * a * gp * dx * vol;
        const double fy = w * a * gp * dy * vol;
        const double cx = fx / (2.0 * h0), cy = fy / (2.0 * h1);
        r[n00] += -cx - cy;
        r[n10] += cx - cy;
        r[n01] += -cx + cy;
        r[n11] += cx + cy;
      }
    }
  } else { // anisotropic: per-axis edge fluxes
    for (int j = 0; j < m1; ++j) {
      const double wt = mesh.axis_weights(1)[j];
      for (int i = 0; i + 1 < m0; ++i) {
        const std::size_t na = mesh.index(i, j), nb = mesh.index(i + 1, j);
        const double d = (u[nb] - u[na]) / h0;
        const double w = chi.empty() ? 1.0 : 0.5 * (chi[na] + chi[nb]);
        const double kappa = w * a * flux_scalar(d, p) * wt;
        r[na] -= kappa;
        r[nb] += kappa;
      }
    }
    for (int j = 0; j + 1 < m1; ++j) {
      for (int i = 0; i < m0; ++i) {
        const double wt = mesh.axis_weights(0)[i];
        const std::size_t na = mesh.index(i, j), nb = mesh.index(i, j + 1);
        const double d = (u[nb] - u[na]) / h1;
        const double w = chi.empty() ? 1.0 : 0.5 * (chi[na] + chi[nb]);
        const double kappa = w * a * flux_scalar(d, p) * wt;
        r[na] -= kappa;
        r[nb] += kappa;
      }
    }
  }
  return r;
}

// Stiffness apply with unit coefficient (homogeneous-Neumann Laplacian).
GridFunction stiffness_apply(const SpatialMesh& mesh, const GridFunction& z) {
  GridFunction r(mesh.node_count(), 0.0);
  if (mesh.dimension() == 1) {
    const int m = mesh.nodes_along(0);
    const double h = mesh.spacing(0);
    for (int c = 0; c + 1 < m; ++c) {
      const double kappa = (z[c + 1] - z[c]) / h;
      r[c] -= kappa;
      r[c + 1] += kappa;
    }
    return r;
  }
  const int m0 = mesh.nodes_along(0), m1 = mesh.nodes_along(1);
  const double h0 = mesh.spacing(0), h1 = mesh.spacing(1);
  for (int j = 0; j < m1; ++j) {
    const double wt = mesh.axis_weights(1)[j];
    for (int i = 0; i + 1 < m0; ++i) {
      const std::size_t na = mesh.index(i, j), nb = mesh.index(i + 1, j);
      const double kappa = (z[nb] - z[na]) / h0 * wt;
      r[na] -= kappa;
      r[nb] += kappa;
    }
  }
  for (int j = 0; j + 1 < m1; ++j) {
    for (int i = 0; i < m0; ++i) {
      const double wt = mesh.axis_weights(0)[i];
      const std::size_t na = mesh.index(i, j), nb = mesh.index(i, j + 1);
      const double kappa = (z[nb] - z[na]) / h1 * wt;
      r[na] -= kappa;
      r[nb] += kappa;
    }
  }
  return r;
}

double linf(const GridFunction& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

} // namespace

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::p_laplace: return "p_laplace";
    case OperatorKind::porous_medium: return "porous_medium";
    case OperatorKind::anisotropic: return "anisotropic";
    case OperatorKind::zero: return "zero";
  }
  return "unknown";
}

double Alpha::operator()(double t) const {
  switch (kind) {
    case Kind::constant: return value;
    case Kind::affine: return 1.0 + slope * t;
    case Kind::tabulated: {
      if (table.empty()) throw InvalidArgument("alpha: empty table");
      if (t <= table.front().first) return table.front().second;
      if (t >= table.back().first) return table.back().second;
      for (std::size_t i = 1; i < table.size(); ++i) {
        if (t <= table[i].first) {
          const auto& [t0, a0] = table[i - 1];
          const auto& [t1, a1] = table[i];
          const double theta = (t - t0) / (t1 - t0);
          return a0 + theta * (a1 - a0);
        }
      }
      return table.back().second;
    }
  }
  return value;
}

double Alpha::min_on(double T) const {
  switch (kind) {
    case Kind::constant: return value;
    case Kind::affine: return std::min(1.0, 1.0 + slope * T);
    case Kind::tabulated: {
      double m = (*this)(0.0);
      m = std::min(m, (*this)(T));
      for (const auto& [tk, ak] : table)
        if (tk >= 0.0 && tk <= T) m = std::min(m, ak);
      return m;
    }
  }
  return value;
}

double Alpha::lipschitz_on(double T) const {
  switch (kind) {
    case Kind::constant: return 0.0;
    case Kind::affine: return std::abs(slope);
    case Kind::tabulated: {
      double L = 0.0;
      for (std::size_t i = 1; i < table.size(); ++i) {
        const double dt = table[i].first - table[i - 1].first;
        if (dt > 0.0 && table[i - 1].first <= T)
          L = std::max(L, std::abs(table[i].second - table[i - 1].second) / dt);
      }
      return L;
    }
  }
  return 0.0;
}

Alpha Alpha::constant(double value) {
  Alpha a;
  a.kind = Kind::constant;
  a.value = value;
  return a;
}

Alpha Alpha::affine(double slope) {
  Alpha a;
  a.kind = Kind::affine;
  a.slope = slope;
  return a;
}

Alpha Alpha::tabulated(std::vector<std::pair<double, double>> table) {
  Alpha a;
  a.kind = Kind::tabulated;
  a.table = std::move(table);
  return a;
}

void validate_operator_spec(const OperatorSpec& spec, const SpatialMesh& mesh) {
  if (!spec.weight.empty()) {
    if (spec.weight.size() != mesh.node_count())
      throw InvalidArgument("operator spec: weight size does not match mesh");
    for (double w : spec.weight) {
      if (!std::isfinite(w) || w < 0.0 || w > 1.0)
        throw InvalidArgument("operator spec: weight must lie in [0, 1] nodewise");
    }
  }
  if (spec.kind == OperatorKind::zero) return;
  if (!(spec.p >= 2.0)) throw InvalidArgument("operator spec: requires p >= 2");
  if (!(spec.horizon > 0.0)) throw InvalidArgument("operator spec: horizon must be positive");
  if (spec.alpha.kind == Alpha::Kind::tabulated) {
    if (spec.alpha.table.empty())
      throw InvalidArgument("operator spec: tabulated alpha needs at least one entry");
    for (std::size_t i = 1; i < spec.alpha.table.size(); ++i)
      if (!(spec.alpha.table[i].first > spec.alpha.table[i - 1].first))
        throw InvalidArgument("operator spec: tabulated alpha must be strictly increasing in t");
  }
  if (!(spec.alpha.min_on(spec.horizon) > 0.0))
    throw InvalidArgument("operator spec: alpha must stay positive on [0, horizon]");
}

GridFunction apply_operator(const OperatorSpec& spec, const SpatialMesh& mesh, double t,
                            const GridFunction& u) {
  check_field(spec, mesh, u, "apply_operator");
  if (spec.kind == OperatorKind::zero) return GridFunction(mesh.node_count(), 0.0);
  check_time(spec, t);
  const double a = spec.alpha(t);
  GridFunction r;
  if (spec.kind == OperatorKind::porous_medium) {
    GridFunction z(mesh.node_count());
    for (std::size_t i = 0; i < z.size(); ++i)
      z[i] = node_weight_or_1(spec.weight, i) * a * phi_scalar(u[i], spec.p);
    r = stiffness_apply(mesh, z);
  } else {
    r = weak_residual_grad_flow(spec, mesh, a, u);
  }
  for (std::size_t i = 0; i < r.size(); ++i) r[i] /= mesh.node_weight(i);
  return r;
}

double operator_energy(const OperatorSpec& spec, const SpatialMesh& mesh, double t,
                       const GridFunction& u) {
  check_field(spec, mesh, u, "operator_energy");
  if (spec.kind == OperatorKind::zero) return 0.0;
  if (spec.kind == OperatorKind::porous_medium)
    throw InvalidArgument("operator_energy: porous_medium is not a gradient flow in the "
                          "mesh inner product");
  check_time(spec, t);
  const double a = spec.alpha(t);
  const GridFunction& chi = spec.weight;
  const double p = spec.p;
  double acc = 0.0;
  if (mesh.dimension() == 1) {
    const int m = mesh.nodes_along(0);
    const double h = mesh.spacing(0);
    for (int c = 0; c + 1 < m; ++c) {
      const double d = (u[c + 1] - u[c]) / h;
      const double w = chi.empty() ? 1.0 : 0.5 * (chi[c] + chi[c + 1]);
      acc += w * a * std::pow(std::abs(d), p) / p * h;
    }
    return acc;
  }
  const int m0 = mesh.nodes_along(0), m1 = mesh.nodes_along(1);
  const double h0 = mesh.spacing(0), h1 = mesh.spacing(1);
  if (spec.kind == OperatorKind::p_laplace) {
    for (int j = 0; j + 1 < m1; ++j) {
      for (int i = 0; i + 1 < m0; ++i) {
        const std::size_t n00 = mesh.index(i, j), n10 = mesh.index(i + 1, j);
        const std::size_t n01 = mesh.index(i, j + 1), n11 = mesh.index(i + 1, j + 1);
        const double dx = (u[n10] - u[n00] + u[n11] - u[n01]) / (2.0 * h0);
        const double dy = (u[n01] - u[n00] + u[n11] - u[n10]) / (2.0 * h1);
        const double w = chi.empty()
            ? 1.0 : 0.25 * (chi[n00] + chi[n10] + chi[n01] + chi[n11]);
        acc += w * a * std::pow(dx * dx + dy * dy, 0.5 * p) / p * h0 * h1;
      }
    }
  } else {
    for (int j = 0; j < m1; ++j) {
      const double wt = mesh.axis_weights(1)[j];
      for (int i = 0; i + 1 < m0; ++i) {
        const std::size_t na = mesh.index(i, j), nb = mesh.index(i + 1, j);
        const double d = (u[nb] - u[na]) / h0;
        const double w = chi.empty() ? 1.0 : 0.5 * (chi[na] + chi[nb]);
        acc += w * a * std::pow(std::abs(d), p) / p * h0 * wt;
      }
    }
    for (int j = 0; j + 1 < m1; ++j) {
      for (int i = 0; i < m0; ++i) {
        const double wt = mesh.axis_weights(0)[i];
        const std::size_t na = mesh.index(i, j), nb = mesh.index(i, j + 1);
        const double d = (u[nb] - u[na]) / h1;
        const double w = chi.empty() ? 1.0 : 0.5 * (chi[na] + chi[nb]);
        acc += w * a * std::pow(std::abs(d), p) / p * h1 * wt;
      }
    }
  }
  return acc;
}

namespace detail {

Triplets residual_jacobian_triplets(const OperatorSpec& spec, const SpatialMesh& mesh,
                                    double t, const GridFunction& u, double floor_eps) {
  Triplets trips;
  if (spec.kind == OperatorKind::zero) return trips;
  const double a = spec.alpha(t);
  const GridFunction& chi = spec.weight;
  const double p = spec.p;

  if (spec.kind == OperatorKind::porous_medium) {
    // d/du [K (chi a phi(u))] = K diag(chi a phi'(u))
    const int m0 = mesh.nodes_along(0);
    const int m1 = (mesh.dimension() == 2) ? mesh.nodes_along(1) : 1;
    auto dcoef = [&](std::size_t idx) {
      return node_weight_or_1(chi, idx) * a * phi_derivative(u[idx], p, floor_eps);
    };
    auto add_edge = [&](std::size_t na, std::size_t nb, double k) {
      const double da = k * dcoef(na), db = k * dcoef(nb);
      trips.emplace_back(int(na), int(na), da);
      trips.emplace_back(int(na), int(nb), -db);
      trips.emplace_back(int(nb), int(na), -da);
      trips.emplace_back(int(nb), int(nb), db);
    };
    if (mesh.dimension() == 1) {
      const double h = mesh.spacing(0);
      for (int c = 0; c + 1 < m0; ++c) add_edge(c, c + 1, 1.0 / h);
    } else {
      const double h0 = mesh.spacing(0), h1 = mesh.spacing(1);
      for (int j = 0; j < m1; ++j)
        for (int i = 0; i + 1 < m0; ++i)
          add_edge(mesh.index(i, j), mesh.index(i + 1, j), mesh.axis_weights(1)[j] / h0);
      for (int j = 0; j + 1 < m1; ++j)
        for (int i = 0; i < m0; ++i)
          add_edge(mesh.index(i, j), mesh.index(i, j + 1), mesh.axis_weights(0)[i] / h1);
    }
    return trips;
  }

  if (mesh.dimension() == 1) {
    const int m = mesh.nodes_along(0);
    const double h = mesh.spacing(0);
    for (int c = 0; c + 1 < m; ++c) {
      const double d = (u[c + 1] - u[c]) / h;
      const double w = chi.empty() ? 1.0 : 0.5 * (chi[c] + chi[c + 1]);
      const double k = w * a * flux_derivative(d, p, floor_eps) / h;
      trips.emplace_back(c, c, k);
      trips.emplace_back(c, c + 1, -k);
      trips.emplace_back(c + 1, c, -k);
      trips.emplace_back(c + 1, c + 1, k);
    }
    return trips;
  }

  const int m0 = mesh.nodes_along(0), m1 = mesh.nodes_along(1);
  const double h0 = mesh.spacing(0), h1 = mesh.spacing(1);
  if (spec.kind == OperatorKind::p_laplace) {
    const double vol = h0 * h1;
    for (int j = 0; j + 1 < m1; ++j) {
      for (int i = 0; i + 1 < m0; ++i) {
        const std::size_t n[4] = {mesh.index(i, j), mesh.index(i + 1, j),
                                  mesh.index(i, j + 1), mesh.index(i + 1, j + 1)};
        const double dx = (u[n[1]] - u[n[0]] + u[n[3]] - u[n[2]]) / (2.0 * h0);
        const double dy = (u[n[2]] - u[n[0]] + u[n[3]] - u[n[1]]) / (2.0 * h1);
        const double w = chi.empty()
            ? 1.0 : 0.25 * (chi[n[0]] + chi[n[1]] + chi[n[2]] + chi[n[3]]);
        const double norm2 = dx * dx + dy * dy;
        const double gp = (p == 2.0) ? 1.0 : std::pow(norm2, 0.5 * (p - 2.0));
        const double gpf = std::max(gp, floor_eps);
        const double c2 = (p == 2.0 || norm2 <= 0.0) ? 0.0 : (p - 2.0) * gp / norm2;
        // D = w a vol (gpf I + c2 xi xi^T), H_ab = g_a^T D g_b
        const double D00 = w * a * vol * (gpf + c2 * dx * dx);
        const double D01 = w * a * vol * c2 * dx * dy;
        const double D11 = w * a * vol * (gpf + c2 * dy * dy);
        const double gx[4] = {-1.0 / (2.0 * h0), 1.0 / (2.0 * h0),
                              -1.0 / (2.0 * h0), 1.0 / (2.0 * h0)};
        const double gy[4] = {-1.0 / (2.0 * h1), -1.0 / (2.0 * h1),
                              1.0 / (2.0 * h1), 1.0 / (2.0 * h1)};
        for (int ia = 0; ia < 4; ++ia) {
          const double dgx = D00 * gx[ia] + D01 * gy[ia];
          const double dgy = D01 * gx[ia] + D11 * gy[ia];
          for (int ib = 0; ib < 4; ++ib)
            trips.emplace_back(int(n[ia]), int(n[ib]), gx[ib] * dgx + gy[ib] * dgy);
        }
      }
    }
  } else {
    auto add_edge = [&](std::size_t na, std::size_t nb, double d, double w, double scale) {
      const double k = w * a * flux_derivative(d, p, floor_eps) * scale;
      trips.emplace_back(int(na), int(na), k);
      trips.emplace_back(int(na), int(nb), -k);
      trips.emplace_back(int(nb), int(na), -k);
      trips.emplace_back(int(nb), int(nb), k);
    };
    for (int j = 0; j < m1; ++j)
      for (int i = 0; i + 1 < m0; ++i) {
        const std::size_t na = mesh.index(i, j), nb = mesh.index(i + 1, j);
        const double w = chi.empty() ? 1.0 : 0.5 * (chi[na] + chi[nb]);
        add_edge(na, nb, (u[nb] - u[na]) / h0, w, mesh.axis_weights(1)[j] / h0);
      }
    for (int j = 0; j + 1 < m1; ++j)
      for (int i = 0; i < m0; ++i) {
        const std::size_t na = mesh.index(i, j), nb = mesh.index(i, j + 1);
        const double w = chi.empty() ? 1.0 : 0.5 * (chi[na] + chi[nb]);
        add_edge(na, nb, (u[nb] - u[na]) / h1, w, mesh.axis_weights(0)[i] / h1);
      }
  }
  return trips;
}

double uniform_pm1(std::mt19937_64& eng) {
  return 2.0 * (double(eng() >> 11) * 0x1.0p-53) - 1.0;
}

GridFunction random_field(const SpatialMesh& mesh, std::mt19937_64& eng) {
  GridFunction v(mesh.node_count());
  for (double& x : v) x = uniform_pm1(eng);
  return v;
}

} // namespace detail

GridFunction operator_jacobian_apply(const OperatorSpec& spec, const SpatialMesh& mesh,
                                     double t, const GridFunction& u,
                                     const GridFunction& dir, double floor_eps) {
  check_field(spec, mesh, u, "operator_jacobian_apply");
  if (dir.size() != mesh.node_count())
    throw InvalidArgument("operator_jacobian_apply: direction size does not match mesh");
  GridFunction out(mesh.node_count(), 0.0);
  if (spec.kind == OperatorKind::zero) return out;
  check_time(spec, t);
  for (const auto& trip : detail::residual_jacobian_triplets(spec, mesh, t, u, floor_eps))
    out[std::size_t(trip.row())] += trip.value() * dir[std::size_t(trip.col())];
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= mesh.node_weight(i);
  return out;
}

namespace {

AssumptionReport base_report(std::string property, int samples) {
  AssumptionReport rep;
  rep.property = std::move(property);
  rep.samples = samples;
  return rep;
}

} // namespace

AssumptionReport check_sum_property(const std::vector<OperatorSpec>& parts,
                                    const OperatorSpec& whole, const SpatialMesh& mesh,
                                    double t, int samples, std::uint64_t seed) {
  if (parts.empty()) throw InvalidArgument("check_sum_property: no parts");
  for (const auto& part : parts) {
    if (part.kind != whole.kind || part.p != whole.p || part.horizon != whole.horizon ||
        part.alpha.kind != whole.alpha.kind || part.alpha.value != whole.alpha.value ||
        part.alpha.slope != whole.alpha.slope || part.alpha.table != whole.alpha.table)
      throw InvalidArgument("check_sum_property: part spec does not match the whole");
    validate_operator_spec(part, mesh);
  }
  validate_operator_spec(whole, mesh);
  std::mt19937_64 eng(seed);
  AssumptionReport rep = base_report("sum_property", samples);
  double worst = 0.0;
  for (int sidx = 0; sidx < samples; ++sidx) {
    const GridFunction u = detail::random_field(mesh, eng);
    const GridFunction full = apply_operator(whole, mesh, t, u);
    GridFunction acc(mesh.node_count(), 0.0);
    for (const auto& part : parts) {
      const GridFunction r = apply_operator(part, mesh, t, u);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += r[i];
    }
    double err = 0.0;
    for (std::size_t i = 0; i < acc.size(); ++i)
      err = std::max(err, std::abs(acc[i] - full[i]));
    worst = std::max(worst, err / (1.0 + linf(full)));
  }
  rep.worst_margin = worst;
  rep.pass = worst <= 1e-12;
  rep.detail = "max relative nodewise mismatch of sum of parts vs whole";
  return rep;
}

AssumptionReport check_monotonicity(const OperatorSpec& spec, const SpatialMesh& mesh,
                                    double t, int samples, std::uint64_t seed) {
  validate_operator_spec(spec, mesh);
  std::mt19937_64 eng(seed);
  AssumptionReport rep = base_report("monotonicity", samples);
  double worst = 0.0;
  double eta = std::numeric_limits<double>::infinity();
  const GridFunction* wptr = spec.weight.empty() ? nullptr : &spec.weight;
  for (int sidx = 0; sidx < samples; ++sidx) {
    const GridFunction v = detail::random_field(mesh, eng);
    const GridFunction w = detail::random_field(mesh, eng);
    const GridFunction av = apply_operator(spec, mesh, t, v);
    const GridFunction aw = apply_operator(spec, mesh, t, w);
    GridFunction dv(v.size()), da(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      dv[i] = v[i] - w[i];
      da[i] = av[i] - aw[i];
    }
    const double m = h_inner(mesh, da, dv);
    const double scale = h_norm(mesh, da) * h_norm(mesh, dv);
    worst = std::min(worst, m / (1.0 + scale));
    if (spec.kind != OperatorKind::zero) {
      const double denom = std::pow(gradient_seminorm(mesh, dv, spec.p, wptr), spec.p);
      if (denom > 1e-30) eta = std::min(eta, m / denom);
    }
  }
  rep.worst_margin = worst;
  if (std::isfinite(eta)) rep.eta_hat = eta;
  rep.pass = worst >= -1e-10;
  rep.detail = "min of <A v - A w, v - w> normalized by the pairing scale";
  return rep;
}

AssumptionReport check_coercivity_boundedness(const OperatorSpec& spec,
                                              const SpatialMesh& mesh, double t,
                                              int samples, std::uint64_t seed) {
  validate_operator_spec(spec, mesh);
  std::mt19937_64 eng(seed);
  AssumptionReport rep = base_report("coercivity_boundedness", samples);
  const double mu = (spec.kind == OperatorKind::zero) ? 0.0 : spec.alpha.min_on(spec.horizon);
  const double lambda = 0.0;
  const double p = (spec.kind == OperatorKind::zero) ? 2.0 : spec.p;
  const double q = p / (p - 1.0);
  const GridFunction* wptr = spec.weight.empty() ? nullptr : &spec.weight;
  double worst = std::numeric_limits<double>::infinity();
  double beta = 0.0;
  for (int sidx = 0; sidx < samples; ++sidx) {
    const GridFunction v = detail::random_field(mesh, eng);
    const GridFunction av = apply_operator(spec, mesh, t, v);
    const double pairing = h_inner(mesh, av, v);
    const double semi = gradient_seminorm(mesh, v, p, wptr);
    const double margin = (pairing + lambda - mu * std::pow(semi, p)) / (1.0 + std::abs(pairing));
    worst = std::min(worst, margin);
    const double vnorm = h_norm(mesh, v) + semi;
    beta = std::max(beta, dual_norm_surrogate(mesh, av, q) / (1.0 + std::pow(vnorm, p - 1.0)));
  }
  rep.worst_margin = worst;
  rep.mu_hat = mu;
  rep.lambda_hat = lambda;
  rep.beta_hat = beta;
  rep.pass = worst >= -1e-10 && std::isfinite(beta);
  rep.detail = "min of <A v, v> - mu |v|^p, normalized; beta from surrogate dual norm";
  return rep;
}

AssumptionReport check_radial_continuity(const OperatorSpec& spec, const SpatialMesh& mesh,
                                         double t, int triples, std::uint64_t seed) {
  validate_operator_spec(spec, mesh);
  std::mt19937_64 eng(seed);
  AssumptionReport rep = base_report("radial_continuity", triples);
  double worst = std::numeric_limits<double>::infinity();
  constexpr int kPoints = 11;
  for (int sidx = 0; sidx < triples; ++sidx) {
    const GridFunction u = detail::random_field(mesh, eng);
    const GridFunction v = detail::random_field(mesh, eng);
    const GridFunction w = detail::random_field(mesh, eng);
    double f[kPoints];
    double fscale = 0.0;
    for (int j = 0; j < kPoints; ++j) {
      const double tau = double(j) / double(kPoints - 1);
      GridFunction uv(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) uv[i] = u[i] + tau * v[i];
      f[j] = h_inner(mesh, apply_operator(spec, mesh, t, uv), w);
      fscale = std::max(fscale, std::abs(f[j]));
    }
    const double tol = 1e-9 * (1.0 + fscale);
    for (int j = 0; j + 1 < kPoints; ++j) {
      const double jump = std::abs(f[j + 1] - f[j]);
      double nb = 0.0;
      if (j > 0) nb += std::abs(f[j] - f[j - 1]);
      if (j + 2 < kPoints) nb += std::abs(f[j + 2] - f[j + 1]);
      const double margin = (3.0 * nb + tol - jump) / (1.0 + fscale);
      worst = std::min(worst, margin);
    }
  }
  rep.worst_margin = worst;
  rep.pass = worst >= 0.0;
  rep.detail = "jumps of tau -> <A(u + tau v), w> vs neighbouring finite differences";
  return rep;
}

AssumptionReport check_time_continuity(const OperatorSpec& spec, const SpatialMesh& mesh,
                                       int samples, std::uint64_t seed) {
  validate_operator_spec(spec, mesh);
  std::mt19937_64 eng(seed);
  AssumptionReport rep = base_report("time_continuity", samples);
  const double L = spec.alpha.lipschitz_on(spec.horizon);
  OperatorSpec unit = spec;
  unit.alpha = Alpha::constant(1.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int sidx = 0; sidx < samples; ++sidx) {
    const GridFunction v = detail::random_field(mesh, eng);
    const double t0 = 0.5 * (detail::uniform_pm1(eng) + 1.0) * spec.horizon;
    const double t1 = 0.5 * (detail::uniform_pm1(eng) + 1.0) * spec.horizon;
    const GridFunction a0 = apply_operator(spec, mesh, t0, v);
    const GridFunction a1 = apply_operator(spec, mesh, t1, v);
    GridFunction diff(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) diff[i] = a0[i] - a1[i];
    const double lhs = linf(diff);
    const double rhs = L * std::abs(t0 - t1) * linf(apply_operator(unit, mesh, t0, v));
    const double margin = (rhs * (1.0 + 1e-12) + 1e-12 * (1.0 + rhs) - lhs) / (1.0 + rhs);
    worst = std::min(worst, margin);
  }
  rep.worst_margin = worst;
  rep.pass = worst >= 0.0;
  rep.detail = "||A(t)v - A(t')v||_inf vs L_alpha |t - t'| ||A_1 v||_inf";
  return rep;
}

} // namespace splitstep
