#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "splitstep/mesh.hpp"

namespace splitstep {

enum class OperatorKind { p_laplace, porous_medium, anisotropic, zero };

const char* to_string(OperatorKind kind);

/// Scalar diffusion intensity alpha(t), strictly positive on [0, horizon].
struct Alpha {
  enum class Kind { constant, affine, tabulated } kind = Kind::constant;
  double value = 1.0; // constant
  double slope = 0.0; // affine: alpha(t) = 1 + slope * t
  std::vector<std::pair<double, double>> table; // tabulated (t, alpha), sorted
  double operator()(double t) const;
  double min_on(double T) const;
  double lipschitz_on(double T) const;
  static Alpha constant(double value);
  static Alpha affine(double slope);
  static Alpha tabulated(std::vector<std::pair<double, double>> table);
};

/// Nonlinear diffusion operator:
///   p_laplace      -div(chi alpha(t) |grad u|^(p-2) grad u)
///   porous_medium  -Lap(chi alpha(t) |u|^(p-2) u)
///   anisotropic    -sum_d d_d(chi alpha(t) |d_d u|^(p-2) d_d u)
///   zero           the zero map
/// with homogeneous Neumann boundary conditions in flux form; an empty weight
/// means chi = 1.
struct OperatorSpec {
  OperatorKind kind = OperatorKind::p_laplace;
  double p = 2.0;
  Alpha alpha;
  double horizon = 1.0;
  GridFunction weight;
};

void validate_operator_spec(const OperatorSpec& spec, const SpatialMesh& mesh);

/// Nodal residual A_h(t) u: the weak-form stencil divided by the node weight,
/// so that h_inner(apply_operator(...), v) is the duality pairing <A(t)u, v>.
GridFunction apply_operator(const OperatorSpec& spec, const SpatialMesh& mesh, double t,
                            const GridFunction& u);

/// Convex energy whose mesh-inner-product gradient is apply_operator; defined
/// for the gradient-flow kinds (p_laplace, anisotropic, zero).
double operator_energy(const OperatorSpec& spec, const SpatialMesh& mesh, double t,
                       const GridFunction& u);

/// Directional derivative of apply_operator at u in direction dir; degenerate
/// |.|^(p-2) factors are floored at floor_eps (the residual itself never is).
GridFunction operator_jacobian_apply(const OperatorSpec& spec, const SpatialMesh& mesh,
                                     double t, const GridFunction& u,
                                     const GridFunction& dir, double floor_eps);

/// Outcome of one structural check: the normalized worst margin over the
/// sampled fields plus any estimated constants.
struct AssumptionReport {
  std::string property;
  int samples = 0;
  double worst_margin = 0.0;
  bool pass = false;
  std::optional<double> eta_hat;
  std::optional<double> mu_hat;
  std::optional<double> lambda_hat;
  std::optional<double> beta_hat;
  std::string detail;
};

/// Nodewise comparison of sum_l parts[l](t) u against whole(t) u on random
/// fields; passes when the relative mismatch stays below 1e-12.
AssumptionReport check_sum_property(const std::vector<OperatorSpec>& parts,
                                    const OperatorSpec& whole, const SpatialMesh& mesh,
                                    double t, int samples, std::uint64_t seed);

/// <A(t)v - A(t)w, v - w> >= 0 on random pairs; margins are normalized by the
/// pairing scale, pass threshold -1e-10.
AssumptionReport check_monotonicity(const OperatorSpec& spec, const SpatialMesh& mesh,
                                    double t, int samples, std::uint64_t seed);

/// <A(t)v, v> >= mu_hat * |v|^p - lambda_hat with mu_hat = alpha_min and
/// lambda_hat = 0, plus the growth estimate
/// beta_hat = max ||A(t)v||_* / (1 + ||v||_V^(p-1)) (surrogate dual norm).
AssumptionReport check_coercivity_boundedness(const OperatorSpec& spec,
                                              const SpatialMesh& mesh, double t,
                                              int samples, std::uint64_t seed);

/// Samples tau -> <A(t)(u + tau v), w> on [0, 1] and flags jumps that are
/// inconsistent with the finite differences of neighbouring samples.
AssumptionReport check_radial_continuity(const OperatorSpec& spec, const SpatialMesh& mesh,
                                         double t, int triples, std::uint64_t seed);

/// ||A(t)v - A(t')v||_inf <= L_alpha |t - t'| ||A_1 v||_inf on random samples,
/// where A_1 is the same operator with alpha = 1.
AssumptionReport check_time_continuity(const OperatorSpec& spec, const SpatialMesh& mesh,
                                       int samples, std::uint64_t seed);

} // namespace splitstep
