#pragma once

#include <random>
#include <vector>

#include <Eigen/Sparse>

#include "splitstep/operators.hpp"

namespace splitstep::detail {

using Triplets = std::vector<Eigen::Triplet<double>>;

/// Jacobian of the weak-form residual (before mass scaling) at u, with the
/// degenerate |.|^(p-2) factors floored at floor_eps.
Triplets residual_jacobian_triplets(const OperatorSpec& spec, const SpatialMesh& mesh,
                                    double t, const GridFunction& u, double floor_eps);

/// Deterministic uniform draw in [-1, 1] from the raw engine bits.
double uniform_pm1(std::mt19937_64& eng);

GridFunction random_field(const SpatialMesh& mesh, std::mt19937_64& eng);

} // namespace splitstep::detail
