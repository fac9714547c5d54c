#pragma once

#include <functional>
#include <vector>

#include "splitstep/mesh.hpp"

namespace splitstep {

/// Contiguous slab of nodes along axis 0 (inclusive index range); in 2D the
/// slab spans all nodes of the other axis.
struct Subdomain {
  int index = 0;
  int lo = 0;
  int hi = 0;
  bool contains_axis0(int i) const { return i >= lo && i <= hi; }
};

/// s equal slabs along axis 0, each extended into its neighbours so that
/// adjacent slabs share about overlap_fraction * m nodes (at least 2).
std::vector<Subdomain> build_overlapping_subdomains(const SpatialMesh& mesh, int s,
                                                    double overlap_fraction);

/// Nodal weights chi_l with sum_l chi_l = 1 at every node, chi_l > 0 exactly
/// on the nodes of subdomain l and 0 elsewhere, piecewise-linear ramps across
/// the overlaps.
struct PartitionOfUnity {
  int s = 1;
  int overlap_nodes = 0; // nodes shared by an adjacent pair, 0 when s == 1
  std::vector<Subdomain> subdomains;
  std::vector<GridFunction> weights;
};

PartitionOfUnity build_partition_of_unity(const SpatialMesh& mesh,
                                          const std::vector<Subdomain>& subdomains);

/// Time-dependent source term.  The zero-order part f0(t, x, y) is evaluated
/// at nodes; optional gradient parts (one per mesh axis) enter through their
/// discrete divergence.  A nonempty weight multiplies the source nodewise.
struct SourceDescriptor {
  std::function<double(double t, double x, double y)> f0;
  std::vector<std::function<double(double t, double x, double y)>> gradient_parts;
  GridFunction weight;
};

/// Nodal load of the source at time t (mass-scaled, ready to add to du/dt).
GridFunction eval_source(const SourceDescriptor& src, const SpatialMesh& mesh, double t);

/// One weighted copy of src per subdomain, weights multiplying nodewise, so
/// that the copies sum back to src at every node.
std::vector<SourceDescriptor> split_source(const SourceDescriptor& src,
                                           const PartitionOfUnity& pou);

/// Step average (1/k) * integral of the nodal load over (t_{n-1}, t_n],
/// 3-point Gauss-Legendre in time, n in [1, N].
GridFunction averaged_source(const SourceDescriptor& src, const SpatialMesh& mesh,
                             const TimeGrid& grid, int n);

} // namespace splitstep
