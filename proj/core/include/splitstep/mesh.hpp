#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "splitstep/errors.hpp"

namespace splitstep {

/// Nodal values of a scalar field on a SpatialMesh, one entry per node.
using GridFunction = std::vector<double>;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
};

/// Uniform tensor-product grid on an interval (1D) or a rectangle (2D).
/// Node i along axis a sits at lo + i * (hi - lo) / (m - 1); the quadrature
/// weight of a node is the product of the per-axis trapezoidal weights.
class SpatialMesh {
public:
  int dimension() const { return dim_; }
  int nodes_along(int axis) const { return m_[check_axis(axis)]; }
  double spacing(int axis) const { return h_[check_axis(axis)]; }
  Interval extent(int axis) const { return ext_[check_axis(axis)]; }
  std::size_t node_count() const { return static_cast<std::size_t>(m_[0]) * m_[1]; }

  double coord(int axis, int i) const {
    axis = check_axis(axis);
    return ext_[axis].lo + ext_[axis].length() * double(i) / double(m_[axis] - 1);
  }

  /// Linear node index, axis 0 fastest.
  std::size_t index(int i0, int i1 = 0) const {
    return static_cast<std::size_t>(i0) + static_cast<std::size_t>(m_[0]) * i1;
  }

  double node_weight(std::size_t idx) const {
    return w_[0][idx % m_[0]] * w_[1][idx / m_[0]];
  }
  const std::vector<double>& axis_weights(int axis) const { return w_[check_axis(axis)]; }

  friend SpatialMesh build_uniform_mesh(Interval ext, int m);
  friend SpatialMesh build_uniform_mesh(Interval ext0, Interval ext1, int m0, int m1);

private:
  int check_axis(int axis) const;

  int dim_ = 1;
  std::array<int, 2> m_{2, 1};
  std::array<double, 2> h_{1.0, 0.0};
  std::array<Interval, 2> ext_{};
  std::array<std::vector<double>, 2> w_{};
};

/// 1D mesh with m >= 3 nodes on a nonempty interval.
SpatialMesh build_uniform_mesh(Interval ext, int m);
/// 2D tensor-product mesh, m0 x m1 nodes, each axis >= 3.
SpatialMesh build_uniform_mesh(Interval ext0, Interval ext1, int m0, int m1);

GridFunction zero_function(const SpatialMesh& mesh);

/// Trapezoidal L2 inner product of two nodal fields.
double h_inner(const SpatialMesh& mesh, const GridFunction& u, const GridFunction& v);
/// sqrt(h_inner(v, v))
double h_norm(const SpatialMesh& mesh, const GridFunction& v);

/// Trapezoidal Lp norm, p > 1.
double lp_norm(const SpatialMesh& mesh, const GridFunction& v, double p);

/// Lp norm of the discrete gradient, evaluated at cell midpoints, optionally
/// weighted by a nonnegative nodal field (averaged onto midpoints):
///   ( sum_cells  w_cell * |grad v|_cell^p * vol_cell )^(1/p)
double gradient_seminorm(const SpatialMesh& mesh, const GridFunction& v, double p,
                         const GridFunction* weight = nullptr);

/// Surrogate for the dual norm of a functional with Riesz representer g:
/// solves (I - Lap_h) w = g with the homogeneous-Neumann discrete Laplacian
/// and returns lp_norm(w, q) + gradient_seminorm(w, q).  Reported quantities
/// derived from it are labeled as surrogates.
double dual_norm_surrogate(const SpatialMesh& mesh, const GridFunction& g, double q);

/// Uniform partition of [0, T] into N steps of size k = T / N.
struct TimeGrid {
  double T = 1.0;
  int N = 1;
  double k = 1.0;
  double t(int n) const { return T * double(n) / double(N); }
};

TimeGrid make_time_grid(double T, int N);

} // namespace splitstep
