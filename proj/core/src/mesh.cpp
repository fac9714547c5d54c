#include "splitstep/mesh.hpp"

#include <cmath>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace splitstep {

namespace {

void ensure_field(const SpatialMesh& mesh, const GridFunction& v, const char* what) {
  if (v.size() != mesh.node_count())
    throw InvalidArgument(std::string(what) + ": field size does not match mesh node count");
  for (double x : v)
    if (!std::isfinite(x))
      throw InvalidArgument(std::string(what) + ": field contains a non-finite entry");
}

double power(double base, double p) {
  if (p == 2.0) return base * base;
  return std::pow(base, p);
}

} // namespace

int SpatialMesh::check_axis(int axis) const {
  if (axis < 0 || axis >= dim_)
    throw InvalidArgument("mesh axis out of range");
  return axis;
}

static std::vector<double> trapezoid_weights(int m, double h) {
  std::vector<double> w(static_cast<std::size_t>(m), h);
  w.front() = 0.5 * h;
  w.back() = 0.5 * h;
  return w;
}

SpatialMesh build_uniform_mesh(Interval ext, int m) {
  if (m < 3) throw InvalidArgument("build_uniform_mesh: need at least 3 nodes per axis");
  if (!(ext.hi > ext.lo)) throw InvalidArgument("build_uniform_mesh: empty extent");
  SpatialMesh mesh;
  mesh.dim_ = 1;
  mesh.m_ = {m, 1};
  mesh.ext_ = {ext, Interval{0.0, 0.0}};
  mesh.h_ = {ext.length() / double(m - 1), 0.0};
  mesh.w_[0] = trapezoid_weights(m, mesh.h_[0]);
  mesh.w_[1] = {1.0};
  return mesh;
}

SpatialMesh build_uniform_mesh(Interval ext0, Interval ext1, int m0, int m1) {
  if (m0 < 3 || m1 < 3)
    throw InvalidArgument("build_uniform_mesh: need at least 3 nodes per axis");
  if (!(ext0.hi > ext0.lo) || !(ext1.hi > ext1.lo))
    throw InvalidArgument("build_uniform_mesh: empty extent");
  SpatialMesh mesh;
  mesh.dim_ = 2;
  mesh.m_ = {m0, m1};
  mesh.ext_ = {ext0, ext1};
  mesh.h_ = {ext0.length() / double(m0 - 1), ext1.length() / double(m1 - 1)};
  mesh.w_[0] = trapezoid_weights(m0, mesh.h_[0]);
  mesh.w_[1] = trapezoid_weights(m1, mesh.h_[1]);
  return mesh;
}

GridFunction zero_function(const SpatialMesh& mesh) {
  return GridFunction(mesh.node_count(), 0.0);
}

double h_inner(const SpatialMesh& mesh, const GridFunction& u, const GridFunction& v) {
  ensure_field(mesh, u, "h_inner");
  ensure_field(mesh, v, "h_inner");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += mesh.node_weight(i) * u[i] * v[i];
  return acc;
}

double h_norm(const SpatialMesh& mesh, const GridFunction& v) {
  return std::sqrt(h_inner(mesh, v, v));
}

double lp_norm(const SpatialMesh& mesh, const GridFunction& v, double p) {
  if (!(p > 1.0)) throw InvalidArgument("lp_norm: exponent must satisfy p > 1");
  ensure_field(mesh, v, "lp_norm");
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    acc += mesh.node_weight(i) * power(std::abs(v[i]), p);
  return std::pow(acc, 1.0 / p);
}

double gradient_seminorm(const SpatialMesh& mesh, const GridFunction& v, double p,
                         const GridFunction* weight) {
  if (!(p > 1.0)) throw InvalidArgument("gradient_seminorm: exponent must satisfy p > 1");
  ensure_field(mesh, v, "gradient_seminorm");
  if (weight) {
    ensure_field(mesh, *weight, "gradient_seminorm weight");
    for (double w : *weight)
      if (w < 0.0) throw InvalidArgument("gradient_seminorm: weight must be nonnegative");
  }
  double acc = 0.0;
  if (mesh.dimension() == 1) {
    const int m = mesh.nodes_along(0);
    const double h = mesh.spacing(0);
    for (int c = 0; c + 1 < m; ++c) {
      const double d = (v[c + 1] - v[c]) / h;
      const double w = weight ? 0.5 * ((*weight)[c] + (*weight)[c + 1]) : 1.0;
      acc += w * power(std::abs(d), p) * h;
    }
  } else {
    const int m0 = mesh.nodes_along(0), m1 = mesh.nodes_along(1);
    const double h0 = mesh.spacing(0), h1 = mesh.spacing(1);
    for (int j = 0; j + 1 < m1; ++j) {
      for (int i = 0; i + 1 < m0; ++i) {
        const std::size_t n00 = mesh.index(i, j), n10 = mesh.index(i + 1, j);
        const std::size_t n01 = mesh.index(i, j + 1), n11 = mesh.index(i + 1, j + 1);
        const double dx = (v[n10] - v[n00] + v[n11] - v[n01]) / (2.0 * h0);
        const double dy = (v[n01] - v[n00] + v[n11] - v[n10]) / (2.0 * h1);
        const double w = weight
            ? 0.25 * ((*weight)[n00] + (*weight)[n10] + (*weight)[n01] + (*weight)[n11])
            : 1.0;
        acc += w * std::pow(dx * dx + dy * dy, 0.5 * p) * h0 * h1;
      }
    }
  }
  return std::pow(acc, 1.0 / p);
}

namespace {

// Lumped mass plus homogeneous-Neumann stiffness, (M + K) w = M g.
Eigen::SparseMatrix<double> identity_minus_laplacian(const SpatialMesh& mesh) {
  using T = Eigen::Triplet<double>;
  std::vector<T> trips;
  const std::size_t n = mesh.node_count();
  for (std::size_t i = 0; i < n; ++i)
    trips.emplace_back(int(i), int(i), mesh.node_weight(i));
  if (mesh.dimension() == 1) {
    const int m = mesh.nodes_along(0);
    const double h = mesh.spacing(0);
    for (int c = 0; c + 1 < m; ++c) {
      const double k = 1.0 / h;
      trips.emplace_back(c, c, k);
      trips.emplace_back(c + 1, c + 1, k);
      trips.emplace_back(c, c + 1, -k);
      trips.emplace_back(c + 1, c, -k);
    }
  } else {
    const int m0 = mesh.nodes_along(0), m1 = mesh.nodes_along(1);
    const double h0 = mesh.spacing(0), h1 = mesh.spacing(1);
    const auto& w0 = mesh.axis_weights(0);
    const auto& w1 = mesh.axis_weights(1);
    for (int j = 0; j < m1; ++j) {
      for (int i = 0; i + 1 < m0; ++i) {
        const double k = w1[j] / h0;
        const int a = int(mesh.index(i, j)), b = int(mesh.index(i + 1, j));
        trips.emplace_back(a, a, k);
        trips.emplace_back(b, b, k);
        trips.emplace_back(a, b, -k);
        trips.emplace_back(b, a, -k);
      }
    }
    for (int j = 0; j + 1 < m1; ++j) {
      for (int i = 0; i < m0; ++i) {
        const double k = w0[i] / h1;
        const int a = int(mesh.index(i, j)), b = int(mesh.index(i, j + 1));
        trips.emplace_back(a, a, k);
        trips.emplace_back(b, b, k);
        trips.emplace_back(a, b, -k);
        trips.emplace_back(b, a, -k);
      }
    }
  }
  Eigen::SparseMatrix<double> A(static_cast<int>(n), static_cast<int>(n));
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

} // namespace

double dual_norm_surrogate(const SpatialMesh& mesh, const GridFunction& g, double q) {
  if (!(q > 1.0)) throw InvalidArgument("dual_norm_surrogate: exponent must satisfy q > 1");
  ensure_field(mesh, g, "dual_norm_surrogate");
  const std::size_t n = mesh.node_count();
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = mesh.node_weight(i) * g[i];
  Eigen::SparseMatrix<double> A = identity_minus_laplacian(mesh);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw Error("dual_norm_surrogate: factorization of (I - Lap_h) failed");
  Eigen::VectorXd sol = lu.solve(rhs);
  GridFunction w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = sol[i];
  return lp_norm(mesh, w, q) + gradient_seminorm(mesh, w, q);
}

TimeGrid make_time_grid(double T, int N) {
  if (!(T > 0.0)) throw InvalidArgument("make_time_grid: horizon must be positive");
  if (N < 1) throw InvalidArgument("make_time_grid: need at least one step");
  return TimeGrid{T, N, T / double(N)};
}

} // namespace splitstep
