#include "splitstep/decomposition.hpp"

#include <algorithm>
#include <cmath>

namespace splitstep {

std::vector<Subdomain> build_overlapping_subdomains(const SpatialMesh& mesh, int s,
                                                    double overlap_fraction) {
  if (s < 1) throw InvalidArgument("build_overlapping_subdomains: s must be >= 1");
  if (!(overlap_fraction > 0.0 && overlap_fraction < 0.5))
    throw InvalidArgument("build_overlapping_subdomains: overlap_fraction must lie in (0, 0.5)");
  const int m = mesh.nodes_along(0);
  std::vector<Subdomain> subs;
  if (s == 1) {
    subs.push_back(Subdomain{0, 0, m - 1});
    return subs;
  }
  // Cut nodes of the disjoint base slabs; each cut is widened by ov nodes on
  // both sides so adjacent slabs share 2*ov+1 nodes centered on the cut.
  const int ov = std::max(1, int(std::ceil(0.5 * (overlap_fraction * m - 1.0))));
  std::vector<int> cuts(static_cast<std::size_t>(s) + 1);
  for (int l = 0; l <= s; ++l)
    cuts[l] = int(std::lround(double(l) * double(m - 1) / double(s)));
  for (int l = 0; l < s; ++l) {
    if (cuts[l + 1] - cuts[l] < 2 * ov + 2)
      throw InvalidArgument(
          "build_overlapping_subdomains: mesh too coarse for the requested "
          "subdomain count and overlap");
    Subdomain d;
    d.index = l;
    d.lo = (l == 0) ? 0 : cuts[l] - ov;
    d.hi = (l == s - 1) ? m - 1 : cuts[l + 1] + ov;
    subs.push_back(d);
  }
  return subs;
}

PartitionOfUnity build_partition_of_unity(const SpatialMesh& mesh,
                                          const std::vector<Subdomain>& subdomains) {
  if (subdomains.empty())
    throw InvalidArgument("build_partition_of_unity: no subdomains");
  const int m = mesh.nodes_along(0);
  const int s = int(subdomains.size());
  std::vector<Subdomain> subs = subdomains;
  std::sort(subs.begin(), subs.end(),
            [](const Subdomain& a, const Subdomain& b) { return a.lo < b.lo; });
  if (subs.front().lo != 0 || subs.back().hi != m - 1)
    throw InvalidArgument("build_partition_of_unity: subdomains do not cover the mesh");
  for (int l = 0; l < s; ++l) {
    if (subs[l].lo > subs[l].hi || subs[l].lo < 0 || subs[l].hi > m - 1)
      throw InvalidArgument("build_partition_of_unity: malformed subdomain range");
    if (l + 1 < s) {
      const int shared = subs[l].hi - subs[l + 1].lo + 1;
      if (shared < 2)
        throw InvalidArgument("build_partition_of_unity: adjacent subdomains must share "
                              "at least 2 nodes");
      if (subs[l + 1].hi <= subs[l].hi)
        throw InvalidArgument("build_partition_of_unity: nested subdomains");
    }
    if (l + 2 < s && subs[l + 2].lo <= subs[l].hi)
      throw InvalidArgument("build_partition_of_unity: more than two subdomains overlap");
  }

  // Raw profile per subdomain along axis 0: linear ramp from 1/(W+1) at the
  // outermost shared node up to 1 at the first exclusive node, where W is the
  // overlap width; complementary ramps of a pair sum to 1 exactly.
  std::vector<std::vector<double>> profile(subs.size(), std::vector<double>(m, 0.0));
  int max_overlap = 0;
  for (int l = 0; l < s; ++l) {
    const int L = subs[l].lo, R = subs[l].hi;
    const int wl = (l == 0) ? 0 : subs[l - 1].hi - L + 1;
    const int wr = (l + 1 < s) ? R - subs[l + 1].lo + 1 : 0;
    max_overlap = std::max({max_overlap, wl, wr});
    for (int i = L; i <= R; ++i) {
      const double fl = (l == 0) ? 1.0 : std::min(1.0, double(i - L + 1) / double(wl + 1));
      const double fr = (l + 1 < s) ? std::min(1.0, double(R - i + 1) / double(wr + 1)) : 1.0;
      profile[l][i] = std::min(fl, fr);
    }
  }
  std::vector<double> total(m, 0.0);
  for (int l = 0; l < s; ++l)
    for (int i = 0; i < m; ++i) total[i] += profile[l][i];
  for (int i = 0; i < m; ++i)
    if (!(total[i] > 0.0))
      throw InvalidArgument("build_partition_of_unity: node not covered by any subdomain");

  PartitionOfUnity pou;
  pou.s = s;
  pou.overlap_nodes = max_overlap;
  pou.subdomains = subs;
  pou.weights.resize(subs.size());
  const std::size_t n = mesh.node_count();
  for (int l = 0; l < s; ++l) {
    GridFunction w(n, 0.0);
    for (std::size_t idx = 0; idx < n; ++idx) {
      const int i = int(idx % std::size_t(m));
      w[idx] = profile[l][i] / total[i];
    }
    pou.weights[l] = std::move(w);
  }
  return pou;
}

GridFunction eval_source(const SourceDescriptor& src, const SpatialMesh& mesh, double t) {
  GridFunction load = zero_function(mesh);
  const int m0 = mesh.nodes_along(0);
  const int m1 = (mesh.dimension() == 2) ? mesh.nodes_along(1) : 1;
  const bool weighted = !src.weight.empty();
  if (weighted && src.weight.size() != mesh.node_count())
    throw InvalidArgument("eval_source: weight size does not match mesh");
  if (src.f0) {
    for (int j = 0; j < m1; ++j) {
      const double y = (mesh.dimension() == 2) ? mesh.coord(1, j) : 0.0;
      for (int i = 0; i < m0; ++i) {
        const std::size_t idx = mesh.index(i, j);
        const double w = weighted ? src.weight[idx] : 1.0;
        load[idx] += w * src.f0(t, mesh.coord(0, i), y);
      }
    }
  }
  if (!src.gradient_parts.empty()) {
    if (int(src.gradient_parts.size()) > mesh.dimension())
      throw InvalidArgument("eval_source: more gradient parts than mesh axes");
    // Weak divergence of the gradient parts, mass-scaled back to nodes.
    for (int d = 0; d < int(src.gradient_parts.size()); ++d) {
      const auto& f = src.gradient_parts[d];
      if (!f) continue;
      if (d == 0) {
        for (int j = 0; j < m1; ++j) {
          const double y = (mesh.dimension() == 2) ? mesh.coord(1, j) : 0.0;
          const double wt = (mesh.dimension() == 2) ? mesh.axis_weights(1)[j] : 1.0;
          for (int i = 0; i + 1 < m0; ++i) {
            const std::size_t a = mesh.index(i, j), b = mesh.index(i + 1, j);
            const double xm = 0.5 * (mesh.coord(0, i) + mesh.coord(0, i + 1));
            const double wm = weighted ? 0.5 * (src.weight[a] + src.weight[b]) : 1.0;
            const double c = wm * f(t, xm, y) * wt;
            load[a] -= c / mesh.node_weight(a);
            load[b] += c / mesh.node_weight(b);
          }
        }
      } else {
        const double h1 = mesh.spacing(1);
        for (int j = 0; j + 1 < m1; ++j) {
          for (int i = 0; i < m0; ++i) {
            const std::size_t a = mesh.index(i, j), b = mesh.index(i, j + 1);
            const double ym = 0.5 * (mesh.coord(1, j) + mesh.coord(1, j + 1));
            const double wm = weighted ? 0.5 * (src.weight[a] + src.weight[b]) : 1.0;
            const double c = wm * f(t, mesh.coord(0, i), ym) * mesh.axis_weights(0)[i];
            load[a] -= c / mesh.node_weight(a);
            load[b] += c / mesh.node_weight(b);
          }
        }
        (void)h1;
      }
    }
  }
  return load;
}

std::vector<SourceDescriptor> split_source(const SourceDescriptor& src,
                                           const PartitionOfUnity& pou) {
  std::vector<SourceDescriptor> parts;
  parts.reserve(pou.weights.size());
  for (const GridFunction& chi : pou.weights) {
    SourceDescriptor part = src;
    if (part.weight.empty()) {
      part.weight = chi;
    } else {
      if (part.weight.size() != chi.size())
        throw InvalidArgument("split_source: weight size does not match partition");
      for (std::size_t i = 0; i < chi.size(); ++i) part.weight[i] *= chi[i];
    }
    parts.push_back(std::move(part));
  }
  return parts;
}

GridFunction averaged_source(const SourceDescriptor& src, const SpatialMesh& mesh,
                             const TimeGrid& grid, int n) {
  if (n < 1 || n > grid.N)
    throw InvalidArgument("averaged_source: step index out of range");
  static const double xi[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double t0 = grid.t(n - 1), t1 = grid.t(n);
  const double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
  GridFunction acc = zero_function(mesh);
  for (int g = 0; g < 3; ++g) {
    GridFunction v = eval_source(src, mesh, mid + half * xi[g]);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += 0.5 * gw[g] * v[i];
  }
  return acc;
}

} // namespace splitstep
