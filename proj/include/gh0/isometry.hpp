#pragma once

#include "gh0/core.hpp"
#include "gh0/metric_core.hpp"

#include <algorithm>
#include <span>
#include <vector>

namespace gh0 {

/// Assignment of a codomain index to every domain index. No continuity
/// is implied.
struct PointMap {
  std::vector<Index> assign;

  Index size() const { return static_cast<Index>(assign.size()); }
  Index operator()(Index i) const { return assign[static_cast<std::size_t>(i)]; }
};

struct IsometryDefect {
  double distortion = 0;
  double surjectivity_defect = 0;
  double delta_constant = 0;  ///< max of the two; the map is a D-isometry iff this is < D
};

namespace detail {

inline void check_assignment(std::span<const Index> assign, Index domain_size, Index codomain_size) {
  if (static_cast<Index>(assign.size()) != domain_size) throw UsageError("map is not total on its domain");
  for (Index a : assign)
    if (a < 0 || a >= codomain_size) throw UsageError("map leaves its codomain");
}

}  // namespace detail

/// sup over ordered domain pairs of |d_Y(i(x), i(x')) - d_X(x, x')|.
template <MetricSpace X, MetricSpace Y>
double distortion(const X& domain, const Y& codomain, std::span<const Index> assign) {
  detail::check_assignment(assign, domain.size(), codomain.size());
  double worst = 0;
  const Index n = domain.size();
  for (Index a = 0; a < n; ++a) {
    const Index ia = assign[static_cast<std::size_t>(a)];
    for (Index b = 0; b < n; ++b) {
      if (a == b) continue;
      const double gap = std::abs(double(codomain(ia, assign[static_cast<std::size_t>(b)])) - double(domain(a, b)));
      worst = std::max(worst, gap);
    }
  }
  return worst;
}

/// Hausdorff distance between the image of the map and its whole codomain.
template <MetricSpace Y>
double surjectivity_defect(const Y& codomain, std::span<const Index> assign) {
  if (assign.empty()) throw UsageError("surjectivity_defect: empty map");
  std::vector<bool> hit(static_cast<std::size_t>(codomain.size()), false);
  std::vector<Index> image;
  for (Index a : assign) {
    if (a < 0 || a >= codomain.size()) throw UsageError("map leaves its codomain");
    if (!hit[static_cast<std::size_t>(a)]) {
      hit[static_cast<std::size_t>(a)] = true;
      image.push_back(a);
    }
  }
  std::sort(image.begin(), image.end());
  const auto everything = PointSubset<Y>::all(codomain);
  return hausdorff_distance(codomain, image, everything.indices());
}

template <MetricSpace X, MetricSpace Y>
IsometryDefect delta_constant(const X& domain, const Y& codomain, std::span<const Index> assign) {
  IsometryDefect d;
  d.distortion = distortion(domain, codomain, assign);
  d.surjectivity_defect = surjectivity_defect(codomain, assign);
  d.delta_constant = std::max(d.distortion, d.surjectivity_defect);
  return d;
}

/// Uniform distance sup_z d(u(z), v(z)) between two maps into `space`.
template <MetricSpace S>
double uniform_distance(const S& space, std::span<const Index> u, std::span<const Index> v) {
  if (u.size() != v.size()) throw UsageError("uniform_distance: maps have different domains");
  double worst = 0;
  for (std::size_t z = 0; z < u.size(); ++z) {
    if (u[z] < 0 || u[z] >= space.size() || v[z] < 0 || v[z] >= space.size()) {
      throw UsageError("uniform_distance: map leaves the space");
    }
    worst = std::max(worst, double(space(u[z], v[z])));
  }
  return worst;
}

/// Uniform distance between two point-valued maps given by their images.
template <typename Scalar>
double uniform_distance(const AmbientMetric<Scalar>& metric, const PointSet& u, const PointSet& v) {
  if (u.cols() != v.cols()) throw UsageError("uniform_distance: maps have different domains");
  double worst = 0;
  for (Index z = 0; z < u.cols(); ++z) worst = std::max(worst, double(metric(u.col(z), v.col(z))));
  return worst;
}

/// C0 conjugacy defect sup_z d_Y(g(i(z)), i(f(z))) of i : X -> Y against
/// dynamics f on X and g on Y.
template <MetricSpace Y>
double c0_defect(const Y& codomain, std::span<const Index> assign, std::span<const Index> f,
                 std::span<const Index> g) {
  const auto n = static_cast<Index>(assign.size());
  if (static_cast<Index>(f.size()) != n) throw UsageError("c0_defect: f does not act on the domain");
  if (static_cast<Index>(g.size()) != codomain.size()) throw UsageError("c0_defect: g does not act on the codomain");
  for (Index x : f)
    if (x < 0 || x >= n) throw UsageError("c0_defect: f leaves its space");
  for (Index y : g)
    if (y < 0 || y >= codomain.size()) throw UsageError("c0_defect: g leaves its space");
  std::vector<Index> g_after_i(assign.size()), i_after_f(assign.size());
  for (std::size_t z = 0; z < assign.size(); ++z) {
    g_after_i[z] = g[static_cast<std::size_t>(assign[z])];
    i_after_f[z] = assign[static_cast<std::size_t>(f[z])];
  }
  return uniform_distance(codomain, g_after_i, i_after_f);
}

/// max{delta(i), delta(j), c0(i, f, g), c0(j, g, f)}: any D strictly above
/// this value is witnessed by (i, j) as an upper bound for d_GH0(f, g).
template <MetricSpace X, MetricSpace Y>
double gh0_witness_bound(const X& x, const Y& y, std::span<const Index> i, std::span<const Index> j,
                         std::span<const Index> f, std::span<const Index> g) {
  const double di = delta_constant(x, y, i).delta_constant;
  const double dj = delta_constant(y, x, j).delta_constant;
  const double ci = c0_defect(y, i, f, g);
  const double cj = c0_defect(x, j, g, f);
  return std::max({di, dj, ci, cj});
}

}  // namespace gh0
