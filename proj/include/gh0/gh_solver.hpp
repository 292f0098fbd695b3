#pragma once

#include "gh0/core.hpp"
#include "gh0/dynamics.hpp"
#include "gh0/isometry.hpp"
#include "gh0/metric_core.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace gh0 {

enum class GHMethod { exact, bounds };

inline const char* to_string(GHMethod m) { return m == GHMethod::exact ? "exact" : "bounds"; }

struct GHResult {
  double lower = 0;
  double upper = 0;
  std::optional<PointMap> witness_i;  ///< X -> Y
  std::optional<PointMap> witness_j;  ///< Y -> X
  GHMethod method = GHMethod::exact;
};

/// Default cap on |Y|^|X| * |X|^|Y| evaluated map pairs.
inline constexpr double kDefaultGHBudget = 1e7;

/// Number of (i, j) map pairs an exhaustive search would visit.
inline double map_pair_count(Index nx, Index ny) {
  return std::pow(double(ny), double(nx)) * std::pow(double(nx), double(ny));
}

namespace detail {

// Visit every map {0..n-1} -> {0..m-1} in lexicographic order of the
// assignment vector.
inline void for_each_map(Index n, Index m, const std::function<void(std::span<const Index>)>& visit) {
  std::vector<Index> a(static_cast<std::size_t>(n), 0);
  for (;;) {
    visit(a);
    Index pos = n - 1;
    while (pos >= 0 && a[static_cast<std::size_t>(pos)] == m - 1) a[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) return;
    ++a[static_cast<std::size_t>(pos)];
  }
}

struct SideOptimum {
  std::vector<double> costs;
  std::vector<std::vector<Index>> maps;
  double best = std::numeric_limits<double>::infinity();
};

inline SideOptimum enumerate_side(Index n, Index m, const std::function<double(std::span<const Index>)>& cost) {
  SideOptimum s;
  for_each_map(n, m, [&](std::span<const Index> a) {
    const double c = cost(a);
    s.costs.push_back(c);
    s.maps.emplace_back(a.begin(), a.end());
    s.best = std::min(s.best, c);
  });
  return s;
}

// The pair objective is max(cost(i), cost(j)), so the minimum over pairs
// is max(min cost(i), min cost(j)). The lexicographically first optimal
// pair takes the first i and the first j whose cost is within that value.
inline GHResult combine(const SideOptimum& fwd, const SideOptimum& bwd) {
  GHResult r;
  const double value = std::max(fwd.best, bwd.best);
  r.lower = r.upper = value;
  r.method = GHMethod::exact;
  for (std::size_t k = 0; k < fwd.costs.size(); ++k)
    if (fwd.costs[k] <= value) {
      r.witness_i = PointMap{fwd.maps[k]};
      break;
    }
  for (std::size_t k = 0; k < bwd.costs.size(); ++k)
    if (bwd.costs[k] <= value) {
      r.witness_j = PointMap{bwd.maps[k]};
      break;
    }
  return r;
}

inline void check_budget(Index nx, Index ny, double budget) {
  if (nx < 1 || ny < 1) throw UsageError("GH distance needs nonempty spaces");
  if (map_pair_count(nx, ny) > budget) {
    throw BudgetExceeded("exhaustive GH search over " + std::to_string(map_pair_count(nx, ny)) +
                         " map pairs exceeds the budget; use bounds instead");
  }
}

}  // namespace detail

/// Exact d_GH by exhaustive search over all pairs of maps.
template <MetricSpace X, MetricSpace Y>
GHResult gh_exact_small(const X& x, const Y& y, double budget = kDefaultGHBudget) {
  detail::check_budget(x.size(), y.size(), budget);
  const auto fwd = detail::enumerate_side(x.size(), y.size(), [&](std::span<const Index> i) {
    return delta_constant(x, y, i).delta_constant;
  });
  const auto bwd = detail::enumerate_side(y.size(), x.size(), [&](std::span<const Index> j) {
    return delta_constant(y, x, j).delta_constant;
  });
  return detail::combine(fwd, bwd);
}

/// Exact d_GH0 by exhaustive search over all pairs of maps.
template <MetricSpace X, MetricSpace Y>
GHResult gh0_exact_small(const FiniteDynSystem<X>& f, const FiniteDynSystem<Y>& g, double budget = kDefaultGHBudget) {
  detail::check_budget(f.size(), g.size(), budget);
  const auto fwd = detail::enumerate_side(f.size(), g.size(), [&](std::span<const Index> i) {
    return std::max(delta_constant(f.space(), g.space(), i).delta_constant, c0_defect(g.space(), i, f.perm(), g.perm()));
  });
  const auto bwd = detail::enumerate_side(g.size(), f.size(), [&](std::span<const Index> j) {
    return std::max(delta_constant(g.space(), f.space(), j).delta_constant, c0_defect(f.space(), j, g.perm(), f.perm()));
  });
  return detail::combine(fwd, bwd);
}

/// A D-isometry forces |diam X - diam Y| < 3D.
template <MetricSpace X, MetricSpace Y>
double gh_lower_bound(const X& x, const Y& y) {
  return std::abs(double(diameter(x)) - double(diameter(y))) / 3.0;
}

/// Certified upper bound for d_GH0(f, g) from explicit witnesses.
template <MetricSpace X, MetricSpace Y>
double gh0_upper_via_witness(const FiniteDynSystem<X>& f, const FiniteDynSystem<Y>& g, std::span<const Index> i,
                             std::span<const Index> j) {
  return gh0_witness_bound(f.space(), g.space(), i, j, f.perm(), g.perm());
}

namespace detail {

// Coordinate descent on one side's cost, from the map k -> k mod m.
inline std::vector<Index> descend(Index n, Index m, const std::function<double(std::span<const Index>)>& cost,
                                  int passes) {
  std::vector<Index> a(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) a[static_cast<std::size_t>(k)] = k % m;
  double best = cost(a);
  for (int p = 0; p < passes; ++p) {
    bool improved = false;
    for (Index k = 0; k < n; ++k) {
      const Index keep = a[static_cast<std::size_t>(k)];
      Index choice = keep;
      for (Index t = 0; t < m; ++t) {
        if (t == keep) continue;
        a[static_cast<std::size_t>(k)] = t;
        const double c = cost(a);
        if (c < best) {
          best = c;
          choice = t;
          improved = true;
        }
      }
      a[static_cast<std::size_t>(k)] = choice;
    }
    if (!improved) break;
  }
  return a;
}

}  // namespace detail

/// Bounds for d_GH0 when exhaustive search is over budget: the diameter
/// lower bound and the witness bound of a locally optimized pair of maps.
template <MetricSpace X, MetricSpace Y>
GHResult gh0_bounds(const FiniteDynSystem<X>& f, const FiniteDynSystem<Y>& g, double work_limit = 2e8) {
  const Index nx = f.size(), ny = g.size();
  if (nx < 1 || ny < 1) throw UsageError("GH distance needs nonempty spaces");
  auto cost_i = [&](std::span<const Index> i) {
    return std::max(delta_constant(f.space(), g.space(), i).delta_constant, c0_defect(g.space(), i, f.perm(), g.perm()));
  };
  auto cost_j = [&](std::span<const Index> j) {
    return std::max(delta_constant(g.space(), f.space(), j).delta_constant, c0_defect(f.space(), j, g.perm(), f.perm()));
  };
  const double per_pass = double(nx) * double(ny) * double(nx + ny) * double(nx + ny);
  const int passes = per_pass <= work_limit ? 3 : 0;
  GHResult r;
  r.method = GHMethod::bounds;
  r.witness_i = PointMap{detail::descend(nx, ny, cost_i, passes)};
  r.witness_j = PointMap{detail::descend(ny, nx, cost_j, passes)};
  r.lower = gh_lower_bound(f.space(), g.space());
  r.upper = gh0_upper_via_witness(f, g, r.witness_i->assign, r.witness_j->assign);
  return r;
}

}  // namespace gh0
