#pragma once

#include "gh0/core.hpp"
#include "gh0/dynamics.hpp"
#include "gh0/metric_core.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gh0 {

/// Distances d(f^j(x), f^j(y)) over a fixed point set. Tables of finite
/// systems are periodic and defined for every j; ambient tables stop at
/// `length`.
class OrbitTable {
 public:
  using Distance = std::function<double(Index j, Index x, Index y)>;

  OrbitTable(Index points, Index length, Distance d, std::vector<Index> periods = {})
      : points_(points), length_(length), d_(std::move(d)), periods_(std::move(periods)) {
    if (points < 0 || length < 1) throw UsageError("orbit table needs at least one iterate");
    if (!periods_.empty() && static_cast<Index>(periods_.size()) != points) {
      throw UsageError("orbit table periods do not match its points");
    }
  }

  Index size() const { return points_; }
  Index length() const { return length_; }
  bool periodic() const { return !periods_.empty(); }
  Index period(Index x) const { return periods_[static_cast<std::size_t>(x)]; }
  double operator()(Index j, Index x, Index y) const { return d_(j, x, y); }

 private:
  Index points_;
  Index length_;
  Distance d_;
  std::vector<Index> periods_;
};

namespace detail {

// Position of every point on its cycle, flattened cycle lists and periods.
struct CycleLayout {
  std::vector<Index> start;   // first slot of the point's cycle in `slots`
  std::vector<Index> pos;     // position on the cycle
  std::vector<Index> period;
  std::vector<Index> slots;   // cycles laid out one after the other
};

CycleLayout cycle_layout(std::span<const Index> perm);

}  // namespace detail

/// Orbits of every point of a finite system.
template <MetricSpace S>
OrbitTable finite_orbit_table(const FiniteDynSystem<S>& fd) {
  auto layout = std::make_shared<const detail::CycleLayout>(detail::cycle_layout(fd.perm()));
  auto space = std::make_shared<const S>(fd.space());
  auto at = [layout](Index j, Index x) {
    const auto u = static_cast<std::size_t>(x);
    const Index p = layout->period[u];
    return layout->slots[static_cast<std::size_t>(layout->start[u] + (layout->pos[u] + j) % p)];
  };
  std::vector<Index> periods = layout->period;
  return OrbitTable(
      fd.size(), std::numeric_limits<Index>::max(),
      [space, at](Index j, Index x, Index y) { return double((*space)(at(j, x), at(j, y))); }, std::move(periods));
}

/// Orbits of the columns of `points` under an analytic system.
OrbitTable ambient_orbit_table(const SystemOracle& s, const PointSet& points, Index length);

/// True iff every distinct pair of E reaches distance >= delta at some
/// iterate j < n.
bool is_separated(const OrbitTable& orbits, std::span<const Index> e, Index n, double delta);

struct SeparatedSet {
  std::vector<Index> points;
  Index count() const { return static_cast<Index>(points.size()); }
};

/// Default cap on the size of a conflict-graph component solved exactly.
inline constexpr Index kDefaultExactBudget = 64;

/// Maximum (n, delta)-separated subset of the table's points. Throws
/// BudgetExceeded when a connected component of the conflict graph is
/// larger than `budget`.
SeparatedSet max_separated_exact(const OrbitTable& orbits, Index n, double delta,
                                 Index budget = kDefaultExactBudget);

/// Greedy maximal separated set in point-index order.
SeparatedSet max_separated_greedy(const OrbitTable& orbits, Index n, double delta);

enum class Exactness { exact, greedy_lower_bound };

const char* to_string(Exactness e);
Exactness exactness_from_string(const std::string& s);

struct SeparationRow {
  Index n = 0;
  Index count = 0;
  Exactness exactness = Exactness::exact;
};

struct SeparationReport {
  std::string label;
  double delta = 0;
  Index points = 0;                    ///< resolution: number of orbit starting points
  std::vector<SeparationRow> rows;     ///< n = 1, 2, ...
  std::pair<Index, Index> window{0, 0};
  double slope = 0;                    ///< least squares over the window
  std::optional<Index> saturation_n;   ///< first n from which the conflict graph no longer changes
  std::optional<double> tail_slope;    ///< slope over rows with n >= saturation_n
};

/// Least-squares slope of log(count) against n over rows with n in
/// [window.first, window.second].
double entropy_slope(std::span<const SeparationRow> rows, std::pair<Index, Index> window);

/// Separated counts for n = 1..n_max. Components above `budget` use the
/// greedy bound; a count never drops below the previous row because a
/// separated set stays separated for larger n.
SeparationReport separation_report(const OrbitTable& orbits, double delta, Index n_max, std::pair<Index, Index> window,
                                   Index budget = kDefaultExactBudget);

/// Counts of a periodic table for n = 1..n_max, continued past the n at
/// which the conflict graph stops changing if that comes later. Asserts
/// s_n <= |Y|. `slope` uses `window` when given and the saturated tail
/// otherwise.
SeparationReport finite_table_entropy(const OrbitTable& orbits, double delta, Index n_max,
                                      std::optional<std::pair<Index, Index>> window = std::nullopt,
                                      Index budget = kDefaultExactBudget);

template <MetricSpace S>
SeparationReport finite_system_entropy(const FiniteDynSystem<S>& fd, double delta, Index n_max,
                                       std::optional<std::pair<Index, Index>> window = std::nullopt,
                                       Index budget = kDefaultExactBudget) {
  return finite_table_entropy(finite_orbit_table(fd), delta, n_max, window, budget);
}

}  // namespace gh0
