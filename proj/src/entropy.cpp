#include "gh0/entropy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace gh0 {

namespace detail {

CycleLayout cycle_layout(std::span<const Index> perm) {
  if (!is_bijection(perm)) throw UsageError("cycle_layout: not a permutation");
  const std::size_t m = perm.size();
  CycleLayout c;
  c.start.assign(m, -1);
  c.pos.assign(m, 0);
  c.period.assign(m, 0);
  c.slots.reserve(m);
  for (std::size_t x = 0; x < m; ++x) {
    if (c.start[x] >= 0) continue;
    const auto first = static_cast<Index>(c.slots.size());
    auto u = static_cast<Index>(x);
    do {
      c.start[static_cast<std::size_t>(u)] = first;
      c.pos[static_cast<std::size_t>(u)] = static_cast<Index>(c.slots.size()) - first;
      c.slots.push_back(u);
      u = perm[static_cast<std::size_t>(u)];
    } while (u != static_cast<Index>(x));
    const Index p = static_cast<Index>(c.slots.size()) - first;
    for (Index k = first; k < first + p; ++k) c.period[static_cast<std::size_t>(c.slots[static_cast<std::size_t>(k)])] = p;
  }
  return c;
}

}  // namespace detail

OrbitTable ambient_orbit_table(const SystemOracle& s, const PointSet& points, Index length) {
  if (length < 1) throw UsageError("orbit table needs at least one iterate");
  const Index m = points.cols();
  auto orbits = std::make_shared<PointSet>(points.rows(), m * length);
  for (Index x = 0; x < m; ++x) {
    Point cur = points.col(x);
    for (Index j = 0; j < length; ++j) {
      orbits->col(j * m + x) = cur;
      if (j + 1 < length) cur = s.forward(cur);
    }
  }
  const AmbientMetricD metric = s.metric;
  return OrbitTable(m, length, [orbits, metric, m](Index j, Index x, Index y) {
    return metric(orbits->col(j * m + x), orbits->col(j * m + y));
  });
}

bool is_separated(const OrbitTable& orbits, std::span<const Index> e, Index n, double delta) {
  if (n < 1 || n > orbits.length()) throw UsageError("is_separated: orbit table does not cover n iterates");
  for (std::size_t a = 0; a < e.size(); ++a)
    for (std::size_t b = a + 1; b < e.size(); ++b) {
      if (e[a] == e[b]) return false;
      double far = 0;
      for (Index j = 0; j < n && far < delta; ++j) far = std::max(far, orbits(j, e[a], e[b]));
      if (!(far >= delta)) return false;
    }
  return true;
}

const char* to_string(Exactness e) { return e == Exactness::exact ? "exact" : "greedy_lower_bound"; }

Exactness exactness_from_string(const std::string& s) {
  if (s == "exact") return Exactness::exact;
  if (s == "greedy_lower_bound") return Exactness::greedy_lower_bound;
  throw DataError("unknown exactness '" + s + "'");
}

namespace {

constexpr Index kForever = std::numeric_limits<Index>::max();

// A conflict edge joins x < y while d(f^j x, f^j y) < delta for all j < n;
// `death` is the first j where the pair separates, so it is present for
// n <= death.
struct Edge {
  Index x, y, death;
};

Index gcd_lcm(Index a, Index b) { return a / std::gcd(a, b) * b; }

// Conflict edges with deaths located up to `horizon` (kForever beyond it).
// Periodic tables are scanned over the joint period when `full_period` is set,
// which makes kForever exact.
std::vector<Edge> conflict_edges(const OrbitTable& t, double delta, Index horizon, bool full_period) {
  std::vector<Edge> edges;
  const Index m = t.size();
  for (Index x = 0; x < m; ++x)
    for (Index y = x + 1; y < m; ++y) {
      if (!(t(0, x, y) < delta)) continue;
      Index limit = std::min(horizon, t.length());
      if (full_period && t.periodic()) limit = gcd_lcm(t.period(x), t.period(y));
      Index death = kForever;
      for (Index j = 1; j < limit; ++j)
        if (!(t(j, x, y) < delta)) {
          death = j;
          break;
        }
      edges.push_back({x, y, death});
    }
  return edges;
}

class UnionFind {
 public:
  explicit UnionFind(Index n) : parent_(static_cast<std::size_t>(n)) { std::iota(parent_.begin(), parent_.end(), Index(0)); }
  Index find(Index x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }

 private:
  std::vector<Index> parent_;
};

// Maximum clique of a graph on at most 64 vertices given by bit rows,
// branch and bound with the greedy coloring bound.
class MaxClique {
 public:
  explicit MaxClique(std::vector<std::uint64_t> adj) : adj_(std::move(adj)) {}

  std::uint64_t solve(std::uint64_t seed) {
    best_ = seed;
    best_size_ = std::popcount(seed);
    const int n = static_cast<int>(adj_.size());
    expand(n == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << n) - 1, 0, 0);
    return best_;
  }

 private:
  void expand(std::uint64_t p, int size, std::uint64_t cur) {
    std::vector<std::pair<int, int>> order;  // (vertex, color bound)
    std::uint64_t uncolored = p;
    int color = 0;
    while (uncolored) {
      ++color;
      std::uint64_t q = uncolored;
      while (q) {
        const int v = std::countr_zero(q);
        q &= ~(std::uint64_t(1) << v);
        q &= ~adj_[static_cast<std::size_t>(v)];
        uncolored &= ~(std::uint64_t(1) << v);
        order.emplace_back(v, color);
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto [v, c] = *it;
      if (size + c <= best_size_) return;
      const std::uint64_t bit = std::uint64_t(1) << v;
      const std::uint64_t next = p & adj_[static_cast<std::size_t>(v)];
      if (next == 0) {
        if (size + 1 > best_size_) {
          best_size_ = size + 1;
          best_ = cur | bit;
        }
      } else {
        expand(next, size + 1, cur | bit);
      }
      p &= ~bit;
    }
  }

  std::vector<std::uint64_t> adj_;
  std::uint64_t best_ = 0;
  int best_size_ = 0;
};

struct Solved {
  std::vector<Index> points;
  bool exact = true;
};

// Independent set of the conflict graph built from edges alive at n,
// exact per component up to `budget` vertices and greedy above.
Solved solve_graph(Index m, const std::vector<Edge>& edges, Index n, Index budget, bool allow_greedy) {
  std::vector<std::vector<Index>> nbr(static_cast<std::size_t>(m));
  UnionFind uf(m);
  for (const Edge& e : edges) {
    if (e.death < n) continue;
    nbr[static_cast<std::size_t>(e.x)].push_back(e.y);
    nbr[static_cast<std::size_t>(e.y)].push_back(e.x);
    uf.unite(e.x, e.y);
  }
  std::vector<std::vector<Index>> comps;
  std::vector<Index> comp_of(static_cast<std::size_t>(m), -1);
  for (Index x = 0; x < m; ++x) {
    const Index r = uf.find(x);
    if (comp_of[static_cast<std::size_t>(r)] < 0) {
      comp_of[static_cast<std::size_t>(r)] = static_cast<Index>(comps.size());
      comps.emplace_back();
    }
    comps[static_cast<std::size_t>(comp_of[static_cast<std::size_t>(r)])].push_back(x);
  }

  Solved out;
  std::vector<Index> local(static_cast<std::size_t>(m), -1);
  std::vector<bool> chosen(static_cast<std::size_t>(m), false);
  for (const auto& comp : comps) {
    // Greedy in index order; it also seeds the exact search.
    std::vector<Index> greedy;
    for (Index x : comp) {
      bool free = true;
      for (Index y : nbr[static_cast<std::size_t>(x)])
        if (chosen[static_cast<std::size_t>(y)]) {
          free = false;
          break;
        }
      if (free) {
        chosen[static_cast<std::size_t>(x)] = true;
        greedy.push_back(x);
      }
    }
    if (static_cast<Index>(comp.size()) > budget) {
      if (!allow_greedy) {
        throw BudgetExceeded("conflict-graph component of " + std::to_string(comp.size()) +
                             " points exceeds the exact budget of " + std::to_string(budget));
      }
      out.exact = false;
      out.points.insert(out.points.end(), greedy.begin(), greedy.end());
      continue;
    }
    if (comp.size() == 1) {
      out.points.push_back(comp.front());
      continue;
    }
    const std::size_t k = comp.size();
    for (std::size_t a = 0; a < k; ++a) local[static_cast<std::size_t>(comp[a])] = static_cast<Index>(a);
    // Independent sets of the conflict graph are cliques of its complement.
    const std::uint64_t all = k == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << k) - 1;
    std::vector<std::uint64_t> adj(k);
    for (std::size_t a = 0; a < k; ++a) {
      std::uint64_t conflict = std::uint64_t(1) << a;
      for (Index y : nbr[static_cast<std::size_t>(comp[a])]) conflict |= std::uint64_t(1) << local[static_cast<std::size_t>(y)];
      adj[a] = all & ~conflict;
    }
    std::uint64_t seed = 0;
    for (Index x : greedy) seed |= std::uint64_t(1) << local[static_cast<std::size_t>(x)];
    const std::uint64_t best = MaxClique(std::move(adj)).solve(seed);
    for (std::size_t a = 0; a < k; ++a)
      if (best >> a & 1) out.points.push_back(comp[a]);
  }
  std::sort(out.points.begin(), out.points.end());
  return out;
}

void check_delta(double delta) {
  if (!(delta >= 0) || !std::isfinite(delta)) throw UsageError("separation delta must be finite and nonnegative");
}

void check_n(const OrbitTable& t, Index n) {
  if (n < 1 || n > t.length()) throw UsageError("orbit table does not cover n iterates");
}

// Rows n = 1..n_last; a row never drops below the previous witness, which
// stays separated as n grows.
std::vector<SeparationRow> count_rows(const OrbitTable& t, const std::vector<Edge>& edges, Index n_last, Index budget) {
  std::vector<SeparationRow> rows;
  std::size_t previous = 0;
  for (Index n = 1; n <= n_last; ++n) {
    Solved s = solve_graph(t.size(), edges, n, budget, true);
    SeparationRow row{n, static_cast<Index>(s.points.size()), s.exact ? Exactness::exact : Exactness::greedy_lower_bound};
    if (s.points.size() < previous) row.count = static_cast<Index>(previous);
    previous = static_cast<std::size_t>(row.count);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

SeparatedSet max_separated_exact(const OrbitTable& orbits, Index n, double delta, Index budget) {
  check_delta(delta);
  check_n(orbits, n);
  if (budget < 1 || budget > 64) throw UsageError("exact budget must lie in [1, 64]");
  const auto edges = conflict_edges(orbits, delta, n, false);
  return {solve_graph(orbits.size(), edges, n, budget, false).points};
}

SeparatedSet max_separated_greedy(const OrbitTable& orbits, Index n, double delta) {
  check_delta(delta);
  check_n(orbits, n);
  const auto edges = conflict_edges(orbits, delta, n, false);
  return {solve_graph(orbits.size(), edges, n, 0, true).points};
}

double entropy_slope(std::span<const SeparationRow> rows, std::pair<Index, Index> window) {
  std::vector<double> xs, ys;
  for (const SeparationRow& r : rows)
    if (r.n >= window.first && r.n <= window.second) {
      if (r.count < 1) throw UsageError("entropy_slope: counts must be positive");
      xs.push_back(double(r.n));
      ys.push_back(std::log(double(r.count)));
    }
  if (xs.size() < 2) throw UsageError("entropy_slope: need at least two rows in the window");
  const auto k = double(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
  double sxy = 0, sxx = 0;
  for (std::size_t a = 0; a < xs.size(); ++a) {
    sxy += (xs[a] - mx) * (ys[a] - my);
    sxx += (xs[a] - mx) * (xs[a] - mx);
  }
  return sxy / sxx;
}

SeparationReport separation_report(const OrbitTable& orbits, double delta, Index n_max, std::pair<Index, Index> window,
                                   Index budget) {
  check_delta(delta);
  check_n(orbits, n_max);
  if (budget < 0 || budget > 64) throw UsageError("exact budget must lie in [0, 64]");
  SeparationReport r;
  r.delta = delta;
  r.points = orbits.size();
  r.window = window;
  r.rows = count_rows(orbits, conflict_edges(orbits, delta, n_max, false), n_max, budget);
  r.slope = entropy_slope(r.rows, window);
  return r;
}

SeparationReport finite_table_entropy(const OrbitTable& orbits, double delta, Index n_max,
                                      std::optional<std::pair<Index, Index>> window, Index budget) {
  check_delta(delta);
  if (n_max < 1) throw UsageError("n_max must be positive");
  if (!orbits.periodic()) throw UsageError("finite_table_entropy: table is not periodic");
  if (budget < 0 || budget > 64) throw UsageError("exact budget must lie in [0, 64]");

  const auto edges = conflict_edges(orbits, delta, kForever, true);
  Index last_death = 0;
  for (const Edge& e : edges)
    if (e.death != kForever) last_death = std::max(last_death, e.death);
  const Index saturation = last_death + 1;
  const Index n_last = std::max(n_max, saturation + 1);

  SeparationReport r;
  r.delta = delta;
  r.points = orbits.size();
  r.rows = count_rows(orbits, edges, n_last, budget);
  for (const SeparationRow& row : r.rows)
    if (row.count > orbits.size()) throw std::logic_error("separated count exceeds the number of points");
  r.saturation_n = saturation;
  r.tail_slope = entropy_slope(r.rows, {saturation, n_last});
  r.window = window.value_or(std::pair{saturation, n_last});
  r.slope = entropy_slope(r.rows, r.window);
  return r;
}

}  // namespace gh0
