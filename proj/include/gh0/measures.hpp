#pragma once

#include "gh0/core.hpp"
#include "gh0/dynamics.hpp"
#include "gh0/isometry.hpp"
#include "gh0/metric_core.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace gh0 {

/// Atoms of ambient measures closer than this in every coordinate merge.
inline constexpr double kAtomMergeTolerance = 1e-12;

inline bool same_atom(Index a, Index b) { return a == b; }
inline bool same_atom(const Point& a, const Point& b) {
  return a.size() == b.size() && ((a - b).cwiseAbs().array() <= kAtomMergeTolerance).all();
}

/// Finitely many weighted atoms: finite-system indices or ambient points.
template <class Atom>
struct AtomicMeasure {
  std::vector<Atom> atoms;
  std::vector<double> weights;

  Index size() const { return static_cast<Index>(atoms.size()); }
  double total() const {
    double t = 0;
    for (double w : weights) t += w;
    return t;
  }

  /// Positive weights summing to 1 within 1e-12, distinct atoms.
  void validate() const {
    if (atoms.size() != weights.size()) throw UsageError("measure: atom and weight counts differ");
    if (atoms.empty()) throw UsageError("measure: no atoms");
    for (double w : weights)
      if (!(w > 0) || !std::isfinite(w)) throw UsageError("measure: weights must be positive");
    if (std::abs(total() - 1) > 1e-12) throw UsageError("measure: weights do not sum to 1");
    for (std::size_t a = 0; a < atoms.size(); ++a)
      for (std::size_t b = a + 1; b < atoms.size(); ++b)
        if (same_atom(atoms[a], atoms[b])) throw UsageError("measure: repeated atom");
  }

  /// Weight of the atom matching `x`, or 0.
  double weight_of(const Atom& x) const {
    for (std::size_t a = 0; a < atoms.size(); ++a)
      if (same_atom(atoms[a], x)) return weights[a];
    return 0;
  }
};

using FiniteMeasure = AtomicMeasure<Index>;
using AmbientMeasure = AtomicMeasure<Point>;

/// Merge coincident atoms by adding weights; atoms keep the order of
/// their first appearance.
template <class Atom>
AtomicMeasure<Atom> merge_atoms(const std::vector<Atom>& atoms, const std::vector<double>& weights) {
  AtomicMeasure<Atom> mu;
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    bool merged = false;
    for (std::size_t b = 0; b < mu.atoms.size(); ++b)
      if (same_atom(mu.atoms[b], atoms[a])) {
        mu.weights[b] += weights[a];
        merged = true;
        break;
      }
    if (!merged) {
      mu.atoms.push_back(atoms[a]);
      mu.weights.push_back(weights[a]);
    }
  }
  return mu;
}

/// Uniform measure on the orbit of p.
template <MetricSpace S>
FiniteMeasure periodic_orbit_measure(const FiniteDynSystem<S>& fd, Index p) {
  if (p < 0 || p >= fd.size()) throw UsageError("periodic_orbit_measure: point out of range");
  FiniteMeasure mu;
  Index u = p;
  do {
    mu.atoms.push_back(u);
    u = fd(u);
  } while (u != p);
  mu.weights.assign(mu.atoms.size(), 1.0 / double(mu.atoms.size()));
  return mu;
}

/// sum_{n=1}^{K} 2^-n parts[n-1], renormalized by 1 - 2^-K.
template <class Atom>
AtomicMeasure<Atom> mixture_measure(std::span<const AtomicMeasure<Atom>> parts) {
  if (parts.empty()) throw UsageError("mixture_measure: no parts");
  const auto k = static_cast<int>(parts.size());
  const double norm = 1 - std::exp2(-k);
  std::vector<Atom> atoms;
  std::vector<double> weights;
  for (int n = 1; n <= k; ++n) {
    const auto& part = parts[static_cast<std::size_t>(n - 1)];
    const double scale = std::exp2(-n) / norm;
    for (std::size_t a = 0; a < part.atoms.size(); ++a) {
      atoms.push_back(part.atoms[a]);
      weights.push_back(scale * part.weights[a]);
    }
  }
  return merge_atoms(atoms, weights);
}

template <class Atom, class Map>
AtomicMeasure<Atom> pushforward(const AtomicMeasure<Atom>& mu, Map&& map) {
  std::vector<Atom> atoms;
  atoms.reserve(mu.atoms.size());
  for (const Atom& a : mu.atoms) atoms.push_back(map(a));
  return merge_atoms(atoms, mu.weights);
}

/// Half the l1 distance between the weight vectors over the union of atoms.
template <class Atom>
double total_variation(const AtomicMeasure<Atom>& a, const AtomicMeasure<Atom>& b) {
  double sum = 0;
  for (std::size_t k = 0; k < a.atoms.size(); ++k) sum += std::abs(a.weights[k] - b.weight_of(a.atoms[k]));
  for (std::size_t k = 0; k < b.atoms.size(); ++k)
    if (a.weight_of(b.atoms[k]) == 0) sum += b.weights[k];
  return sum / 2;
}

template <class Atom, class Map>
double invariance_defect(const AtomicMeasure<Atom>& mu, Map&& map) {
  return total_variation(mu, pushforward(mu, map));
}

struct SupportCover {
  bool covers = false;
  double worst_gap = 0;
};

/// Does every sample point have an atom within eps?
template <MetricSpace S>
SupportCover support_covers(const FiniteMeasure& mu, const S& space, std::span<const Index> sample, double eps) {
  if (!(eps > 0)) throw UsageError("support_covers: eps must be positive");
  if (mu.atoms.empty()) throw UsageError("support_covers: measure has no atoms");
  SupportCover c;
  for (Index x : sample) {
    double gap = std::numeric_limits<double>::infinity();
    for (Index a : mu.atoms) gap = std::min(gap, double(space(x, a)));
    c.worst_gap = std::max(c.worst_gap, gap);
  }
  c.covers = c.worst_gap < eps;
  return c;
}

inline SupportCover support_covers(const AmbientMeasure& mu, const AmbientMetricD& metric, const PointSet& sample,
                                   double eps) {
  if (!(eps > 0)) throw UsageError("support_covers: eps must be positive");
  if (mu.atoms.empty()) throw UsageError("support_covers: measure has no atoms");
  SupportCover c;
  for (Index x = 0; x < sample.cols(); ++x) {
    double gap = std::numeric_limits<double>::infinity();
    for (const Point& a : mu.atoms) gap = std::min(gap, metric(sample.col(x), a));
    c.worst_gap = std::max(c.worst_gap, gap);
  }
  c.covers = c.worst_gap < eps;
  return c;
}

/// First k <= cap with d(f^k(x), center) < radius.
std::optional<Index> birkhoff_hitting(const SystemOracle& s, const Point& x, const Point& center, double radius,
                                      Index cap);

struct SemiconjugacyDefect {
  double c0 = 0;  ///< sup_y d(f(h(y)), h(g(y)))
  IsometryDefect iso;
};

/// How far h : Y -> X is from satisfying f o h = h o g.
template <MetricSpace SY, MetricSpace SX>
SemiconjugacyDefect semiconjugacy_defect(std::span<const Index> h, const FiniteDynSystem<SY>& g,
                                         const FiniteDynSystem<SX>& f) {
  detail::check_assignment(h, g.size(), f.size());
  SemiconjugacyDefect out;
  for (Index y = 0; y < g.size(); ++y) {
    const Index fh = f(h[static_cast<std::size_t>(y)]);
    const Index hg = h[static_cast<std::size_t>(g(y))];
    out.c0 = std::max(out.c0, double(f.space()(fh, hg)));
  }
  out.iso = delta_constant(g.space(), f.space(), h);
  return out;
}

/// Points y of period m under g with f^m(h(y)) != h(y), by tracing orbits.
template <MetricSpace SY, MetricSpace SX>
std::vector<Index> periodic_transfer_violations(std::span<const Index> h, const FiniteDynSystem<SY>& g,
                                                const FiniteDynSystem<SX>& f) {
  detail::check_assignment(h, g.size(), f.size());
  std::vector<Index> bad;
  for (Index y = 0; y < g.size(); ++y) {
    Index m = 0;
    Index u = y;
    do {
      u = g(u);
      ++m;
    } while (u != y);
    Index x = h[static_cast<std::size_t>(y)];
    for (Index k = 0; k < m; ++k) x = f(x);
    if (x != h[static_cast<std::size_t>(y)]) bad.push_back(y);
  }
  return bad;
}

}  // namespace gh0
