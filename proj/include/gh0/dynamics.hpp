#pragma once

#include "gh0/core.hpp"
#include "gh0/metric_core.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gh0 {

bool is_bijection(std::span<const Index> perm);

/// Finite metric space together with a permutation of its points.
template <MetricSpace Space>
class FiniteDynSystem {
 public:
  FiniteDynSystem() = default;
  FiniteDynSystem(Space space, std::vector<Index> perm) : space_(std::move(space)), perm_(std::move(perm)) {
    if (static_cast<Index>(perm_.size()) != space_.size()) throw UsageError("permutation size does not match space");
    if (!is_bijection(perm_)) throw UsageError("map is not a bijection of the point set");
  }

  Index size() const { return space_.size(); }
  const Space& space() const { return space_; }
  std::span<const Index> perm() const { return perm_; }
  Index operator()(Index i) const { return perm_[static_cast<std::size_t>(i)]; }

  std::vector<Index> inverse_perm() const {
    std::vector<Index> inv(perm_.size());
    for (std::size_t i = 0; i < perm_.size(); ++i) inv[static_cast<std::size_t>(perm_[i])] = static_cast<Index>(i);
    return inv;
  }

 private:
  Space space_;
  std::vector<Index> perm_;
};

using FiniteDynSystemD = FiniteDynSystem<MetricSpaceD>;

// ---------------------------------------------------------------------------
// System descriptors

/// Rotation x -> x + theta on the circle. When `den` is positive the
/// angle is the exact rational num/den and points of the 1/den lattice
/// are rotated exactly.
struct RotationSpec {
  double theta = 0;
  std::int64_t num = 0;
  std::int64_t den = 0;
};

/// The linear cat map (x, y) -> (2x + y, x + y) on the unit torus.
/// `fixed_seed` pins anchor searches to the fixed point (0, 0) with no
/// fallback, a deliberately degenerate configuration.
struct CatSpec {
  bool fixed_seed = false;
};

/// Cat map restricted to the (1/N) lattice of the torus.
struct GridCatSpec {
  Index n = 2;
};

/// An explicit finite system; points are encoded by their index.
struct FiniteSpec {
  std::shared_ptr<const FiniteDynSystemD> system;
};

using SystemSpec = std::variant<RotationSpec, CatSpec, GridCatSpec, FiniteSpec>;

/// A homeomorphism given analytically: forward and inverse maps, the
/// ambient metric and a deterministic sampler.
struct SystemOracle {
  SystemSpec spec;
  std::string name;
  int dim = 1;
  AmbientMetricD metric;
  std::function<Point(const Point&)> forward;
  std::function<Point(const Point&)> inverse;
  /// Returns dim x count points; pure in (count, seed). Finite phase
  /// spaces return every point regardless of count.
  std::function<PointSet(Index count, std::uint64_t seed)> sampler;
  std::optional<double> lipschitz;
  std::optional<Point> anchor_seed;
  bool seed_fallback = true;

  double distance(const Point& a, const Point& b) const { return metric(a, b); }
};

double golden_angle();

SystemOracle circle_rotation(double theta);
SystemOracle circle_rotation_rational(std::int64_t num, std::int64_t den);
SystemOracle torus_cat_map(bool fixed_seed = false);
SystemOracle grid_cat_oracle(Index n);
SystemOracle finite_oracle(std::shared_ptr<const FiniteDynSystemD> system);
SystemOracle make_oracle(const SystemSpec& spec);

/// Operator norm of the cat matrix, i.e. its largest eigenvalue.
double cat_map_lipschitz();

/// The cat map on the N x N lattice; point a*N + b sits at (a/N, b/N).
FiniteDynSystemD grid_cat_system(Index n);

/// [x, f(x), ..., f^n(x)] as columns.
PointSet orbit_segment(const SystemOracle& s, const Point& x, Index n);

/// Largest round-trip error max(d(f(g(x)), x), d(g(f(x)), x)) over the columns of `sample`.
double inverse_defect(const SystemOracle& s, const PointSet& sample);

}  // namespace gh0
