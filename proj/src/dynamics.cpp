#include "gh0/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <sstream>

namespace gh0 {

bool is_bijection(std::span<const Index> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (Index p : perm) {
    if (p < 0 || p >= static_cast<Index>(perm.size()) || seen[static_cast<std::size_t>(p)]) return false;
    seen[static_cast<std::size_t>(p)] = true;
  }
  return true;
}

double golden_angle() { return (std::sqrt(5.0) - 1.0) / 2.0; }

namespace {

Point point1(double x) {
  Point p(1);
  p << x;
  return p;
}

Point point2(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

// Lattice index k when x is exactly the double nearest k/den.
std::optional<std::int64_t> lattice_index(double x, std::int64_t den) {
  const auto k = static_cast<std::int64_t>(std::llround(x * static_cast<double>(den)));
  if (k < 0 || k > den) return std::nullopt;
  if (static_cast<double>(k) / static_cast<double>(den) != x) return std::nullopt;
  return k % den;
}

std::int64_t mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

PointSet shifted_grid_1d(Index count, std::uint64_t seed) {
  PointSet s(1, count);
  const double offset = uniform01(seed, 0);
  for (Index k = 0; k < count; ++k) s(0, k) = wrap_unit(offset + static_cast<double>(k) / static_cast<double>(count));
  return s;
}

// Additive recurrence with the plastic-number generator.
PointSet r2_sequence(Index count, std::uint64_t seed) {
  constexpr double g = 1.32471795724474602596;
  const double a1 = 1.0 / g, a2 = 1.0 / (g * g);
  const double u1 = uniform01(seed, 0), u2 = uniform01(seed, 1);
  PointSet s(2, count);
  for (Index k = 0; k < count; ++k) {
    s(0, k) = wrap_unit(u1 + static_cast<double>(k) * a1);
    s(1, k) = wrap_unit(u2 + static_cast<double>(k) * a2);
  }
  return s;
}

Point cat_forward(const Point& p) { return point2(wrap_unit(2 * p(0) + p(1)), wrap_unit(p(0) + p(1))); }
Point cat_inverse(const Point& p) { return point2(wrap_unit(p(0) - p(1)), wrap_unit(2 * p(1) - p(0))); }

}  // namespace

SystemOracle circle_rotation(double theta) {
  SystemOracle s;
  s.spec = RotationSpec{theta, 0, 0};
  std::ostringstream name;
  name.precision(17);
  name << "rotation:" << theta;
  s.name = name.str();
  s.dim = 1;
  s.metric = AmbientMetricD::flat_torus(1);
  s.forward = [theta](const Point& x) { return point1(wrap_unit(x(0) + theta)); };
  s.inverse = [theta](const Point& x) { return point1(wrap_unit(x(0) - theta)); };
  s.sampler = shifted_grid_1d;
  s.lipschitz = 1.0;
  return s;
}

SystemOracle circle_rotation_rational(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw UsageError("rotation denominator must be positive");
  const std::int64_t g = std::gcd(mod(num, den), den);
  const std::int64_t p = mod(num, den) / g, q = den / g;
  const double theta = static_cast<double>(p) / static_cast<double>(q);

  SystemOracle s = circle_rotation(theta);
  s.spec = RotationSpec{theta, p, q};
  s.name = "rotation:" + std::to_string(p) + "/" + std::to_string(q);
  auto step = [p, q, theta](const Point& x, std::int64_t sign) {
    if (auto k = lattice_index(x(0), q)) {
      return point1(static_cast<double>(mod(*k + sign * p, q)) / static_cast<double>(q));
    }
    return point1(wrap_unit(x(0) + static_cast<double>(sign) * theta));
  };
  s.forward = [step](const Point& x) { return step(x, 1); };
  s.inverse = [step](const Point& x) { return step(x, -1); };
  return s;
}

double cat_map_lipschitz() {
  Eigen::Matrix2d a;
  a << 2, 1, 1, 1;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

SystemOracle torus_cat_map(bool fixed_seed) {
  SystemOracle s;
  s.spec = CatSpec{fixed_seed};
  s.name = fixed_seed ? "cat-fixed-seed" : "cat";
  s.dim = 2;
  s.metric = AmbientMetricD::flat_torus(2);
  s.forward = cat_forward;
  s.inverse = cat_inverse;
  s.sampler = r2_sequence;
  s.lipschitz = cat_map_lipschitz();
  if (fixed_seed) {
    s.anchor_seed = point2(0, 0);
    s.seed_fallback = false;
  }
  return s;
}

SystemOracle grid_cat_oracle(Index n) {
  if (n < 1) throw UsageError("grid size must be positive");
  SystemOracle s;
  s.spec = GridCatSpec{n};
  s.name = "grid_cat:" + std::to_string(n);
  s.dim = 2;
  s.metric = AmbientMetricD::flat_torus(2);
  const auto N = static_cast<std::int64_t>(n);
  auto on_grid = [N](const Point& p, auto&& lattice_map, auto&& fallback) {
    auto a = lattice_index(p(0), N), b = lattice_index(p(1), N);
    if (!a || !b) return fallback(p);
    auto [x, y] = lattice_map(*a, *b);
    return point2(static_cast<double>(mod(x, N)) / static_cast<double>(N),
                  static_cast<double>(mod(y, N)) / static_cast<double>(N));
  };
  s.forward = [on_grid](const Point& p) {
    return on_grid(p, [](std::int64_t a, std::int64_t b) { return std::pair{2 * a + b, a + b}; }, cat_forward);
  };
  s.inverse = [on_grid](const Point& p) {
    return on_grid(p, [](std::int64_t a, std::int64_t b) { return std::pair{a - b, 2 * b - a}; }, cat_inverse);
  };
  s.sampler = [n](Index, std::uint64_t) {
    PointSet pts(2, n * n);
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) {
        pts(0, a * n + b) = static_cast<double>(a) / static_cast<double>(n);
        pts(1, a * n + b) = static_cast<double>(b) / static_cast<double>(n);
      }
    return pts;
  };
  s.lipschitz = cat_map_lipschitz();
  return s;
}

SystemOracle finite_oracle(std::shared_ptr<const FiniteDynSystemD> system) {
  if (!system) throw UsageError("finite oracle needs a system");
  SystemOracle s;
  s.spec = FiniteSpec{system};
  s.name = "finite:" + std::to_string(system->size());
  s.dim = 1;
  auto table = std::shared_ptr<const MetricSpaceD::Matrix>(system, &system->space().matrix());
  s.metric = AmbientMetricD::table(table);
  auto inverse = std::make_shared<std::vector<Index>>(system->inverse_perm());
  auto index_of = [system](const Point& x) {
    const auto i = static_cast<Index>(std::llround(x(0)));
    if (i < 0 || i >= system->size() || static_cast<double>(i) != x(0)) {
      throw UsageError("point is not an index of the finite system");
    }
    return i;
  };
  s.forward = [system, index_of](const Point& x) { return point1(static_cast<double>((*system)(index_of(x)))); };
  s.inverse = [inverse, index_of](const Point& x) {
    return point1(static_cast<double>((*inverse)[static_cast<std::size_t>(index_of(x))]));
  };
  s.sampler = [system](Index, std::uint64_t) {
    PointSet pts(1, system->size());
    for (Index i = 0; i < system->size(); ++i) pts(0, i) = static_cast<double>(i);
    return pts;
  };
  return s;
}

SystemOracle make_oracle(const SystemSpec& spec) {
  struct Visitor {
    SystemOracle operator()(const RotationSpec& r) const {
      return r.den > 0 ? circle_rotation_rational(r.num, r.den) : circle_rotation(r.theta);
    }
    SystemOracle operator()(const CatSpec& c) const { return torus_cat_map(c.fixed_seed); }
    SystemOracle operator()(const GridCatSpec& g) const { return grid_cat_oracle(g.n); }
    SystemOracle operator()(const FiniteSpec& f) const { return finite_oracle(f.system); }
  };
  return std::visit(Visitor{}, spec);
}

FiniteDynSystemD grid_cat_system(Index n) {
  if (n < 1) throw UsageError("grid size must be positive");
  const SystemOracle oracle = grid_cat_oracle(n);
  const PointSet pts = oracle.sampler(n * n, 0);
  const PointCloudD cloud(pts, oracle.metric);
  std::vector<Index> perm(static_cast<std::size_t>(n * n));
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b) perm[static_cast<std::size_t>(a * n + b)] = ((2 * a + b) % n) * n + (a + b) % n;
  return FiniteDynSystemD(MetricSpaceD(to_dense(cloud)), std::move(perm));
}

PointSet orbit_segment(const SystemOracle& s, const Point& x, Index n) {
  if (n < 0) throw UsageError("orbit length must be nonnegative");
  PointSet orbit(x.size(), n + 1);
  Point cur = x;
  for (Index k = 0; k <= n; ++k) {
    orbit.col(k) = cur;
    if (k < n) cur = s.forward(cur);
  }
  return orbit;
}

double inverse_defect(const SystemOracle& s, const PointSet& sample) {
  double worst = 0;
  for (Index k = 0; k < sample.cols(); ++k) {
    const Point x = sample.col(k);
    worst = std::max(worst, s.distance(s.forward(s.inverse(x)), x));
    worst = std::max(worst, s.distance(s.inverse(s.forward(x)), x));
  }
  return worst;
}

}  // namespace gh0
