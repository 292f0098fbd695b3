#include "gh0/measures.hpp"

#include <doctest.h>

#include <random>

using namespace gh0;

namespace {

FiniteDynSystemD cycle(Index n) {
  MetricSpaceD::Matrix d(n, n);
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b) {
      const Index k = std::abs(a - b);
      d(a, b) = double(std::min(k, n - k)) / double(n);
    }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) perm[static_cast<std::size_t>(k)] = (k + 1) % n;
  return FiniteDynSystemD(MetricSpaceD(d), perm);
}

FiniteMeasure point_mass(Index x) { return {{x}, {1.0}}; }

Point p1(double x) {
  Point p(1);
  p << x;
  return p;
}

}  // namespace

TEST_CASE("periodic orbit measures") {
  const auto five = cycle(5);
  const auto mu = periodic_orbit_measure(five, 2);
  CHECK(mu.size() == 5);
  for (double w : mu.weights) CHECK(w == 0.2);
  CHECK(invariance_defect(mu, [&](Index x) { return five(x); }) == 0);
  CHECK_NOTHROW(mu.validate());

  const auto fixed = periodic_orbit_measure(grid_cat_system(2), 0);
  CHECK(fixed.atoms == std::vector<Index>{0});
  CHECK(fixed.weights == std::vector<double>{1.0});
  CHECK_THROWS_AS(periodic_orbit_measure(five, 5), UsageError);
}

TEST_CASE("mixtures") {
  const std::vector<FiniteMeasure> one{point_mass(3)};
  const auto m1 = mixture_measure<Index>(one);
  CHECK(m1.atoms == std::vector<Index>{3});
  CHECK(m1.weights[0] == doctest::Approx(1.0));

  const std::vector<FiniteMeasure> three{point_mass(0), point_mass(1), point_mass(2)};
  const auto m3 = mixture_measure<Index>(three);
  CHECK(m3.weights[0] == doctest::Approx(4.0 / 7));
  CHECK(m3.weights[1] == doctest::Approx(2.0 / 7));
  CHECK(m3.weights[2] == doctest::Approx(1.0 / 7));
  CHECK_NOTHROW(m3.validate());

  const std::vector<FiniteMeasure> same{point_mass(4), point_mass(4)};
  const auto merged = mixture_measure<Index>(same);
  CHECK(merged.size() == 1);
  CHECK(merged.weights[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(mixture_measure<Index>(std::span<const FiniteMeasure>{}), UsageError);
}

TEST_CASE("pushforward and invariance") {
  const FiniteMeasure half{{0, 1}, {0.5, 0.5}};
  const auto swapped = pushforward(half, [](Index x) { return 1 - x; });
  CHECK(total_variation(half, swapped) == 0);
  CHECK(pushforward(half, [](Index x) { return x; }).atoms == half.atoms);
  const auto moved = pushforward(point_mass(0), [](Index) { return Index(7); });
  CHECK(moved.atoms == std::vector<Index>{7});
  CHECK(invariance_defect(point_mass(0), [](Index) { return Index(7); }) == 1);

  const AmbientMeasure ambient{{p1(0.1), p1(0.6)}, {0.5, 0.5}};
  const auto rot = circle_rotation(0.5);
  CHECK(invariance_defect(ambient, [&](const Point& x) { return rot.forward(x); }) == 0);
}

TEST_CASE("total variation is convex across mixtures") {
  std::mt19937_64 rng(8);
  const auto sys = grid_cat_system(5);
  auto f = [&](Index x) { return sys(x); };
  std::uniform_int_distribution<Index> pick(0, 24);
  std::uniform_real_distribution<double> u(0.1, 1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<FiniteMeasure> parts;
    double worst = 0;
    for (int k = 0; k < 3; ++k) {
      std::vector<Index> atoms;
      std::vector<double> weights;
      for (int a = 0; a < 3; ++a) {
        atoms.push_back(pick(rng));
        weights.push_back(u(rng));
      }
      auto mu = merge_atoms(atoms, weights);
      const double t = mu.total();
      for (double& w : mu.weights) w /= t;
      worst = std::max(worst, invariance_defect(mu, f));
      parts.push_back(std::move(mu));
    }
    const auto mix = mixture_measure<Index>(parts);
    CHECK(std::abs(mix.total() - 1) <= 1e-12);
    CHECK(invariance_defect(mix, f) <= worst + 1e-12);
  }
}

TEST_CASE("validation rejects bad measures") {
  CHECK_THROWS_AS((FiniteMeasure{{0, 0}, {0.5, 0.5}}.validate()), UsageError);
  CHECK_THROWS_AS((FiniteMeasure{{0, 1}, {0.5, 0.6}}.validate()), UsageError);
  CHECK_THROWS_AS((FiniteMeasure{{0, 1}, {1.0, 0.0}}.validate()), UsageError);
  CHECK_THROWS_AS((FiniteMeasure{{0}, {}}.validate()), UsageError);
}

TEST_CASE("support cover") {
  const auto five = cycle(5);
  const std::vector<Index> all{0, 1, 2, 3, 4};
  const FiniteMeasure uniform = periodic_orbit_measure(five, 0);
  const auto c = support_covers(uniform, five.space(), all, 0.01);
  CHECK(c.covers);
  CHECK(c.worst_gap == 0);

  PointSet sample(1, 5);
  sample << 0.0, 0.2, 0.4, 0.6, 0.8;
  const AmbientMeasure single{{p1(0.0)}, {1.0}};
  const auto s = support_covers(single, AmbientMetricD::flat_torus(1), sample, 0.1);
  CHECK_FALSE(s.covers);
  CHECK(s.worst_gap >= 0.4);
  CHECK_THROWS_AS(support_covers(uniform, five.space(), all, 0.0), UsageError);
}

TEST_CASE("mixture over every cycle of the grid cat map covers the lattice") {
  const auto g = grid_cat_system(8);
  std::vector<bool> seen(64, false);
  std::vector<FiniteMeasure> parts;
  for (Index p = 0; p < 64; ++p) {
    if (seen[static_cast<std::size_t>(p)]) continue;
    parts.push_back(periodic_orbit_measure(g, p));
    for (Index a : parts.back().atoms) seen[static_cast<std::size_t>(a)] = true;
  }
  const auto mu = mixture_measure<Index>(parts);
  CHECK(invariance_defect(mu, [&](Index x) { return g(x); }) <= 1e-12);
  std::vector<Index> all(64);
  std::iota(all.begin(), all.end(), Index(0));
  const auto c = support_covers(mu, g.space(), all, 1e-9);
  CHECK(c.covers);
  CHECK(c.worst_gap == 0);
}

TEST_CASE("birkhoff hitting") {
  const auto r = circle_rotation_rational(2, 5);
  CHECK(birkhoff_hitting(r, p1(0.6), p1(0.6), 0.05, 10) == 0);
  CHECK(birkhoff_hitting(r, p1(0.0), p1(0.6), 0.05, 10) == 4);
  CHECK_FALSE(birkhoff_hitting(r, p1(0.0), p1(0.1), 0.05, 100).has_value());

  Point origin(2), far(2);
  origin << 0, 0;
  far << 0.5, 0.5;
  CHECK_FALSE(birkhoff_hitting(torus_cat_map(), origin, far, 0.1, 1000).has_value());
  CHECK_THROWS_AS(birkhoff_hitting(r, p1(0), p1(0), 0, 1), UsageError);
}

TEST_CASE("semi-conjugacy") {
  const auto a = cycle(5);
  // Relabel by u -> 2u mod 5 and carry the metric and the map along.
  std::vector<Index> h(5), inv(5);
  for (Index u = 0; u < 5; ++u) {
    h[static_cast<std::size_t>(u)] = (2 * u) % 5;
    inv[static_cast<std::size_t>((2 * u) % 5)] = u;
  }
  MetricSpaceD::Matrix d(5, 5);
  std::vector<Index> perm(5);
  for (Index x = 0; x < 5; ++x) {
    perm[static_cast<std::size_t>(x)] = h[static_cast<std::size_t>(a(inv[static_cast<std::size_t>(x)]))];
    for (Index y = 0; y < 5; ++y) d(x, y) = a.space()(inv[static_cast<std::size_t>(x)], inv[static_cast<std::size_t>(y)]);
  }
  const FiniteDynSystemD b(MetricSpaceD(d), perm);
  const auto defect = semiconjugacy_defect(h, a, b);
  CHECK(defect.c0 == 0);
  CHECK(defect.iso.delta_constant == 0);
  CHECK(periodic_transfer_violations(h, a, b).empty());

  // Collapse onto a fixed point.
  MetricSpaceD::Matrix one = MetricSpaceD::Matrix::Zero(1, 1);
  const FiniteDynSystemD point(MetricSpaceD(one), {0});
  const std::vector<Index> to_point(5, 0);
  const auto collapse = semiconjugacy_defect(to_point, a, point);
  CHECK(collapse.c0 == 0);
  CHECK(collapse.iso.distortion == diameter(a.space()));
  CHECK(periodic_transfer_violations(to_point, a, point).empty());

  // A map that is not equivariant breaks the transfer somewhere.
  const std::vector<Index> skew{0, 0, 1, 2, 3};
  CHECK(semiconjugacy_defect(skew, a, a).c0 > 0);
  const auto g2 = grid_cat_system(2);
  const std::vector<Index> into_grid{1, 1, 1, 1, 1};
  CHECK(periodic_transfer_violations(into_grid, a, g2).size() == 5);
}
