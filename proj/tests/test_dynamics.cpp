#include "gh0/dynamics.hpp"

#include <doctest.h>

using namespace gh0;

namespace {

Point p1(double x) {
  Point p(1);
  p << x;
  return p;
}

Point p2(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

}  // namespace

TEST_CASE("bijection check") {
  CHECK(is_bijection(std::vector<Index>{2, 0, 1}));
  CHECK_FALSE(is_bijection(std::vector<Index>{0, 0, 1}));
  CHECK_FALSE(is_bijection(std::vector<Index>{0, 3}));
  CHECK(is_bijection(std::vector<Index>{}));
}

TEST_CASE("finite systems require a permutation") {
  MetricSpaceD space(MetricSpaceD::Matrix::Ones(3, 3) - MetricSpaceD::Matrix::Identity(3, 3));
  CHECK_THROWS_AS(FiniteDynSystemD(space, {0, 0, 1}), UsageError);
  CHECK_THROWS_AS(FiniteDynSystemD(space, {0, 1}), UsageError);
  const FiniteDynSystemD f(space, {1, 2, 0});
  CHECK(f(2) == 0);
  CHECK(f.inverse_perm() == std::vector<Index>{2, 0, 1});
}

TEST_CASE("circle rotation") {
  const auto id = circle_rotation(0.0);
  const PointSet s = id.sampler(50, 4);
  for (Index k = 0; k < s.cols(); ++k) CHECK(id.forward(s.col(k)) == Point(s.col(k)));

  const auto golden = circle_rotation(golden_angle());
  CHECK(golden_angle() == doctest::Approx(0.6180339887498949));
  CHECK(inverse_defect(golden, golden.sampler(500, 1)) < kInverseTolerance);
  CHECK(golden.lipschitz.value() == 1.0);
}

TEST_CASE("rational rotation is exact on its lattice") {
  const auto r = circle_rotation_rational(2, 5);
  CHECK(r.name == "rotation:2/5");
  const PointSet orbit = orbit_segment(r, p1(0.0), 5);
  const double want[] = {0.0, 0.4, 0.8, 0.2, 0.6, 0.0};
  for (Index k = 0; k <= 5; ++k) CHECK(orbit(0, k) == want[k]);
  CHECK(r.inverse(p1(0.0))(0) == 0.6);
  CHECK(circle_rotation_rational(4, 10).name == "rotation:2/5");
  CHECK(circle_rotation_rational(-3, 5).name == "rotation:2/5");
  CHECK_THROWS_AS(circle_rotation_rational(1, 0), UsageError);
}

TEST_CASE("cat map") {
  const auto cat = torus_cat_map();
  CHECK(cat_map_lipschitz() == doctest::Approx((3 + std::sqrt(5.0)) / 2));
  const PointSet orbit = orbit_segment(cat, p2(0, 0), 7);
  for (Index k = 0; k <= 7; ++k) CHECK(orbit.col(k).isZero());
  const Point y = cat.forward(p2(0.1, 0.3));
  CHECK(y(0) == doctest::Approx(0.5));
  CHECK(y(1) == doctest::Approx(0.4));
  CHECK(inverse_defect(cat, cat.sampler(500, 2)) < 1e-12);
  CHECK(torus_cat_map(true).anchor_seed.has_value());
  CHECK_FALSE(torus_cat_map(true).seed_fallback);
}

TEST_CASE("samplers are pure in (count, seed)") {
  const auto cat = torus_cat_map();
  CHECK(cat.sampler(100, 9) == cat.sampler(100, 9));
  CHECK(cat.sampler(100, 9) != cat.sampler(100, 10));
  const PointSet s = cat.sampler(1000, 1);
  CHECK((s.array() >= 0).all());
  CHECK((s.array() < 1).all());
}

TEST_CASE("grid cat system") {
  const auto one = grid_cat_system(1);
  CHECK(one.size() == 1);
  CHECK(one(0) == 0);
  const auto two = grid_cat_system(2);
  CHECK(two.size() == 4);
  CHECK(two(0) == 0);
  CHECK(is_bijection(two.perm()));
  for (Index n : {3, 8, 32}) CHECK(is_bijection(grid_cat_system(n).perm()));

  // The oracle agrees with the permutation on lattice points.
  const auto g = grid_cat_oracle(8);
  const auto sys = grid_cat_system(8);
  const PointSet pts = g.sampler(0, 0);
  for (Index u = 0; u < pts.cols(); ++u) {
    CHECK(g.forward(pts.col(u)) == Point(pts.col(sys(u))));
    CHECK(g.inverse(pts.col(sys(u))) == Point(pts.col(u)));
  }
  CHECK_THROWS_AS(grid_cat_system(0), UsageError);
}

TEST_CASE("finite oracle") {
  auto sys = std::make_shared<const FiniteDynSystemD>(grid_cat_system(4));
  const auto o = finite_oracle(sys);
  CHECK(o.forward(p1(5))(0) == double((*sys)(5)));
  CHECK(o.inverse(o.forward(p1(5)))(0) == 5);
  CHECK(o.distance(p1(1), p1(6)) == sys->space()(1, 6));
  CHECK_THROWS_AS(o.forward(p1(1.5)), UsageError);
}

TEST_CASE("orbit segments") {
  const auto r = circle_rotation(0.3);
  CHECK(orbit_segment(r, p1(0.2), 0).cols() == 1);
  CHECK_THROWS_AS(orbit_segment(r, p1(0.2), -1), UsageError);
}
