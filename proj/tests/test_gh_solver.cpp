#include "gh0/gh_solver.hpp"

#include <doctest.h>

#include <random>

using namespace gh0;

namespace {

MetricSpaceD two_points(double d) {
  MetricSpaceD::Matrix m(2, 2);
  m << 0, d, d, 0;
  return MetricSpaceD(m);
}

MetricSpaceD one_point() { return MetricSpaceD(MetricSpaceD::Matrix::Zero(1, 1)); }

MetricSpaceD random_space(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  PointSet p(2, n);
  for (Index k = 0; k < n; ++k) p.col(k) << u(rng), u(rng);
  return MetricSpaceD(to_dense(PointCloudD(p, AmbientMetricD::flat_torus(2))));
}

std::vector<Index> random_perm(Index n, std::mt19937_64& rng) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), Index(0));
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace

TEST_CASE("exact GH on tiny spaces") {
  const auto a = two_points(1.0);
  const auto r = gh_exact_small(a, a);
  CHECK(r.upper == 0);
  CHECK(r.lower == 0);
  CHECK(r.witness_i->assign == std::vector<Index>{0, 1});
  CHECK(gh_exact_small(one_point(), one_point()).upper == 0);
  CHECK(gh_exact_small(a, one_point()).upper == 1);
  CHECK(gh_exact_small(one_point(), a).upper == 1);
  CHECK(to_string(r.method) == std::string("exact"));
}

TEST_CASE("exact GH0") {
  const auto a = two_points(1.0);
  const FiniteDynSystemD swap(a, {1, 0}), id(a, {0, 1});
  CHECK(gh0_exact_small(swap, swap).upper == 0);

  // One fixed point against a 2-cycle: the best pair over the 2 forward
  // maps and the single backward map.
  const FiniteDynSystemD pt(one_point(), {0});
  const auto r = gh0_exact_small(pt, swap);
  double best_i = 1e9;
  for (Index t : {0, 1}) {
    const std::vector<Index> i{t};
    best_i = std::min(best_i, std::max(delta_constant(pt.space(), swap.space(), i).delta_constant,
                                       c0_defect(swap.space(), i, pt.perm(), swap.perm())));
  }
  const std::vector<Index> j{0, 0};
  const double best_j = std::max(delta_constant(swap.space(), pt.space(), j).delta_constant,
                                 c0_defect(pt.space(), j, swap.perm(), pt.perm()));
  CHECK(r.upper == std::max(best_i, best_j));
  CHECK(r.upper >= 1.0 / 3);
  CHECK(r.upper <= 1);

  // Dynamics can only add to the distance.
  CHECK(gh0_exact_small(swap, id).upper >= gh_exact_small(a, a).upper);
}

TEST_CASE("budget gate") {
  std::mt19937_64 rng(1);
  const auto big = random_space(7, rng);
  CHECK_THROWS_AS(gh_exact_small(big, big), BudgetExceeded);
  CHECK_NOTHROW(gh_exact_small(random_space(5, rng), random_space(5, rng)));
  CHECK(map_pair_count(5, 5) <= kDefaultGHBudget);
}

TEST_CASE("lower bound") {
  CHECK(gh_lower_bound(two_points(1), two_points(1)) == 0);
  CHECK(gh_lower_bound(two_points(1), two_points(4)) == 1.0);
}

TEST_CASE("sandwich and symmetry on random instances") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<Index> size(1, 4);
  for (int trial = 0; trial < 60; ++trial) {
    const auto x = random_space(size(rng), rng), y = random_space(size(rng), rng);
    const FiniteDynSystemD f(x, random_perm(x.size(), rng)), g(y, random_perm(y.size(), rng));
    const double lo = gh_lower_bound(x, y);
    const double gh = gh_exact_small(x, y).upper;
    const auto r0 = gh0_exact_small(f, g);
    CHECK(lo <= gh);
    CHECK(gh <= r0.upper);
    CHECK(gh == gh_exact_small(y, x).upper);
    CHECK(r0.upper == gh0_exact_small(g, f).upper);
    CHECK(gh_exact_small(x, x).upper == 0);
    CHECK(gh0_upper_via_witness(f, g, r0.witness_i->assign, r0.witness_j->assign) == r0.upper);
  }
}

TEST_CASE("bounds mode") {
  std::mt19937_64 rng(5);
  const auto x = random_space(9, rng), y = random_space(8, rng);
  const FiniteDynSystemD f(x, random_perm(9, rng)), g(y, random_perm(8, rng));
  const auto r = gh0_bounds(f, g);
  CHECK(r.method == GHMethod::bounds);
  CHECK(r.lower <= r.upper);
  CHECK(r.upper == gh0_upper_via_witness(f, g, r.witness_i->assign, r.witness_j->assign));

  // On small instances the bounds bracket the exact value.
  const auto xs = random_space(3, rng), ys = random_space(4, rng);
  const FiniteDynSystemD fs(xs, random_perm(3, rng)), gs(ys, random_perm(4, rng));
  const auto exact = gh0_exact_small(fs, gs);
  const auto b = gh0_bounds(fs, gs);
  CHECK(b.lower <= exact.upper);
  CHECK(exact.upper <= b.upper);
}
