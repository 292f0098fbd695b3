#pragma once

#include "gh0/core.hpp"
#include "gh0/dynamics.hpp"
#include "gh0/isometry.hpp"
#include "gh0/metric_core.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gh0 {

struct ApproximationConfig {
  double delta = 0.1;              ///< target d_GH0 scale
  Index sample_size = 2000;
  std::uint64_t seed = 1;
  Index max_orbit_search = 1'000'000;  ///< iteration cap of each anchor / return-time search
  double beta_safety = 0.9;
  double alpha_fraction = 0.5;

  void validate() const;
};

enum class AnchorSource { sample_seed, net_point, fixed_seed };

const char* to_string(AnchorSource s);
AnchorSource anchor_source_from_string(const std::string& s);

/// One closed orbit segment a, f(a), ..., f^N(a) of the construction.
struct OrbitBlock {
  Index net_index = 0;  ///< index of the net point in the sample
  Point net_point;
  Point anchor;
  Index hit_time = 0;   ///< iterations from the seed to the anchor
  AnchorSource source = AnchorSource::sample_seed;
  Index length = 0;     ///< N; the block has N + 1 points
  Index offset = 0;     ///< index of (i, 0) in Y
  PointSet points;      ///< dim x (N + 1)
  double anchor_dist = 0;
  double return_gap = 0;   ///< d(f^N(a), f^{-1}(a))
  double closing_gap = 0;  ///< d(f^{N+1}(a), a)
};

/// One measured inequality: achieved `relation` threshold.
struct Check {
  std::string name;
  std::string inequality;
  std::string relation;  ///< "<" or "<="
  double threshold = 0;
  double achieved = 0;
  bool passed = false;
};

struct ApproximationCertificate {
  double delta = 0;
  double beta = 0;
  double alpha = 0;
  Index sample_size = 0;
  Index y_size = 0;
  double gh0_bound = 0;
  std::vector<Check> checks;

  bool passed() const;
  const Check* first_failure() const;
  const Check& check(const std::string& name) const;
};

using YSpace = PullbackSpaceD;
using ApproximantSystem = FiniteDynSystem<YSpace>;

struct ApproximationResult {
  PointSet sample;
  std::vector<Index> net;
  std::vector<OrbitBlock> blocks;
  ApproximantSystem finite_system;
  PointSet q;   ///< q(u) as columns; u indexes Y in block order
  PointMap j;   ///< sample -> Y
  double beta = 0;
  double alpha = 0;
  ApproximationCertificate certificate;
};

// ---------------------------------------------------------------------------
// Steps of the construction

/// Scale beta with d(x,y) < beta => d(f x, f y) < delta/3 on the sample,
/// times beta_safety. A declared Lipschitz constant L gives
/// beta_safety * (delta/3) / L directly.
double continuity_beta(const SystemOracle& s, double delta, const PointSet& sample, double beta_safety);

/// alpha = fraction * min(delta/9, beta/2).
double choose_alpha(double delta, double beta, double alpha_fraction);

/// First forward iterate of `seed` inside the open ball B(x, alpha), with
/// its hit time. Throws NoRecurrence after `cap` iterations.
std::pair<Point, Index> find_block_anchor(const SystemOracle& s, const Point& x, double alpha, const Point& seed,
                                          Index cap);

/// Smallest N <= cap with d(f^N(a), f^{-1}(a)) < beta.
Index find_return_time(const SystemOracle& s, const Point& anchor, double beta, Index cap);

/// Y = blocks laid out consecutively, metric d(q(u), q(v)) + alpha [u != v]
/// and the cyclic shift inside each block. Returns the system and q.
std::pair<ApproximantSystem, PointSet> build_finite_system(std::span<const OrbitBlock> blocks, double alpha,
                                                           const AmbientMetricD& metric);

/// Index of the nearest column of `images` (lowest index on ties).
Index nearest_image(const AmbientMetricD& metric, const PointSet& images, const Point& x);

/// j(x) = Y point whose q-image is nearest to x. Throws CoverageGap when a
/// sample point is 2*alpha or farther from every image.
PointMap build_backward_map(const AmbientMetricD& metric, const PointSet& sample, const PointSet& q_images,
                            double alpha);

/// Period of every point under a permutation.
std::vector<Index> all_periods(std::span<const Index> perm);

/// Run the whole construction and measure its certificate, which may
/// fail. `sample` overrides the oracle's sampler.
ApproximationResult build_approximation(const SystemOracle& s, const ApproximationConfig& cfg,
                                        std::optional<PointSet> sample = std::nullopt);

/// build_approximation(), then require_certified().
ApproximationResult approximate(const SystemOracle& s, const ApproximationConfig& cfg,
                                std::optional<PointSet> sample = std::nullopt);

// ---------------------------------------------------------------------------
// Certification

/// What a verifier needs; everything else is recomputed.
struct BlockRecord {
  Index net_index = 0;
  Point anchor;
  Index length = 0;
};

template <MetricSpace Y>
struct CertificateInputs {
  const PointSet& sample;
  std::span<const Index> net;
  std::span<const BlockRecord> blocks;
  const Y& y;
  std::span<const Index> perm;
  const PointSet& q;
  std::span<const Index> j;
  double delta = 0;
  double beta = 0;
  double alpha = 0;
};

/// Throws CertificationFailure naming the first failed check.
void require_certified(const ApproximationCertificate& cert);

namespace detail {

Check make_check(std::string name, std::string inequality, std::string relation, double threshold, double achieved);
Index block_structure_mismatches(const PointSet& sample, std::span<const Index> net, std::span<const BlockRecord> blocks,
                                 Index y_size, std::span<const Index> perm, const PointSet& q);
Index metric_violations(const YSpace& y);
Index metric_violations(const MetricSpaceD& y);

}  // namespace detail

/// Measure every inequality of the construction from its pieces alone.
/// Never throws on a failed inequality; see require_certified().
template <MetricSpace Y>
ApproximationCertificate certify(const SystemOracle& s, const CertificateInputs<Y>& in) {
  using detail::make_check;
  ApproximationCertificate cert;
  cert.delta = in.delta;
  cert.beta = in.beta;
  cert.alpha = in.alpha;
  cert.sample_size = in.sample.cols();
  cert.y_size = in.y.size();
  const double delta = in.delta, alpha = in.alpha, beta = in.beta;
  const AmbientMetricD& d = s.metric;
  const Index m = in.sample.cols(), n = in.y.size();

  const Index mismatches = detail::block_structure_mismatches(in.sample, in.net, in.blocks, n, in.perm, in.q);
  cert.checks.push_back(make_check("block_structure", "layout, permutation and anchors agree with the blocks", "<", 1,
                                   double(mismatches)));
  if (mismatches > 0) return cert;
  cert.checks.push_back(make_check("alpha_ceiling", "alpha < min(delta/9, beta/2)", "<", std::min(delta / 9, beta / 2), alpha));

  const PointCloudD sample_space(in.sample, d);
  cert.checks.push_back(make_check("net_cover", "d_H(net, X) < alpha", "<", alpha,
                                   hausdorff_distance(sample_space, in.net, PointSubset<PointCloudD>::all(sample_space).indices())));

  double anchor = 0, ret = 0, closing = 0;
  for (std::size_t b = 0, offset = 0; b < in.blocks.size(); ++b) {
    const BlockRecord& blk = in.blocks[b];
    const Point first = in.q.col(static_cast<Index>(offset));
    const Point last = in.q.col(static_cast<Index>(offset) + blk.length);
    anchor = std::max(anchor, d(first, in.sample.col(blk.net_index)));
    ret = std::max(ret, d(last, s.inverse(first)));
    closing = std::max(closing, d(s.forward(last), first));
    offset += static_cast<std::size_t>(blk.length + 1);
  }
  cert.checks.push_back(make_check("anchor_dist", "d(a_i, x_i) < alpha", "<", alpha, anchor));
  cert.checks.push_back(make_check("return_gaps", "d(f^N_i(a_i), f^-1(a_i)) < beta", "<", beta, ret));
  cert.checks.push_back(make_check("closing_gaps", "d(f^(N_i+1)(a_i), a_i) < delta/3", "<", delta / 3, closing));

  // q : Y -> X, with X represented by the sample plus the q-images.
  PointSet x_hat(in.sample.rows(), m + n);
  x_hat << in.sample, in.q;
  const PointCloudD x_space(std::move(x_hat), d);
  std::vector<Index> q_assign(static_cast<std::size_t>(n));
  for (Index u = 0; u < n; ++u) q_assign[static_cast<std::size_t>(u)] = m + u;
  const double q_surj = surjectivity_defect(x_space, q_assign);
  const double q_dist = distortion(in.y, x_space, q_assign);
  cert.checks.push_back(make_check("q_surj", "d_H(q(Y), X) < 2 alpha", "<", 2 * alpha, q_surj));
  cert.checks.push_back(make_check("q_distortion", "sup |d(q(u), q(v)) - rho(u, v)| <= alpha", "<=",
                                   alpha + kMetricTolerance, q_dist));

  PointSet q_after_g(in.q.rows(), n), f_after_q(in.q.rows(), n);
  for (Index u = 0; u < n; ++u) {
    q_after_g.col(u) = in.q.col(in.perm[static_cast<std::size_t>(u)]);
    f_after_q.col(u) = s.forward(in.q.col(u));
  }
  const double q_c0 = uniform_distance(d, q_after_g, f_after_q);
  cert.checks.push_back(make_check("q_c0", "d_C0(q o g, f o q) < delta/3", "<", delta / 3, q_c0));

  // j : X -> Y
  PointSet q_after_j(in.q.rows(), m);
  for (Index x = 0; x < m; ++x) q_after_j.col(x) = in.q.col(in.j[static_cast<std::size_t>(x)]);
  const double j_point = uniform_distance(d, in.sample, q_after_j);
  const double j_dist = distortion(sample_space, in.y, in.j);
  const double j_surj = surjectivity_defect(in.y, in.j);
  cert.checks.push_back(make_check("j_pointwise", "d(x, q(j(x))) < 2 alpha", "<", 2 * alpha, j_point));
  cert.checks.push_back(make_check("j_distortion", "sup |rho(j(x), j(x')) - d(x, x')| < 5 alpha", "<", 5 * alpha, j_dist));
  cert.checks.push_back(make_check("j_surj", "d_H(j(X), Y) < 3 alpha", "<", 3 * alpha, j_surj));

  std::vector<Index> j_after_f(static_cast<std::size_t>(m)), g_after_j(static_cast<std::size_t>(m));
  for (Index x = 0; x < m; ++x) {
    j_after_f[static_cast<std::size_t>(x)] = nearest_image(d, in.q, s.forward(in.sample.col(x)));
    g_after_j[static_cast<std::size_t>(x)] = in.perm[static_cast<std::size_t>(in.j[static_cast<std::size_t>(x)])];
  }
  const double j_c0 = uniform_distance(in.y, j_after_f, g_after_j);
  cert.checks.push_back(make_check("j_c0", "d_C0(j o f, g o j) < delta", "<", delta, j_c0));

  cert.gh0_bound = std::max({std::max(q_surj, q_dist), std::max(j_dist, j_surj), q_c0, j_c0});
  cert.checks.push_back(make_check("gh0_bound", "max(delta(q), delta(j), c0(q), c0(j)) < delta", "<", delta, cert.gh0_bound));

  cert.checks.push_back(make_check("metric_valid", "rho violates no metric axiom", "<", 1,
                                   double(detail::metric_violations(in.y))));
  return cert;
}

}  // namespace gh0
