#include "gh0/approximator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace gh0 {

void ApproximationConfig::validate() const {
  if (!(delta > 0) || !std::isfinite(delta)) throw UsageError("delta must be positive");
  if (sample_size < 1) throw UsageError("sample_size must be positive");
  if (max_orbit_search < 1) throw UsageError("max_orbit_search must be positive");
  if (!(beta_safety > 0 && beta_safety < 1)) throw UsageError("beta_safety must lie in (0, 1)");
  if (!(alpha_fraction > 0 && alpha_fraction < 1)) throw UsageError("alpha_fraction must lie in (0, 1)");
}

const char* to_string(AnchorSource s) {
  switch (s) {
    case AnchorSource::sample_seed: return "sample_seed";
    case AnchorSource::net_point: return "net_point";
    case AnchorSource::fixed_seed: return "fixed_seed";
  }
  return "?";
}

AnchorSource anchor_source_from_string(const std::string& s) {
  if (s == "sample_seed") return AnchorSource::sample_seed;
  if (s == "net_point") return AnchorSource::net_point;
  if (s == "fixed_seed") return AnchorSource::fixed_seed;
  throw DataError("unknown anchor source '" + s + "'");
}

bool ApproximationCertificate::passed() const { return !checks.empty() && first_failure() == nullptr; }

const Check* ApproximationCertificate::first_failure() const {
  for (const Check& c : checks)
    if (!c.passed) return &c;
  return nullptr;
}

const Check& ApproximationCertificate::check(const std::string& name) const {
  for (const Check& c : checks)
    if (c.name == name) return c;
  throw UsageError("certificate has no check named '" + name + "'");
}

void require_certified(const ApproximationCertificate& cert) {
  if (cert.checks.empty()) throw CertificationFailure("empty", "certificate has no checks");
  if (const Check* c = cert.first_failure()) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "certificate check " << c->name << " failed: " << c->inequality << " (achieved " << c->achieved << ", needs "
        << c->relation << " " << c->threshold << ")";
    throw CertificationFailure(c->name, msg.str());
  }
}

namespace {

std::string describe(const Point& x) {
  std::ostringstream s;
  s.precision(17);
  s << "(";
  for (Index k = 0; k < x.size(); ++k) s << (k ? ", " : "") << x(k);
  s << ")";
  return s.str();
}

double sample_diameter(const AmbientMetricD& d, const PointSet& sample) {
  double diam = 0;
  for (Index a = 0; a < sample.cols(); ++a)
    for (Index b = a + 1; b < sample.cols(); ++b) diam = std::max(diam, d(sample.col(a), sample.col(b)));
  return diam;
}

// Forward orbit of one seed, grown on demand and shared by all anchor
// searches. A search through it answers exactly as find_block_anchor would.
class SeedOrbit {
 public:
  SeedOrbit(const SystemOracle& s, Point seed) : s_(s) { orbit_.push_back(std::move(seed)); }

  std::optional<std::pair<Point, Index>> search(const Point& x, double alpha, Index cap) {
    for (Index k = 0; k <= cap; ++k) {
      if (period_ && k >= *period_) return std::nullopt;  // orbit closed; nothing new beyond here
      if (k == static_cast<Index>(orbit_.size())) grow();
      if (period_ && k >= *period_) return std::nullopt;
      const Point& p = orbit_[static_cast<std::size_t>(k)];
      if (s_.distance(p, x) < alpha) return std::pair{p, k};
    }
    return std::nullopt;
  }

 private:
  void grow() {
    Point next = s_.forward(orbit_.back());
    if (next == orbit_.front()) {
      period_ = static_cast<Index>(orbit_.size());
      return;
    }
    orbit_.push_back(std::move(next));
  }

  const SystemOracle& s_;
  std::vector<Point> orbit_;
  std::optional<Index> period_;
};

}  // namespace

double continuity_beta(const SystemOracle& s, double delta, const PointSet& sample, double beta_safety) {
  if (sample.cols() < 1) throw UsageError("continuity_beta: empty sample");
  if (!(delta > 0)) throw UsageError("continuity_beta: delta must be positive");
  if (!(beta_safety > 0 && beta_safety < 1)) throw UsageError("continuity_beta: beta_safety must lie in (0, 1)");
  if (s.lipschitz) {
    if (!(*s.lipschitz > 0)) throw UsageError("continuity_beta: Lipschitz constant must be positive");
    return beta_safety * (delta / 3) / *s.lipschitz;
  }

  // Smallest distance among sampled pairs whose images are delta/3 or more apart.
  const Index m = sample.cols();
  PointSet images(sample.rows(), m);
  for (Index a = 0; a < m; ++a) images.col(a) = s.forward(sample.col(a));
  double worst = std::numeric_limits<double>::infinity();
  for (Index a = 0; a < m; ++a)
    for (Index b = a + 1; b < m; ++b)
      if (s.metric(images.col(a), images.col(b)) >= delta / 3) worst = std::min(worst, s.metric(sample.col(a), sample.col(b)));

  double top = sample_diameter(s.metric, sample);
  if (!(top > 0)) top = 1;
  constexpr int kGridSteps = 400;  // ratio 2^(-1/8) down to top * 2^-50
  for (int k = 0; k <= kGridSteps; ++k) {
    const double beta = top * std::exp2(-k / 8.0);
    if (beta <= worst) return beta_safety * beta;
  }
  throw std::runtime_error("continuity_beta: map too wild at sample scale (no admissible beta above the grid floor)");
}

double choose_alpha(double delta, double beta, double alpha_fraction) {
  if (!(delta > 0) || !(beta > 0)) throw UsageError("choose_alpha: delta and beta must be positive");
  if (!(alpha_fraction > 0 && alpha_fraction < 1)) throw UsageError("choose_alpha: fraction must lie in (0, 1)");
  return alpha_fraction * std::min(delta / 9, beta / 2);
}

std::pair<Point, Index> find_block_anchor(const SystemOracle& s, const Point& x, double alpha, const Point& seed,
                                          Index cap) {
  if (!(alpha > 0)) throw UsageError("find_block_anchor: alpha must be positive");
  if (cap < 1) throw UsageError("find_block_anchor: cap must be at least 1");
  Point cur = seed;
  for (Index k = 0;; ++k) {
    if (s.distance(cur, x) < alpha) return {cur, k};
    if (k == cap) break;
    cur = s.forward(cur);
  }
  throw NoRecurrence("no orbit point of seed " + describe(seed) + " entered B(" + describe(x) + ", alpha) within " +
                     std::to_string(cap) + " iterations");
}

Index find_return_time(const SystemOracle& s, const Point& anchor, double beta, Index cap) {
  if (!(beta > 0)) throw UsageError("find_return_time: beta must be positive");
  if (cap < 0) throw UsageError("find_return_time: cap must be nonnegative");
  const Point target = s.inverse(anchor);
  Point cur = anchor;
  for (Index n = 0; n <= cap; ++n) {
    if (s.distance(cur, target) < beta) return n;
    cur = s.forward(cur);
  }
  throw NoRecurrence("orbit of " + describe(anchor) + " did not return within beta of its preimage in " +
                     std::to_string(cap) + " iterations");
}

std::pair<ApproximantSystem, PointSet> build_finite_system(std::span<const OrbitBlock> blocks, double alpha,
                                                           const AmbientMetricD& metric) {
  if (blocks.empty()) throw UsageError("build_finite_system: no blocks");
  Index n = 0;
  for (const OrbitBlock& b : blocks) {
    if (b.points.cols() != b.length + 1) throw UsageError("build_finite_system: block points do not match its length");
    n += b.length + 1;
  }
  PointSet q(blocks.front().points.rows(), n);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  Index offset = 0;
  for (const OrbitBlock& b : blocks) {
    q.middleCols(offset, b.length + 1) = b.points;
    for (Index k = 0; k <= b.length; ++k) perm[static_cast<std::size_t>(offset + k)] = offset + (k == b.length ? 0 : k + 1);
    offset += b.length + 1;
  }
  ApproximantSystem system(YSpace(PointCloudD(q, metric), alpha), std::move(perm));
  return {std::move(system), std::move(q)};
}

Index nearest_image(const AmbientMetricD& metric, const PointSet& images, const Point& x) {
  if (images.cols() < 1) throw UsageError("nearest_image: no images");
  Index best = 0;
  double best_d = metric(images.col(0), x);
  for (Index u = 1; u < images.cols(); ++u) {
    const double d = metric(images.col(u), x);
    if (d < best_d) {
      best_d = d;
      best = u;
    }
  }
  return best;
}

PointMap build_backward_map(const AmbientMetricD& metric, const PointSet& sample, const PointSet& q_images,
                            double alpha) {
  PointMap j;
  j.assign.resize(static_cast<std::size_t>(sample.cols()));
  for (Index x = 0; x < sample.cols(); ++x) {
    const Point p = sample.col(x);
    const Index u = nearest_image(metric, q_images, p);
    const double gap = metric(q_images.col(u), p);
    if (!(gap < 2 * alpha)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "sample point " << describe(p) << " is " << gap << " from every orbit-block point (needs < 2 alpha = "
          << 2 * alpha << ")";
      throw CoverageGap(msg.str());
    }
    j.assign[static_cast<std::size_t>(x)] = u;
  }
  return j;
}

std::vector<Index> all_periods(std::span<const Index> perm) {
  if (!is_bijection(perm)) throw UsageError("all_periods: not a permutation");
  std::vector<Index> period(perm.size(), 0);
  for (std::size_t start = 0; start < perm.size(); ++start) {
    if (period[start]) continue;
    Index len = 0;
    for (auto u = static_cast<Index>(start);;) {
      ++len;
      u = perm[static_cast<std::size_t>(u)];
      if (u == static_cast<Index>(start)) break;
    }
    for (auto u = static_cast<Index>(start); !period[static_cast<std::size_t>(u)]; u = perm[static_cast<std::size_t>(u)])
      period[static_cast<std::size_t>(u)] = len;
  }
  return period;
}

namespace detail {

Check make_check(std::string name, std::string inequality, std::string relation, double threshold, double achieved) {
  Check c;
  c.name = std::move(name);
  c.inequality = std::move(inequality);
  c.relation = std::move(relation);
  c.threshold = threshold;
  c.achieved = achieved;
  c.passed = c.relation == "<=" ? achieved <= threshold : achieved < threshold;
  return c;
}

Index block_structure_mismatches(const PointSet& sample, std::span<const Index> net, std::span<const BlockRecord> blocks,
                                 Index y_size, std::span<const Index> perm, const PointSet& q) {
  Index bad = 0;
  if (blocks.empty() || blocks.size() != net.size()) ++bad;
  if (q.cols() != y_size || static_cast<Index>(perm.size()) != y_size) return bad + 1;
  if (q.rows() != sample.rows()) return bad + 1;

  std::vector<bool> used(static_cast<std::size_t>(sample.cols()), false);
  for (Index i : net) {
    if (i < 0 || i >= sample.cols() || used[static_cast<std::size_t>(i)]) {
      ++bad;
      continue;
    }
    used[static_cast<std::size_t>(i)] = true;
  }

  Index offset = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const BlockRecord& blk = blocks[b];
    if (b < net.size() && blk.net_index != net[b]) ++bad;
    if (blk.length < 0 || offset + blk.length + 1 > y_size) return bad + 1;
    if (blk.anchor.size() != q.rows() || blk.anchor != Point(q.col(offset))) ++bad;
    for (Index k = 0; k <= blk.length; ++k) {
      const Index want = offset + (k == blk.length ? 0 : k + 1);
      if (perm[static_cast<std::size_t>(offset + k)] != want) ++bad;
    }
    offset += blk.length + 1;
  }
  if (offset != y_size) ++bad;
  return bad;
}

Index metric_violations(const YSpace& y) {
  const ValidationReport r = validate_metric(y, kMetricTolerance, 0);
  return std::accumulate(r.counts.begin(), r.counts.end(), Index(0));
}

Index metric_violations(const MetricSpaceD& y) {
  const ValidationReport r = validate_metric(y.matrix(), kMetricTolerance, 0);
  return std::accumulate(r.counts.begin(), r.counts.end(), Index(0));
}

}  // namespace detail

ApproximationResult build_approximation(const SystemOracle& s, const ApproximationConfig& cfg,
                                        std::optional<PointSet> sample) {
  cfg.validate();
  ApproximationResult r;
  r.sample = sample ? std::move(*sample) : s.sampler(cfg.sample_size, cfg.seed);
  if (r.sample.cols() < 1) throw UsageError("approximate: empty sample");
  if (r.sample.rows() != s.dim) throw UsageError("approximate: sample dimension does not match the system");

  r.beta = continuity_beta(s, cfg.delta, r.sample, cfg.beta_safety);
  r.alpha = choose_alpha(cfg.delta, r.beta, cfg.alpha_fraction);
  const PointCloudD cloud(r.sample, s.metric);
  const auto net = covering_net(cloud, r.alpha);
  r.net.assign(net.indices().begin(), net.indices().end());

  const Point seed = s.anchor_seed.value_or(Point(r.sample.col(0)));
  const AnchorSource seed_source = s.anchor_seed ? AnchorSource::fixed_seed : AnchorSource::sample_seed;
  SeedOrbit seed_orbit(s, seed);
  Index offset = 0;
  for (Index i : r.net) {
    OrbitBlock b;
    b.net_index = i;
    b.net_point = r.sample.col(i);
    if (auto hit = seed_orbit.search(b.net_point, r.alpha, cfg.max_orbit_search)) {
      std::tie(b.anchor, b.hit_time) = *hit;
      b.source = seed_source;
    } else if (s.seed_fallback) {
      std::tie(b.anchor, b.hit_time) = find_block_anchor(s, b.net_point, r.alpha, b.net_point, cfg.max_orbit_search);
      b.source = AnchorSource::net_point;
    } else {
      throw NoRecurrence("no orbit point of seed " + describe(seed) + " entered B(" + describe(b.net_point) +
                         ", alpha) within " + std::to_string(cfg.max_orbit_search) + " iterations");
    }
    b.anchor_dist = s.distance(b.anchor, b.net_point);
    b.length = find_return_time(s, b.anchor, r.beta, cfg.max_orbit_search);
    b.points = orbit_segment(s, b.anchor, b.length);
    b.offset = offset;
    b.return_gap = s.distance(b.points.col(b.length), s.inverse(b.anchor));
    b.closing_gap = s.distance(s.forward(b.points.col(b.length)), b.anchor);
    offset += b.length + 1;
    r.blocks.push_back(std::move(b));
  }

  std::tie(r.finite_system, r.q) = build_finite_system(r.blocks, r.alpha, s.metric);

  // Every point of Y is periodic with the period of its block.
  const auto periods = all_periods(r.finite_system.perm());
  for (const OrbitBlock& b : r.blocks)
    for (Index k = 0; k <= b.length; ++k)
      if (periods[static_cast<std::size_t>(b.offset + k)] != b.length + 1) {
        throw std::logic_error("approximate: block cycle length differs from N + 1");
      }

  r.j = build_backward_map(s.metric, r.sample, r.q, r.alpha);

  std::vector<BlockRecord> records;
  records.reserve(r.blocks.size());
  for (const OrbitBlock& b : r.blocks) records.push_back({b.net_index, b.anchor, b.length});
  const CertificateInputs<YSpace> in{r.sample, r.net, records, r.finite_system.space(), r.finite_system.perm(),
                                     r.q,      r.j.assign, cfg.delta, r.beta, r.alpha};
  r.certificate = certify(s, in);
  return r;
}

ApproximationResult approximate(const SystemOracle& s, const ApproximationConfig& cfg, std::optional<PointSet> sample) {
  ApproximationResult r = build_approximation(s, cfg, std::move(sample));
  require_certified(r.certificate);
  return r;
}

}  // namespace gh0
