#pragma once

#include "gh0/core.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <concepts>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace gh0 {

/// Anything with a point count and a distance lookup between indices.
template <class S>
concept MetricSpace = !std::is_base_of_v<Eigen::EigenBase<S>, S> && requires(const S& s, Index i, Index j) {
  typename S::Scalar;
  { s.size() } -> std::convertible_to<Index>;
  { s(i, j) } -> std::convertible_to<typename S::Scalar>;
};

// ---------------------------------------------------------------------------
// Ambient metrics

/// Metric of an ambient phase space. Either the flat metric of the unit
/// torus [0,1)^d (the arc metric when d = 1), or a lookup table whose
/// points are encoded as their integer index.
template <typename Scalar_>
class AmbientMetric {
 public:
  using Scalar = Scalar_;
  using Table = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  AmbientMetric() = default;

  static AmbientMetric flat_torus(int dim) {
    AmbientMetric m;
    m.dim_ = dim;
    return m;
  }

  static AmbientMetric table(std::shared_ptr<const Table> dist) {
    AmbientMetric m;
    m.dim_ = 1;
    m.table_ = std::move(dist);
    return m;
  }

  int dim() const { return dim_; }
  bool is_table() const { return table_ != nullptr; }
  const Table& table_matrix() const { return *table_; }

  template <class A, class B>
  Scalar operator()(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) const {
    if (table_) {
      return (*table_)(static_cast<Index>(std::llround(x(0))), static_cast<Index>(std::llround(y(0))));
    }
    if (dim_ == 1) {
      Scalar d = std::abs(Scalar(x(0)) - Scalar(y(0)));
      return std::min(d, Scalar(1) - d);
    }
    Scalar sq = 0;
    for (Index k = 0; k < x.size(); ++k) {
      Scalar d = std::abs(Scalar(x(k)) - Scalar(y(k)));
      d = std::min(d, Scalar(1) - d);
      sq += d * d;
    }
    return std::sqrt(sq);
  }

 private:
  int dim_ = 1;
  std::shared_ptr<const Table> table_;
};

// ---------------------------------------------------------------------------
// Finite metric spaces

/// Indexed point set with a full distance matrix.
template <typename Scalar_>
class FiniteMetricSpace {
 public:
  using Scalar = Scalar_;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  FiniteMetricSpace() = default;

  explicit FiniteMetricSpace(Matrix dist, std::vector<std::string> labels = {})
      : dist_(std::move(dist)), labels_(std::move(labels)) {
    if (dist_.rows() != dist_.cols()) throw UsageError("distance matrix must be square");
    if (!labels_.empty() && static_cast<Index>(labels_.size()) != dist_.rows()) {
      throw UsageError("label count does not match point count");
    }
  }

  Index size() const { return dist_.rows(); }
  Scalar operator()(Index i, Index j) const { return dist_(i, j); }
  const Matrix& matrix() const { return dist_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  Matrix dist_;
  std::vector<std::string> labels_;
};

/// Ambient points viewed as a finite metric space.
template <typename Scalar_>
class PointCloud {
 public:
  using Scalar = Scalar_;
  using Points = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  PointCloud() = default;
  PointCloud(Points points, AmbientMetric<Scalar> metric)
      : points_(std::move(points)), metric_(std::move(metric)) {}

  Index size() const { return points_.cols(); }
  Scalar operator()(Index i, Index j) const { return metric_(points_.col(i), points_.col(j)); }
  auto point(Index i) const { return points_.col(i); }
  const Points& points() const { return points_; }
  const AmbientMetric<Scalar>& metric() const { return metric_; }

 private:
  Points points_;
  AmbientMetric<Scalar> metric_;
};

/// The metric d(q(u), q(v)) + alpha [u != v] pulled back through a point
/// assignment q, evaluated lazily. Coefficients agree bitwise with
/// augmented_metric() applied to the materialized pseudometric.
template <typename Scalar_>
class PullbackSpace {
 public:
  using Scalar = Scalar_;

  PullbackSpace() = default;
  PullbackSpace(PointCloud<Scalar> images, Scalar alpha) : images_(std::move(images)), alpha_(alpha) {
    if (!(alpha_ > 0)) throw UsageError("pullback offset alpha must be positive");
  }

  Index size() const { return images_.size(); }
  Scalar operator()(Index u, Index v) const { return u == v ? Scalar(0) : images_(u, v) + alpha_; }
  Scalar alpha() const { return alpha_; }
  const PointCloud<Scalar>& images() const { return images_; }

 private:
  PointCloud<Scalar> images_;
  Scalar alpha_ = 1;
};

/// Materialize any metric space into a dense matrix.
template <MetricSpace S>
Eigen::Matrix<typename S::Scalar, Eigen::Dynamic, Eigen::Dynamic> to_dense(const S& space) {
  using Matrix = Eigen::Matrix<typename S::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index n = space.size();
  Matrix d(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) d(i, j) = space(i, j);
  return d;
}

template <typename Scalar>
const auto& to_dense(const FiniteMetricSpace<Scalar>& space) {
  return space.matrix();
}

template <MetricSpace S>
typename S::Scalar diameter(const S& space) {
  typename S::Scalar best = 0;
  for (Index i = 0; i < space.size(); ++i)
    for (Index j = 0; j < space.size(); ++j) best = std::max(best, space(i, j));
  return best;
}

// ---------------------------------------------------------------------------
// Subsets and Hausdorff distance

/// Nonempty subset of a finite metric space, referenced by index.
template <MetricSpace S>
class PointSubset {
 public:
  PointSubset(const S& space, std::vector<Index> indices) : space_(&space), indices_(std::move(indices)) {
    if (indices_.empty()) throw UsageError("point subset must be nonempty");
    for (Index i : indices_) {
      if (i < 0 || i >= space.size()) throw UsageError("point subset index out of range");
    }
  }

  static PointSubset all(const S& space) {
    std::vector<Index> idx(static_cast<std::size_t>(space.size()));
    for (Index i = 0; i < space.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
    return PointSubset(space, std::move(idx));
  }

  const S& space() const { return *space_; }
  std::span<const Index> indices() const { return indices_; }
  Index size() const { return static_cast<Index>(indices_.size()); }

 private:
  const S* space_;
  std::vector<Index> indices_;
};

/// sup_{a in A} inf_{b in B} d(a, b).
template <MetricSpace S>
typename S::Scalar directed_hausdorff(const S& space, std::span<const Index> a, std::span<const Index> b) {
  using Scalar = typename S::Scalar;
  Scalar sup = 0;
  for (Index i : a) {
    Scalar inf = std::numeric_limits<Scalar>::infinity();
    for (Index j : b) {
      inf = std::min(inf, space(i, j));
      if (inf <= sup) break;  // cannot raise the running sup
    }
    sup = std::max(sup, inf);
  }
  return sup;
}

template <MetricSpace S>
typename S::Scalar hausdorff_distance(const S& space, std::span<const Index> a, std::span<const Index> b) {
  using Scalar = typename S::Scalar;
  if (a.empty() || b.empty()) throw UsageError("Hausdorff distance needs nonempty sets");
  Scalar from_b = 0;
  for (Index j : b) {
    Scalar inf = std::numeric_limits<Scalar>::infinity();
    for (Index i : a) {
      inf = std::min(inf, space(i, j));
      if (inf <= from_b) break;
    }
    from_b = std::max(from_b, inf);
  }
  return std::max(directed_hausdorff(space, a, b), from_b);
}

template <MetricSpace S>
typename S::Scalar hausdorff_distance(const PointSubset<S>& a, const PointSubset<S>& b) {
  if (&a.space() != &b.space()) throw UsageError("Hausdorff distance between subsets of different spaces");
  return hausdorff_distance(a.space(), a.indices(), b.indices());
}

/// Greedy farthest-point net: starting from point 0, repeatedly add the
/// point farthest from the current net (lowest index on ties) until every
/// point lies strictly within alpha of the net.
template <MetricSpace S>
PointSubset<S> covering_net(const S& space, double alpha) {
  using Scalar = typename S::Scalar;
  if (!(alpha > 0)) throw UsageError("covering_net: alpha must be positive");
  const Index n = space.size();
  if (n == 0) throw UsageError("covering_net: empty space");

  std::vector<Index> net{0};
  std::vector<Scalar> gap(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) gap[static_cast<std::size_t>(i)] = space(0, i);
  for (;;) {
    Index far = 0;
    for (Index i = 1; i < n; ++i)
      if (gap[static_cast<std::size_t>(i)] > gap[static_cast<std::size_t>(far)]) far = i;
    if (gap[static_cast<std::size_t>(far)] < alpha) break;
    net.push_back(far);
    for (Index i = 0; i < n; ++i)
      gap[static_cast<std::size_t>(i)] = std::min(gap[static_cast<std::size_t>(i)], space(far, i));
  }

  PointSubset<S> result(space, std::move(net));
  const auto everything = PointSubset<S>::all(space);
  if (!(hausdorff_distance(result, everything) < alpha)) {
    throw std::logic_error("covering_net: cover re-check failed");
  }
  return result;
}

// ---------------------------------------------------------------------------
// Metric validation

enum class Axiom { non_finite, diagonal, symmetry, positivity, triangle };

inline const char* to_string(Axiom a) {
  switch (a) {
    case Axiom::non_finite: return "non_finite";
    case Axiom::diagonal: return "diagonal";
    case Axiom::symmetry: return "symmetry";
    case Axiom::positivity: return "positivity";
    case Axiom::triangle: return "triangle";
  }
  return "?";
}

/// One violated axiom. For the triangle axiom the witness is
/// d(i,k) > d(i,j) + d(j,k) + tolerance; other axioms leave k (and j for
/// the diagonal) at -1.
struct MetricViolation {
  Axiom axiom;
  Index i = -1, j = -1, k = -1;
  double excess = 0;
};

struct ValidationReport {
  double tolerance = kMetricTolerance;
  std::array<Index, 5> counts{};  ///< per Axiom, total number of violations
  std::vector<MetricViolation> witnesses;  ///< capped at witness_limit

  bool ok() const {
    for (Index c : counts)
      if (c) return false;
    return true;
  }
  Index count(Axiom a) const { return counts[static_cast<std::size_t>(a)]; }
};

namespace detail {

inline void record(ValidationReport& r, std::size_t limit, MetricViolation v) {
  ++r.counts[static_cast<std::size_t>(v.axiom)];
  if (r.witnesses.size() < limit) r.witnesses.push_back(v);
}

// All-triples check d(i,k) <= min_j d(i,j) + d(j,k) + tol, tiled as a
// min-plus product so that each tile of minima stays in cache.
template <class Derived>
void check_triangles(const Eigen::MatrixBase<Derived>& d, bool symmetric, double tol, ValidationReport& r,
                     std::size_t limit) {
  using Scalar = typename Derived::Scalar;
  const Index n = d.rows();
  constexpr Index kRows = 256, kCols = 32;
  Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic> best(kRows, kCols);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> right(kCols);

  for (Index k0 = 0; k0 < n; k0 += kCols) {
    const Index bk = std::min(kCols, n - k0);
    const Index i_end = symmetric ? std::min(n, k0 + bk) : n;
    for (Index i0 = 0; i0 < i_end; i0 += kRows) {
      const Index bi = std::min(kRows, i_end - i0);
      best.topLeftCorner(bi, bk).setConstant(std::numeric_limits<Scalar>::infinity());
      for (Index j = 0; j < n; ++j) {
        if (symmetric) {
          right.head(bk) = d.col(j).segment(k0, bk);
        } else {
          right.head(bk) = d.row(j).segment(k0, bk).transpose();
        }
        const auto left = d.col(j).segment(i0, bi).array();
        for (Index c = 0; c < bk; ++c) {
          best.col(c).head(bi) = best.col(c).head(bi).min(left + right(c));
        }
      }
      for (Index c = 0; c < bk; ++c) {
        const Index k = k0 + c;
        for (Index a = 0; a < bi; ++a) {
          const Index i = i0 + a;
          if (symmetric && i >= k) continue;
          if (!(d(i, k) > best(a, c) + tol)) continue;
          for (Index j = 0; j < n; ++j) {
            const double excess = double(d(i, k)) - double(d(i, j)) - double(d(j, k));
            if (excess > tol) record(r, limit, {Axiom::triangle, i, j, k, excess});
          }
        }
      }
    }
  }
}

}  // namespace detail

/// Check every metric axiom of a distance matrix; violations are reported,
/// never thrown. Triangle inequalities are tested on all triples with an
/// additive tolerance.
template <class Derived>
ValidationReport validate_metric(const Eigen::MatrixBase<Derived>& d, double tolerance = kMetricTolerance,
                                 std::size_t witness_limit = 256) {
  ValidationReport r;
  r.tolerance = tolerance;
  const Index n = d.rows();
  if (d.cols() != n) throw UsageError("validate_metric: matrix must be square");

  bool finite = true;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (!std::isfinite(double(d(i, j)))) {
        detail::record(r, witness_limit, {Axiom::non_finite, i, j, -1, 0});
        finite = false;
      }
  if (!finite) return r;

  bool symmetric = true;
  for (Index i = 0; i < n; ++i) {
    if (d(i, i) != 0) detail::record(r, witness_limit, {Axiom::diagonal, i, -1, -1, double(d(i, i))});
    for (Index j = i + 1; j < n; ++j) {
      if (d(i, j) != d(j, i)) {
        symmetric = false;
        detail::record(r, witness_limit, {Axiom::symmetry, i, j, -1, double(d(i, j)) - double(d(j, i))});
      }
    }
    for (Index j = 0; j < n; ++j) {
      if (i != j && !(d(i, j) > 0)) detail::record(r, witness_limit, {Axiom::positivity, i, j, -1, double(d(i, j))});
    }
  }
  detail::check_triangles(d, symmetric, tolerance, r, witness_limit);
  return r;
}

template <MetricSpace S>
ValidationReport validate_metric(const S& space, double tolerance = kMetricTolerance,
                                 std::size_t witness_limit = 256) {
  return validate_metric(to_dense(space), tolerance, witness_limit);
}

/// Pullback metrics are checked on a reduced space: points with bitwise
/// identical images are interchangeable, so keeping three copies of each
/// image preserves every pattern a triple can take. Witness indices refer
/// to the original space.
template <typename Scalar>
ValidationReport validate_metric(const PullbackSpace<Scalar>& space, double tolerance = kMetricTolerance,
                                 std::size_t witness_limit = 256) {
  const auto& pts = space.images().points();
  const Index n = space.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  auto less = [&](Index a, Index b) {
    for (Index r = 0; r < pts.rows(); ++r)
      if (pts(r, a) != pts(r, b)) return pts(r, a) < pts(r, b);
    return a < b;
  };
  std::sort(order.begin(), order.end(), less);
  std::vector<Index> keep;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k >= 3 && pts.col(order[k]) == pts.col(order[k - 3])) continue;
    keep.push_back(order[k]);
  }
  std::sort(keep.begin(), keep.end());

  typename FiniteMetricSpace<Scalar>::Matrix d(keep.size(), keep.size());
  for (std::size_t b = 0; b < keep.size(); ++b)
    for (std::size_t a = 0; a < keep.size(); ++a) d(a, b) = space(keep[a], keep[b]);
  ValidationReport r = validate_metric(d, tolerance, witness_limit);
  auto back = [&](Index i) { return i < 0 ? i : keep[static_cast<std::size_t>(i)]; };
  for (MetricViolation& v : r.witnesses) {
    v.i = back(v.i);
    v.j = back(v.j);
    v.k = back(v.k);
  }
  return r;
}

/// rho(u,v) = pseudo(u,v) + alpha [u != v]. The input must be a
/// pseudometric (it may vanish off the diagonal); the result is a metric.
template <class Derived>
FiniteMetricSpace<typename Derived::Scalar> augmented_metric(const Eigen::MatrixBase<Derived>& pseudo,
                                                             typename Derived::Scalar alpha) {
  using Scalar = typename Derived::Scalar;
  if (!(alpha > 0)) throw UsageError("augmented_metric: alpha must be positive");
  const ValidationReport check = validate_metric(pseudo, kMetricTolerance, 1);
  for (Axiom a : {Axiom::non_finite, Axiom::diagonal, Axiom::symmetry, Axiom::triangle}) {
    if (check.count(a)) throw UsageError(std::string("augmented_metric: input is not a pseudometric (") + to_string(a) + ")");
  }
  const Index n = pseudo.rows();
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (pseudo(i, j) < 0) throw UsageError("augmented_metric: negative pseudometric entry");

  typename FiniteMetricSpace<Scalar>::Matrix rho(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) rho(i, j) = i == j ? Scalar(0) : Scalar(pseudo(i, j) + alpha);
  return FiniteMetricSpace<Scalar>(std::move(rho));
}

using MetricSpaceD = FiniteMetricSpace<double>;
using PointCloudD = PointCloud<double>;
using PullbackSpaceD = PullbackSpace<double>;
using AmbientMetricD = AmbientMetric<double>;

}  // namespace gh0
