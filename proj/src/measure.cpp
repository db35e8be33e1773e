#include "mqe/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mqe/error.hpp"

namespace mqe {

namespace {

void validate_points(const PointMatrix& points) {
  require(points.rows() >= 1, ErrorKind::invalid_argument, "measure needs at least one atom");
  require(points.cols() >= 1, ErrorKind::invalid_argument, "measure dimension must be >= 1");
  require(points.allFinite(), ErrorKind::invalid_argument, "measure has non-finite coordinates");
}

// Lexicographic row order, ties broken by index so the result is a total order.
std::vector<Index> lexicographic_order(const PointMatrix& points) {
  std::vector<Index> order(static_cast<std::size_t>(points.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    for (Index c = 0; c < points.cols(); ++c) {
      if (points(a, c) != points(b, c)) return points(a, c) < points(b, c);
    }
    return a < b;
  });
  return order;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(PointMatrix points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  validate_points(points_);
  require(weights_.size() == points_.rows(), ErrorKind::invalid_argument,
          "weight count " + std::to_string(weights_.size()) + " does not match point count " +
              std::to_string(points_.rows()));
  require(weights_.allFinite(), ErrorKind::invalid_argument, "non-finite weight");
  require((weights_.array() >= 0.0).all(), ErrorKind::invalid_argument, "negative weight");
  const double total = weights_.sum();
  require(total > 0.0, ErrorKind::invalid_argument, "zero total weight");
  weights_ /= total;
}

DiscreteMeasure::DiscreteMeasure(PointMatrix points)
    : DiscreteMeasure(points, Vector::Constant(points.rows(), 1.0)) {}

DiscreteMeasure DiscreteMeasure::dirac(const Vector& x) {
  PointMatrix p(1, x.size());
  p.row(0) = x.transpose();
  return DiscreteMeasure(std::move(p));
}

Vector DiscreteMeasure::mean() const { return points_.transpose() * weights_; }

DiscreteMeasure DiscreteMeasure::pruned(double threshold) const {
  std::vector<Index> keep;
  for (Index i = 0; i < size(); ++i)
    if (weights_[i] > threshold) keep.push_back(i);
  require(!keep.empty(), ErrorKind::invalid_argument, "pruning removed every atom");
  PointMatrix p(static_cast<Index>(keep.size()), dim());
  Vector w(static_cast<Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    p.row(static_cast<Index>(r)) = points_.row(keep[r]);
    w[static_cast<Index>(r)] = weights_[keep[r]];
  }
  return DiscreteMeasure(std::move(p), std::move(w));
}

Dataset::Dataset(std::vector<DiscreteMeasure> measures, std::vector<std::string> ids,
                 std::optional<std::vector<std::string>> labels)
    : measures_(std::move(measures)), ids_(std::move(ids)), labels_(std::move(labels)) {
  require(!measures_.empty(), ErrorKind::invalid_argument, "dataset needs at least one measure");
  require(ids_.size() == measures_.size(), ErrorKind::invalid_argument,
          "dataset ids and measures differ in length");
  const Index d = measures_.front().dim();
  for (std::size_t i = 0; i < measures_.size(); ++i) {
    require(measures_[i].dim() == d, ErrorKind::dimension_mismatch,
            "measure '" + ids_[i] + "' has dimension " + std::to_string(measures_[i].dim()) +
                ", expected " + std::to_string(d));
  }
  if (labels_) {
    require(labels_->size() == measures_.size(), ErrorKind::invalid_argument,
            "dataset labels and measures differ in length");
  }
}

namespace {
std::vector<std::string> default_ids(std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back("m" + std::to_string(i));
  return ids;
}
}  // namespace

Dataset::Dataset(std::vector<DiscreteMeasure> measures,
                 std::optional<std::vector<std::string>> labels)
    : Dataset(measures, default_ids(measures.size()), std::move(labels)) {}

std::size_t Dataset::total_points() const {
  std::size_t total = 0;
  for (const auto& m : measures_) total += static_cast<std::size_t>(m.size());
  return total;
}

Index count_distinct_support(const DiscreteMeasure& m) {
  const auto order = lexicographic_order(m.points());
  Index count = 0;
  Index prev = -1;
  for (Index i : order) {
    if (m.weight(i) <= 0.0) continue;
    if (prev < 0 || m.point(i) != m.point(prev)) ++count;
    prev = i;
  }
  return count;
}

DiscreteMeasure merge_duplicate_atoms(const DiscreteMeasure& m) {
  const auto order = lexicographic_order(m.points());
  // representative[i]: first occurrence (smallest index) of point i's location.
  std::vector<Index> representative(static_cast<std::size_t>(m.size()));
  for (std::size_t k = 0; k < order.size();) {
    std::size_t end = k + 1;
    while (end < order.size() && m.point(order[end]) == m.point(order[k])) ++end;
    for (std::size_t t = k; t < end; ++t) representative[static_cast<std::size_t>(order[t])] = order[k];
    k = end;
  }
  std::vector<Index> kept;
  std::vector<Index> slot(static_cast<std::size_t>(m.size()), -1);
  for (Index i = 0; i < m.size(); ++i) {
    if (representative[static_cast<std::size_t>(i)] == i) {
      slot[static_cast<std::size_t>(i)] = static_cast<Index>(kept.size());
      kept.push_back(i);
    }
  }
  PointMatrix p(static_cast<Index>(kept.size()), m.dim());
  Vector w = Vector::Zero(static_cast<Index>(kept.size()));
  for (std::size_t r = 0; r < kept.size(); ++r) p.row(static_cast<Index>(r)) = m.point(kept[r]);
  for (Index i = 0; i < m.size(); ++i)
    w[slot[static_cast<std::size_t>(representative[static_cast<std::size_t>(i)])]] += m.weight(i);
  return DiscreteMeasure(std::move(p), std::move(w));
}

Index sample_index(const Vector& weights, RngStream& rng) {
  const double total = weights.sum();
  const double target = rng.uniform01() * total;
  double acc = 0.0;
  Index last_positive = -1;
  for (Index i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  require(last_positive >= 0, ErrorKind::invalid_argument, "cannot sample from zero weights");
  return last_positive;
}

DiscreteMeasure subsample_measure(const DiscreteMeasure& m, std::size_t count, RngStream& rng) {
  require(count >= 1, ErrorKind::invalid_argument, "subsample count must be >= 1");
  std::vector<double> cumulative(static_cast<std::size_t>(m.size()));
  double acc = 0.0;
  for (Index i = 0; i < m.size(); ++i) {
    acc += m.weight(i);
    cumulative[static_cast<std::size_t>(i)] = acc;
  }
  PointMatrix p(static_cast<Index>(count), m.dim());
  for (std::size_t r = 0; r < count; ++r) {
    const double u = rng.uniform01() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    Index idx = it == cumulative.end() ? m.size() - 1
                                       : static_cast<Index>(it - cumulative.begin());
    // Never land on a zero-weight atom through rounding at the upper end.
    while (m.weight(idx) <= 0.0 && idx > 0) --idx;
    p.row(static_cast<Index>(r)) = m.point(idx);
  }
  return DiscreteMeasure(std::move(p));
}

std::vector<Index> weighted_sample_without_replacement(const Vector& weights, std::size_t k,
                                                       RngStream& rng) {
  // Efraimidis-Spirakis: keys log(u)/w; the k largest keys, in decreasing
  // order, follow the successive-sampling law.
  std::vector<std::pair<double, Index>> keys;
  keys.reserve(static_cast<std::size_t>(weights.size()));
  for (Index i = 0; i < weights.size(); ++i) {
    double u = rng.uniform01();
    if (weights[i] <= 0.0) continue;
    while (u == 0.0) u = rng.uniform01();
    keys.emplace_back(std::log(u) / weights[i], i);
  }
  require(keys.size() >= k, ErrorKind::support_too_small,
          "need " + std::to_string(k) + " atoms with positive weight, have " +
              std::to_string(keys.size()));
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k), keys.end(),
                    [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first : a.second < b.second;
                    });
  std::vector<Index> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) out.push_back(keys[r].second);
  return out;
}

}  // namespace mqe
