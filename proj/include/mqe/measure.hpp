#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mqe/rng.hpp"

namespace mqe {

using Index = Eigen::Index;
/// One point per row.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

template <typename A, typename B>
inline double squared_distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return (a - b).squaredNorm();
}

/// Weighted point cloud in R^d with weights on the probability simplex.
///
/// Weights are renormalized on construction. Zero weights are kept: atoms are
/// never pruned implicitly, see pruned().
class DiscreteMeasure {
 public:
  DiscreteMeasure(PointMatrix points, Vector weights);
  /// Uniform weights 1/n.
  explicit DiscreteMeasure(PointMatrix points);

  static DiscreteMeasure dirac(const Vector& x);

  const PointMatrix& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  Index size() const noexcept { return points_.rows(); }
  Index dim() const noexcept { return points_.cols(); }
  auto point(Index i) const { return points_.row(i); }
  double weight(Index i) const { return weights_[i]; }

  Vector mean() const;
  /// Copy without atoms whose weight is <= threshold.
  DiscreteMeasure pruned(double threshold) const;

 private:
  PointMatrix points_;
  Vector weights_;
};

/// A family of measures sharing one ambient dimension.
class Dataset {
 public:
  Dataset(std::vector<DiscreteMeasure> measures, std::vector<std::string> ids,
          std::optional<std::vector<std::string>> labels = std::nullopt);
  /// Ids default to "m0", "m1", ...
  explicit Dataset(std::vector<DiscreteMeasure> measures,
                   std::optional<std::vector<std::string>> labels = std::nullopt);

  const std::vector<DiscreteMeasure>& measures() const noexcept { return measures_; }
  const DiscreteMeasure& measure(std::size_t i) const { return measures_.at(i); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::optional<std::vector<std::string>>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return measures_.size(); }
  Index dim() const { return measures_.front().dim(); }
  std::size_t total_points() const;

 private:
  std::vector<DiscreteMeasure> measures_;
  std::vector<std::string> ids_;
  std::optional<std::vector<std::string>> labels_;
};

/// Number of distinct rows among atoms with weight > 0.
Index count_distinct_support(const DiscreteMeasure& m);

/// Merges atoms at identical locations, keeping first-occurrence order.
DiscreteMeasure merge_duplicate_atoms(const DiscreteMeasure& m);

/// count i.i.d. draws from m (with replacement), each with weight 1/count.
DiscreteMeasure subsample_measure(const DiscreteMeasure& m, std::size_t count, RngStream& rng);

/// Draws k distinct indices with probability proportional to weights
/// (successive sampling without replacement). Indices are returned in draw
/// order. Requires at least k positive weights.
std::vector<Index> weighted_sample_without_replacement(const Vector& weights, std::size_t k,
                                                       RngStream& rng);

/// Index i with probability weights[i] / sum(weights).
Index sample_index(const Vector& weights, RngStream& rng);

}  // namespace mqe
