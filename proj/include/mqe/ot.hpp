#pragma once

#include <filesystem>
#include <vector>

#include "mqe/measure.hpp"
#include "mqe/network_simplex.hpp"

namespace mqe {

/// Sparse coupling between two discrete measures with its squared-Euclidean cost.
struct TransportPlan {
  Index source_size = 0;
  Index target_size = 0;
  /// Positive-mass entries ordered by (source, target).
  std::vector<FlowEntry> entries;
  /// sum of mass * |x_i - y_j|^2
  double cost = 0.0;

  Vector row_sums() const;
  Vector column_sums() const;
};

/// Pairwise squared Euclidean distances, rows of x against rows of y.
RowMatrix squared_distances(const PointMatrix& x, const PointMatrix& y);

/// Exact optimal plan for the squared-Euclidean cost.
TransportPlan solve_ot(const DiscreteMeasure& a, const DiscreteMeasure& b);

double w2sq(const DiscreteMeasure& a, const DiscreteMeasure& b);
double w2(const DiscreteMeasure& a, const DiscreteMeasure& b);

/// T(x_i) = sum_j P_ij y_j / sum_j P_ij for every source atom.
PointMatrix barycentric_projection(const TransportPlan& plan, const DiscreteMeasure& source,
                                   const DiscreteMeasure& target);

/// Optimal matching between two equally sized, uniformly weighted families
/// of measures with W2^2 as ground cost.
struct NestedCoupling {
  /// permutation[i] is the member of the second family matched to member i.
  std::vector<Index> permutation;
  /// (1/N) sum_i W2^2(A_i, B_permutation[i])
  double value = 0.0;
  /// W2^2(A_i, B_j)
  Matrix cost;
};

/// Cycles of the matching that cost no more than the identity on their
/// members are replaced by it.
NestedCoupling nested_w2sq(const std::vector<DiscreteMeasure>& a,
                           const std::vector<DiscreteMeasure>& b);

/// Exact minimum-cost perfect matching on a square cost matrix; solved as a
/// transportation problem with unit marginals, so the basic solution is a
/// permutation.
std::vector<Index> solve_assignment(const Matrix& cost);

/// W2^2 between measures that share one support. The K x K cost matrix is
/// computed once and reused for every pair.
class SharedSupportW2 {
 public:
  explicit SharedSupportW2(const PointMatrix& support);

  double operator()(const Vector& weights_a, const Vector& weights_b) const;
  Index size() const noexcept { return cost_.rows(); }

 private:
  RowMatrix cost_;
};

double w2sq_shared_support(const Vector& weights_a, const Vector& weights_b,
                           const PointMatrix& support);

/// CSV rows "i,j,mass" after a "# cost=<value>" header comment.
void save_plan_csv(const TransportPlan& plan, const std::filesystem::path& path);

}  // namespace mqe
