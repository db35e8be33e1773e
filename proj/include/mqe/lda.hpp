#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mqe/measure.hpp"

namespace mqe {

struct LdaModel {
  std::vector<std::string> classes;  // sorted
  Matrix means;                      // classes x p
  Matrix covariance;                 // pooled within-class, shrinkage included
  Vector log_priors;
  double shrinkage = 0.0;
  Matrix weights;                    // p x classes, covariance^-1 means^T
  Vector offsets;                    // -1/2 mu_c^T covariance^-1 mu_c + log prior
};

/// shrinkage defaults to 1e-6 * trace / p of the pooled covariance (1e-6 if the trace is 0).
LdaModel lda_fit(const Matrix& x, const std::vector<std::string>& labels,
                 std::optional<double> shrinkage = std::nullopt);
/// Highest discriminant score wins; ties go to the first class in sorted order.
std::vector<std::string> lda_predict(const LdaModel& model, const Matrix& x);

struct Split {
  std::vector<Index> train;  // sorted
  std::vector<Index> test;   // sorted
  bool stratified = false;
};

/// round(frac * n_c) training members per class when labels allow it
/// (every class has >= 2 members), else round(frac * N) overall.
Split train_test_split(Index n, double train_frac, RngStream& rng,
                       const std::optional<std::vector<std::string>>& labels);

}  // namespace mqe
