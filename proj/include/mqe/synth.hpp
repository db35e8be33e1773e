#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mqe/io.hpp"
#include "mqe/measure.hpp"

namespace mqe {

/// mu_i = (S_i x + b_i) # rho with rho the unit-ball radial law.
struct ShiftScalingParams {
  Index N = 0;
  Index d = 0;
  Index m = 0;
  std::uint64_t seed = 0;
  std::vector<Vector> shifts;  // b_i
  std::vector<Matrix> roots;   // S_i, symmetric PSD
  std::optional<std::vector<std::string>> labels;
  /// Generation record of default_params (empty otherwise).
  std::vector<Vector> class_centers;
  double min_center_distance = 0.0;
  int center_draws = 0;

  void validate() const;
  json to_json() const;
  static ShiftScalingParams from_json(const json& j);
};

/// Unit-ball radial sample, covariance I / (3d).
PointMatrix sample_base(Index n, Index d, RngStream& rng);

/// Measure i holds m fresh base samples pushed forward, uniform weights;
/// measure i draws from substream i of stream 1 of params.seed.
Dataset gen_dataset(const ShiftScalingParams& params);

/// L class centers uniform on [-2, 2]^d, redrawn together until every pair is
/// at least min_center_distance apart; b_i = center of class (i mod L) + N(0, 0.25 I);
/// S_i = diag(U[0.75, 1.5]^d).
ShiftScalingParams default_params(Index N, Index d, Index m, Index classes, std::uint64_t seed,
                                  double min_center_distance = 1.0, int max_draws = 1000);

/// <b_i, b_j> + 1/(3d) <S_i - I, S_j - I>_F
Matrix true_lot_gram(const ShiftScalingParams& params);
/// Closed form for k(x, y) = x.y + (x.y)^2 with Sigma_i = S_i^2.
Matrix true_kme_gram(const ShiftScalingParams& params);

}  // namespace mqe
