#pragma once

#include <vector>

#include "mqe/lot.hpp"
#include "mqe/measure.hpp"

namespace mqe {

struct PcaResult {
  /// Top-q Gram eigenvalues, descending.
  Vector eigenvalues;
  /// N x q, column j = sqrt(max(lambda_j, 0)) u_j.
  Matrix scores;
  /// N x q, column j = u_j / sqrt(lambda_j); zero for vanishing eigenvalues.
  Matrix coefficients;
  bool centered = false;
};

/// Eigenvectors are normalized so their largest-magnitude entry is positive.
PcaResult gram_pca(const Matrix& gram, Index q, bool centered);

/// J G J with J = I - (1/N) 1 1^T
Matrix double_center(const Matrix& gram);

/// tr(S P^{<=q}) - tr(S P_K^{<=q}) where S is the uncentered covariance of
/// the full embeddings and P_K^{<=q} the top-q projector of the quantized ones.
/// Inputs: G = full Gram, G_K = quantized Gram, C_il = <u_i, u^K_l>.
double pca_excess_risk_from_grams(const Matrix& gram, const Matrix& gram_quantized,
                                  const Matrix& cross, Index q);
double pca_excess_risk(const std::vector<LotEmbedding>& full,
                       const std::vector<LotEmbedding>& quantized, Index q);

}  // namespace mqe
